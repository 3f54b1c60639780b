#pragma once

#include <cstdint>

#include "mmcf/image.hpp"
#include "mmcf/tensor.hpp"

namespace mmcf {

inline constexpr double kDefaultCropMargin = 0.15;

/// Square crop centred on the box. The side is the longer box side grown by
/// margin_fraction on both ends, rounded, and clamped to the shorter image
/// side; the window slides back inside the image when it would overhang.
/// Throws std::invalid_argument for a zero-area box or one outside the image.
Image crop_to_bbox(const Image& image, const BoundingBox& box, double margin_fraction = kDefaultCropMargin);

/// v -> 255 - v on every channel.
Image invert(Image image);

/// Bilinear resampling to side x side with half-pixel centres and edge
/// clamping. Results are rounded half up.
Image resize(const Image& image, int side);

/// (3, H, W) channel-major tensor of v / 255.
Tensor<float> normalize(const Image& image);
/// Inverse of normalize; values are clamped to [0, 1] and rounded.
Image denormalize(const Tensor<float>& tensor);

/// crop -> invert -> resize -> normalize.
Tensor<float> preprocess_frame(const Image& image, const BoundingBox& box, int side,
                               double margin_fraction = kDefaultCropMargin);

}  // namespace mmcf
