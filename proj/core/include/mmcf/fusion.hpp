#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "mmcf/classes.hpp"
#include "mmcf/datagen.hpp"
#include "mmcf/tensor.hpp"

namespace mmcf {

/// One sigmoid activation per class, indexed in ContainerClass order.
using ClassScores = std::array<float, kClassCount>;

/// Scores divided by their sum: the class distribution a classifier trained
/// with the normalized loss actually models. All-zero input gives a uniform
/// distribution.
ClassScores renormalize(const ClassScores& scores);

/// A hard-voting outcome; nullopt means undecided.
using Vote = std::optional<ContainerClass>;

inline constexpr std::size_t kMidFusionWidth = 3 * kClassCount;
inline constexpr std::size_t kSensorDenseWidth = kTactileWidth + kProprioWidth;

/// Index of the largest score; exact ties go to the lowest index.
std::size_t argmax(std::span<const float> scores);

/// Majority of the three per-classifier argmaxes, or undecided without one.
Vote hard_vote(const ClassScores& vision, const ClassScores& tactile, const ClassScores& proprio);

/// Argmax of the elementwise sum of the raw scores.
ContainerClass soft_vote(const ClassScores& vision, const ClassScores& tactile, const ClassScores& proprio);

/// vision | tactile | proprio
std::array<float, kMidFusionWidth> mid_fuse_input(const ClassScores& vision, const ClassScores& tactile,
                                                  const ClassScores& proprio);

struct SensorFusionInput {
    Tensor<float> image;
    std::array<float, kSensorDenseWidth> dense{};
};

/// Pairs the image with tactile | proprio. Throws std::invalid_argument when
/// the vectors are not 15 and 69 wide.
SensorFusionInput sensor_fuse_input(Tensor<float> image, std::span<const float> tactile,
                                    std::span<const float> proprio);

}  // namespace mmcf
