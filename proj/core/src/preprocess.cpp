#include "mmcf/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mmcf {

Image crop_to_bbox(const Image& image, const BoundingBox& box, double margin_fraction) {
    if (box.width() <= 0 || box.height() <= 0) {
        throw std::invalid_argument("cannot crop to a zero-area bounding box");
    }
    if (!box.inside(image.width, image.height)) {
        throw std::invalid_argument("bounding box lies outside the " + std::to_string(image.width) + "x" +
                                    std::to_string(image.height) + " image");
    }
    if (margin_fraction < 0) throw std::invalid_argument("crop margin must be non-negative");

    const int longest = std::max(box.width(), box.height());
    int side = static_cast<int>(std::lround(longest * (1.0 + 2.0 * margin_fraction)));
    side = std::clamp(side, 1, std::min(image.width, image.height));

    // floor((x0 + x1 - side) / 2) with integer arithmetic
    auto start_of = [side](int lo, int hi, int limit) {
        const int twice = lo + hi - side;
        const int start = twice >= 0 ? twice / 2 : -((-twice + 1) / 2);
        return std::clamp(start, 0, limit - side);
    };
    const int sx = start_of(box.x0, box.x1, image.width);
    const int sy = start_of(box.y0, box.y1, image.height);

    Image out(side, side);
    const std::size_t row_bytes = static_cast<std::size_t>(side) * Image::kChannels;
    for (int y = 0; y < side; ++y) {
        const auto* src = &image.data[(static_cast<std::size_t>(sy + y) * image.width + sx) * Image::kChannels];
        std::copy(src, src + row_bytes, &out.data[static_cast<std::size_t>(y) * row_bytes]);
    }
    return out;
}

Image invert(Image image) {
    for (auto& v : image.data) v = static_cast<std::uint8_t>(255 - v);
    return image;
}

Image resize(const Image& image, int side) {
    if (side < 1) throw std::invalid_argument("resize side must be at least 1");
    if (image.empty()) throw std::invalid_argument("cannot resize an empty image");

    struct Tap {
        int i0, i1;
        double f;
    };
    auto taps = [side](int extent) {
        std::vector<Tap> out(static_cast<std::size_t>(side));
        const double scale = static_cast<double>(extent) / side;
        for (int o = 0; o < side; ++o) {
            double src = (o + 0.5) * scale - 0.5;
            src = std::clamp(src, 0.0, static_cast<double>(extent - 1));
            const int i0 = static_cast<int>(std::floor(src));
            const int i1 = std::min(i0 + 1, extent - 1);
            out[static_cast<std::size_t>(o)] = {i0, i1, src - i0};
        }
        return out;
    };
    const auto tx = taps(image.width);
    const auto ty = taps(image.height);

    Image out(side, side);
    for (int y = 0; y < side; ++y) {
        const Tap& ry = ty[static_cast<std::size_t>(y)];
        for (int x = 0; x < side; ++x) {
            const Tap& rx = tx[static_cast<std::size_t>(x)];
            for (int c = 0; c < Image::kChannels; ++c) {
                const double top = image.at(rx.i0, ry.i0, c) * (1 - rx.f) + image.at(rx.i1, ry.i0, c) * rx.f;
                const double bottom = image.at(rx.i0, ry.i1, c) * (1 - rx.f) + image.at(rx.i1, ry.i1, c) * rx.f;
                const double v = top * (1 - ry.f) + bottom * ry.f;
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

Tensor<float> normalize(const Image& image) {
    const std::size_t h = static_cast<std::size_t>(image.height);
    const std::size_t w = static_cast<std::size_t>(image.width);
    Tensor<float> out({static_cast<std::size_t>(Image::kChannels), h, w});
    float* dst = out.data();
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < h * w; ++i) {
            dst[c * h * w + i] = static_cast<float>(image.data[i * 3 + c]) / 255.0f;
        }
    }
    return out;
}

Image denormalize(const Tensor<float>& tensor) {
    if (tensor.rank() != 3 || tensor.dim(0) != 3) {
        throw std::invalid_argument("denormalize expects a (3, H, W) tensor, got " + shape_to_string(tensor.shape()));
    }
    const std::size_t h = tensor.dim(1);
    const std::size_t w = tensor.dim(2);
    Image out(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < h * w; ++i) {
            const float v = std::clamp(tensor[c * h * w + i], 0.0f, 1.0f);
            out.data[i * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
        }
    }
    return out;
}

Tensor<float> preprocess_frame(const Image& image, const BoundingBox& box, int side, double margin_fraction) {
    return normalize(resize(invert(crop_to_bbox(image, box, margin_fraction)), side));
}

}  // namespace mmcf
