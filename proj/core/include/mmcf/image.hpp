#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mmcf {

/// Axis-aligned box in pixel coordinates, half-open: [x0, x1) x [y0, y1).
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    long area() const { return static_cast<long>(width()) * height(); }
    bool inside(int image_width, int image_height) const {
        return x0 >= 0 && y0 >= 0 && x1 <= image_width && y1 <= image_height && x0 <= x1 && y0 <= y1;
    }
    bool operator==(const BoundingBox&) const = default;
};

/// 8-bit RGB image, row-major, interleaved channels.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    static constexpr int kChannels = 3;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * kChannels, fill) {}

    bool empty() const { return data.empty(); }
    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c];
    }
    bool operator==(const Image&) const = default;
};

/// Binary P6.
void write_ppm(const Image& image, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

/// Binary P5 grayscale.
void write_pgm(const std::vector<std::uint8_t>& pixels, int width, int height,
               const std::filesystem::path& path);
std::vector<std::uint8_t> read_pgm(const std::filesystem::path& path, int& width, int& height);

}  // namespace mmcf
