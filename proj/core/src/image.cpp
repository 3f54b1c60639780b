#include "mmcf/image.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace mmcf {

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& in) {
    std::string tok;
    char ch;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(ch);
    }
    return tok;
}

std::vector<std::uint8_t> read_netpbm(const std::filesystem::path& path, const char* magic, int channels,
                                      int& width, int& height) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    if (header_token(f) != magic) throw std::runtime_error(path.string() + ": not a binary " + magic + " file");
    width = std::stoi(header_token(f));
    height = std::stoi(header_token(f));
    const int maxval = std::stoi(header_token(f));
    if (width <= 0 || height <= 0 || maxval != 255) {
        throw std::runtime_error(path.string() + ": unsupported header");
    }
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height * channels);
    f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (f.gcount() != static_cast<std::streamsize>(data.size())) {
        throw std::runtime_error(path.string() + ": truncated pixel data");
    }
    return data;
}

void write_netpbm(const std::vector<std::uint8_t>& data, const char* magic, int width, int height,
                  const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << magic << "\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_ppm(const Image& image, const std::filesystem::path& path) {
    write_netpbm(image.data, "P6", image.width, image.height, path);
}

Image read_ppm(const std::filesystem::path& path) {
    Image img;
    img.data = read_netpbm(path, "P6", Image::kChannels, img.width, img.height);
    return img;
}

void write_pgm(const std::vector<std::uint8_t>& pixels, int width, int height,
               const std::filesystem::path& path) {
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("pgm pixel count does not match dimensions");
    }
    write_netpbm(pixels, "P5", width, height, path);
}

std::vector<std::uint8_t> read_pgm(const std::filesystem::path& path, int& width, int& height) {
    return read_netpbm(path, "P5", 1, width, height);
}

}  // namespace mmcf
