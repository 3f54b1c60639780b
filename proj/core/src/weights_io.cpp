#include "mmcf/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace mmcf {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'C', 'F'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tensor(std::vector<std::uint8_t>& out, const Tensor<float>& t) {
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : t.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("weights: unexpected end of file");
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    Tensor<float> tensor() {
        const std::uint32_t rank = u32();
        if (rank == 0 || rank > 8) throw FormatError("weights: implausible tensor rank " + std::to_string(rank));
        Shape shape;
        std::uint64_t count = 1;
        for (std::uint32_t i = 0; i < rank; ++i) {
            const std::uint32_t d = u32();
            if (d == 0) throw FormatError("weights: zero tensor dimension");
            shape.push_back(d);
            count *= d;
            if (count > remaining()) throw FormatError("weights: unexpected end of file");
        }
        need(count * 4);
        std::vector<float> data(count);
        for (auto& v : data) v = std::bit_cast<float>(u32());
        return Tensor<float>(std::move(shape), std::move(data));
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_weights(const Network<float>& net) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.push_back(kWeightFormatVersion);
    const auto& params = net.parameters();
    put_u32(out, static_cast<std::uint32_t>(params.size() / 2));
    for (const auto& p : params) put_tensor(out, p);
    return out;
}

std::vector<LayerWeights> decode_weights(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw FormatError("weights: unexpected end of file");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("weights: bad magic (expected MMCF)");
    Reader r(bytes.subspan(4));
    const std::uint8_t version = r.u8();
    if (version != kWeightFormatVersion) {
        throw FormatError("weights: unsupported version " + std::to_string(version));
    }
    const std::uint32_t layers = r.u32();
    std::vector<LayerWeights> out;
    for (std::uint32_t i = 0; i < layers; ++i) {
        LayerWeights lw;
        lw.weight = r.tensor();
        lw.bias = r.tensor();
        out.push_back(std::move(lw));
    }
    if (r.remaining() != 0) {
        throw FormatError("weights: " + std::to_string(r.remaining()) + " trailing byte(s) after last layer");
    }
    return out;
}

void save_weights(const Network<float>& net, const std::filesystem::path& path) {
    const auto bytes = encode_weights(net);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<LayerWeights> load_weights(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decode_weights(bytes);
}

Network<float> load_weights(const std::filesystem::path& path, const NetworkSpec& expected) {
    auto layers = load_weights(path);
    Network<float> net(expected);
    const auto want = parameter_shapes(expected);
    if (layers.size() * 2 != want.size()) {
        throw FormatError("weights: file has " + std::to_string(layers.size()) +
                          " parameterized layers, network expects " + std::to_string(want.size() / 2));
    }
    std::vector<Tensor<float>> params;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].weight.shape() != want[2 * i] || layers[i].bias.shape() != want[2 * i + 1]) {
            throw FormatError("weights: layer " + std::to_string(i) + " shape " +
                              shape_to_string(layers[i].weight.shape()) + " does not match expected " +
                              shape_to_string(want[2 * i]));
        }
        params.push_back(std::move(layers[i].weight));
        params.push_back(std::move(layers[i].bias));
    }
    net.set_parameters(std::move(params));
    return net;
}

}  // namespace mmcf
