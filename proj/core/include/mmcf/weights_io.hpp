#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "mmcf/network.hpp"

namespace mmcf {

/// Weight file layout (all integers little-endian):
///
///   "MMCF" | u8 version=1 | u32 parameterized layer count
///   per layer, two tensor records (weight, then bias):
///     u32 rank | u32 dim * rank | f32 * product(dims)
///
/// The file must end exactly after the last record.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kWeightFormatVersion = 1;

/// Weight and bias of one parameterized layer.
struct LayerWeights {
    Tensor<float> weight;
    Tensor<float> bias;
};

std::vector<std::uint8_t> encode_weights(const Network<float>& net);
std::vector<LayerWeights> decode_weights(std::span<const std::uint8_t> bytes);

void save_weights(const Network<float>& net, const std::filesystem::path& path);
std::vector<LayerWeights> load_weights(const std::filesystem::path& path);

/// Loads and checks every shape against `expected`.
Network<float> load_weights(const std::filesystem::path& path, const NetworkSpec& expected);

}  // namespace mmcf
