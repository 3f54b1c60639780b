#include "mmcf/fusion.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mmcf {

std::size_t argmax(std::span<const float> scores) {
    if (scores.empty()) throw std::invalid_argument("argmax of an empty score array");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

ClassScores renormalize(const ClassScores& scores) {
    double sum = 0;
    for (float s : scores) sum += s;
    ClassScores out;
    if (!(sum > 0)) {
        out.fill(1.0f / static_cast<float>(kClassCount));
        return out;
    }
    for (std::size_t i = 0; i < kClassCount; ++i) out[i] = static_cast<float>(scores[i] / sum);
    return out;
}

Vote hard_vote(const ClassScores& vision, const ClassScores& tactile, const ClassScores& proprio) {
    const std::size_t a = argmax(vision);
    const std::size_t b = argmax(tactile);
    const std::size_t c = argmax(proprio);
    if (a == b || a == c) return class_from_index(a);
    if (b == c) return class_from_index(b);
    return std::nullopt;
}

ContainerClass soft_vote(const ClassScores& vision, const ClassScores& tactile, const ClassScores& proprio) {
    ClassScores sum{};
    for (std::size_t i = 0; i < kClassCount; ++i) sum[i] = vision[i] + tactile[i] + proprio[i];
    return class_from_index(argmax(sum));
}

std::array<float, kMidFusionWidth> mid_fuse_input(const ClassScores& vision, const ClassScores& tactile,
                                                  const ClassScores& proprio) {
    std::array<float, kMidFusionWidth> out{};
    std::copy(vision.begin(), vision.end(), out.begin());
    std::copy(tactile.begin(), tactile.end(), out.begin() + kClassCount);
    std::copy(proprio.begin(), proprio.end(), out.begin() + 2 * kClassCount);
    return out;
}

SensorFusionInput sensor_fuse_input(Tensor<float> image, std::span<const float> tactile,
                                    std::span<const float> proprio) {
    if (tactile.size() != kTactileWidth) {
        throw std::invalid_argument("tactile vector has width " + std::to_string(tactile.size()) + ", expected " +
                                    std::to_string(kTactileWidth));
    }
    if (proprio.size() != kProprioWidth) {
        throw std::invalid_argument("proprioception vector has width " + std::to_string(proprio.size()) +
                                    ", expected " + std::to_string(kProprioWidth));
    }
    SensorFusionInput out;
    out.image = std::move(image);
    std::copy(tactile.begin(), tactile.end(), out.dense.begin());
    std::copy(proprio.begin(), proprio.end(), out.dense.begin() + kTactileWidth);
    return out;
}

}  // namespace mmcf
