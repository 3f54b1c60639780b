#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmcf/loss.hpp"
#include "mmcf/tensor.hpp"

namespace mmcf {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Normalized;

    /// Throws std::invalid_argument when any field is out of range.
    void validate() const;
};

/// First and second moment accumulators, one per parameter tensor.
template <typename T>
struct AdamState {
    std::vector<Tensor<T>> m;
    std::vector<Tensor<T>> v;
    std::uint64_t t = 0;

    static AdamState zeros_like(const std::vector<Tensor<T>>& params);
};

/// One bias-corrected Adam update applied in place. Throws std::runtime_error
/// on a non-finite gradient (before touching any parameter).
template <typename T>
void adam_step(std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads,
               AdamState<T>& state, const TrainConfig& cfg);

}  // namespace mmcf
