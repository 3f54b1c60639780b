#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmcf/layers.hpp"
#include "mmcf/loss.hpp"
#include "mmcf/tensor.hpp"

namespace mmcf {

/// Everything a forward pass produced: the batched inputs and the output of
/// every layer in global order. The last entry is the network output.
template <typename T>
struct Activations {
    std::vector<Tensor<T>> inputs;
    std::vector<Tensor<T>> outputs;

    const Tensor<T>& output() const { return outputs.back(); }
};

template <typename T>
struct BackwardResult {
    T loss{};                          // mean over the batch
    std::vector<Tensor<T>> gradients;  // aligned with Network::parameters()
};

/// Forward pass of a single layer on a batch. `inputs` holds two tensors for
/// concat and one otherwise; `params` holds weight and bias for parameterized
/// layers.
template <typename T>
Tensor<T> forward_layer(const LayerSpec& layer, std::span<const Tensor<T>> params,
                        std::span<const Tensor<T>> inputs);

/// A NetworkSpec together with its parameters.
template <typename T>
class Network {
public:
    Network() = default;
    /// Validates the spec; parameters start at zero.
    explicit Network(NetworkSpec spec);

    /// Fan-in/fan-out scaled uniform weights (bound sqrt(6/(fan_in+fan_out))),
    /// zero biases, drawn from a generator seeded with `seed`.
    static Network initialized(NetworkSpec spec, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    std::vector<Tensor<T>>& parameters() { return params_; }
    const std::vector<Tensor<T>>& parameters() const { return params_; }
    /// Replaces the parameters after checking every shape.
    void set_parameters(std::vector<Tensor<T>> params);

    /// Inputs are batched: [N, ...input_shape], one tensor per branch.
    /// An unbatched tensor of exactly input_shape is treated as N = 1.
    Activations<T> forward(std::span<const Tensor<T>> inputs) const;
    Activations<T> forward(const Tensor<T>& input) const {
        return forward(std::span<const Tensor<T>>(&input, 1));
    }

    /// Gradients of the batch-mean cross-entropy against one-hot targets [N, C].
    BackwardResult<T> backward(const Activations<T>& acts, const Tensor<T>& targets,
                               LossKind loss = LossKind::Literal) const;

    template <typename U>
    Network<U> cast() const {
        Network<U> out(spec_);
        std::vector<Tensor<U>> params;
        params.reserve(params_.size());
        for (const auto& p : params_) params.push_back(p.template cast<U>());
        out.set_parameters(std::move(params));
        return out;
    }

private:
    NetworkSpec spec_;
    std::vector<Shape> layer_shapes_;
    std::vector<int> param_index_;  // per global layer; -1 when unparameterized
    std::vector<Tensor<T>> params_;
};

}  // namespace mmcf
