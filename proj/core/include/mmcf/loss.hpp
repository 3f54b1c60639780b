#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "mmcf/tensor.hpp"

namespace mmcf {

/// Floor (and ceiling 1 - floor) applied to scores inside the log.
inline constexpr double kLossFloor = 1e-7;

/// Literal: loss = -log(score[target]) on the raw sigmoid scores.
/// Normalized: scores are first divided by their sum (what common deep-learning
/// frameworks do when categorical cross-entropy receives non-softmax outputs).
enum class LossKind { Literal, Normalized };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Index of the single 1 in a one-hot vector; throws std::invalid_argument
/// for anything else.
template <typename T>
std::size_t one_hot_index(std::span<const T> target);

template <typename T>
T categorical_cross_entropy(std::span<const T> scores, std::size_t target,
                            LossKind kind = LossKind::Literal);

template <typename T>
T categorical_cross_entropy(std::span<const T> scores, std::span<const T> one_hot,
                            LossKind kind = LossKind::Literal) {
    return categorical_cross_entropy(scores, one_hot_index(one_hot), kind);
}

/// d loss / d scores, written into grad (same length as scores).
template <typename T>
void categorical_cross_entropy_grad(std::span<const T> scores, std::size_t target, LossKind kind,
                                    std::span<T> grad);

/// Mean loss over a batch of scores [N, C] against one-hot targets [N, C].
template <typename T>
T mean_cross_entropy(const Tensor<T>& scores, const Tensor<T>& targets,
                     LossKind kind = LossKind::Literal);

}  // namespace mmcf
