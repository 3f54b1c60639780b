#include "mmcf/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmcf {

const char* to_string(LossKind kind) {
    return kind == LossKind::Literal ? "literal" : "normalized";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "literal") return LossKind::Literal;
    if (name == "normalized") return LossKind::Normalized;
    throw std::invalid_argument("unknown loss kind '" + name + "' (literal|normalized)");
}

template <typename T>
std::size_t one_hot_index(std::span<const T> target) {
    std::size_t hot = target.size();
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (target[i] == T(1)) {
            if (hot != target.size()) throw std::invalid_argument("target is not one-hot");
            hot = i;
        } else if (target[i] != T(0)) {
            throw std::invalid_argument("target is not one-hot");
        }
    }
    if (hot == target.size()) throw std::invalid_argument("target is not one-hot");
    return hot;
}

namespace {

template <typename T>
T score_sum(std::span<const T> scores) {
    T sum = 0;
    for (T s : scores) sum += s;
    return sum;
}

}  // namespace

template <typename T>
T categorical_cross_entropy(std::span<const T> scores, std::size_t target, LossKind kind) {
    if (target >= scores.size()) throw std::invalid_argument("target index out of range");
    T p = scores[target];
    if (kind == LossKind::Normalized) p /= score_sum(scores);
    const T lo = static_cast<T>(kLossFloor);
    return -std::log(std::clamp(p, lo, T(1) - lo));
}

template <typename T>
void categorical_cross_entropy_grad(std::span<const T> scores, std::size_t target, LossKind kind,
                                    std::span<T> grad) {
    if (target >= scores.size()) throw std::invalid_argument("target index out of range");
    std::fill(grad.begin(), grad.end(), T(0));
    const T lo = static_cast<T>(kLossFloor);
    if (kind == LossKind::Literal) {
        const T p = scores[target];
        if (p > lo && p < T(1) - lo) grad[target] = -T(1) / p;
        return;
    }
    const T sum = score_sum(scores);
    const T p = scores[target] / sum;
    if (!(p > lo && p < T(1) - lo)) return;
    // -log(s_t) + log(sum s)
    for (std::size_t c = 0; c < scores.size(); ++c) grad[c] = T(1) / sum;
    grad[target] -= T(1) / scores[target];
}

template <typename T>
T mean_cross_entropy(const Tensor<T>& scores, const Tensor<T>& targets, LossKind kind) {
    if (scores.shape() != targets.shape() || scores.rank() != 2) {
        throw std::invalid_argument("scores and targets must both be [N, C]");
    }
    const std::size_t n = scores.dim(0);
    const std::size_t c = scores.dim(1);
    if (n == 0) throw std::invalid_argument("empty batch");
    T total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const T> s(scores.data() + i * c, c);
        std::span<const T> t(targets.data() + i * c, c);
        total += categorical_cross_entropy(s, t, kind);
    }
    return total / static_cast<T>(n);
}

#define MMCF_INSTANTIATE(T)                                                                       \
    template std::size_t one_hot_index<T>(std::span<const T>);                                    \
    template T categorical_cross_entropy<T>(std::span<const T>, std::size_t, LossKind);           \
    template void categorical_cross_entropy_grad<T>(std::span<const T>, std::size_t, LossKind,    \
                                                    std::span<T>);                                \
    template T mean_cross_entropy<T>(const Tensor<T>&, const Tensor<T>&, LossKind);

MMCF_INSTANTIATE(float)
MMCF_INSTANTIATE(double)
#undef MMCF_INSTANTIATE

}  // namespace mmcf
