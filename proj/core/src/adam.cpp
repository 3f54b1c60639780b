#include "mmcf/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mmcf {

void TrainConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(beta1 > 0 && beta1 < 1)) throw std::invalid_argument("beta1 must lie in (0, 1)");
    if (!(beta2 > 0 && beta2 < 1)) throw std::invalid_argument("beta2 must lie in (0, 1)");
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
}

template <typename T>
AdamState<T> AdamState<T>::zeros_like(const std::vector<Tensor<T>>& params) {
    AdamState state;
    for (const auto& p : params) {
        state.m.emplace_back(p.shape());
        state.v.emplace_back(p.shape());
    }
    return state;
}

template <typename T>
void adam_step(std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads,
               AdamState<T>& state, const TrainConfig& cfg) {
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: parameter, gradient and state counts differ");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].shape() != params[i].shape() || state.m[i].shape() != params[i].shape() ||
            state.v[i].shape() != params[i].shape()) {
            throw std::invalid_argument("adam_step: shape mismatch at parameter " + std::to_string(i));
        }
        if (!grads[i].all_finite()) {
            throw std::runtime_error("adam_step: non-finite gradient in parameter " + std::to_string(i) +
                                     " at step " + std::to_string(state.t + 1));
        }
    }

    state.t += 1;
    const double t = static_cast<double>(state.t);
    const T b1 = static_cast<T>(cfg.beta1);
    const T b2 = static_cast<T>(cfg.beta2);
    const T correction1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
    const T correction2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));
    const T lr = static_cast<T>(cfg.learning_rate);
    const T eps = static_cast<T>(cfg.epsilon);

    for (std::size_t i = 0; i < params.size(); ++i) {
        T* p = params[i].data();
        T* m = state.m[i].data();
        T* v = state.v[i].data();
        const T* g = grads[i].data();
        const std::size_t n = params[i].size();
        for (std::size_t k = 0; k < n; ++k) {
            m[k] = b1 * m[k] + (T(1) - b1) * g[k];
            v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
            const T m_hat = m[k] / correction1;
            const T v_hat = v[k] / correction2;
            p[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(std::vector<Tensor<float>>&, const std::vector<Tensor<float>>&,
                               AdamState<float>&, const TrainConfig&);
template void adam_step<double>(std::vector<Tensor<double>>&, const std::vector<Tensor<double>>&,
                                AdamState<double>&, const TrainConfig&);

}  // namespace mmcf
