#include "mmcf/network.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mmcf/rng.hpp"

namespace mmcf {

namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapR = Eigen::Map<MatR<T>>;
template <typename T>
using CMapR = Eigen::Map<const MatR<T>>;

struct ConvGeometry {
    std::size_t n, c, h, w, kh, kw, stride, pad, oh, ow;
    std::size_t k() const { return c * kh * kw; }
    std::size_t p() const { return oh * ow; }
};

ConvGeometry conv_geometry(const LayerSpec& layer, const Shape& in) {
    ConvGeometry g{};
    g.n = in[0];
    g.c = in[1];
    g.h = in[2];
    g.w = in[3];
    g.kh = layer.kernel_h;
    g.kw = layer.kernel_w;
    g.stride = layer.stride;
    g.pad = layer.padding;
    g.oh = (g.h + 2 * g.pad - g.kh) / g.stride + 1;
    g.ow = (g.w + 2 * g.pad - g.kw) / g.stride + 1;
    return g;
}

// Output columns [lo, hi) of a row whose input index ow * stride + kj - pad
// falls inside [0, w).
struct ValidRange {
    std::size_t lo, hi;
};

inline ValidRange valid_range(std::size_t kj, const ConvGeometry& g) {
    std::size_t lo = 0;
    while (lo < g.ow && lo * g.stride + kj < g.pad) ++lo;
    std::size_t hi = lo;
    while (hi < g.ow && hi * g.stride + kj < g.pad + g.w) ++hi;
    return {lo, hi};
}

// One sample: col is [K, P] with column oh * OW + ow.
template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
    for (std::size_t c = 0; c < g.c; ++c) {
        const T* plane = x + c * g.h * g.w;
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                T* row = col + ((c * g.kh + ki) * g.kw + kj) * g.p();
                const ValidRange r = valid_range(kj, g);
                for (std::size_t oh = 0; oh < g.oh; ++oh) {
                    T* dst = row + oh * g.ow;
                    const std::ptrdiff_t ih =
                        static_cast<std::ptrdiff_t>(oh * g.stride + ki) - static_cast<std::ptrdiff_t>(g.pad);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.h)) {
                        std::fill_n(dst, g.ow, T(0));
                        continue;
                    }
                    std::fill_n(dst, r.lo, T(0));
                    const T* src = plane + static_cast<std::size_t>(ih) * g.w + kj - g.pad;
                    if (g.stride == 1) {
                        std::copy(src + r.lo, src + r.hi, dst + r.lo);
                    } else {
                        for (std::size_t ow = r.lo; ow < r.hi; ++ow) dst[ow] = src[ow * g.stride];
                    }
                    std::fill(dst + r.hi, dst + g.ow, T(0));
                }
            }
        }
    }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* dx) {
    for (std::size_t c = 0; c < g.c; ++c) {
        T* plane = dx + c * g.h * g.w;
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                const T* row = col + ((c * g.kh + ki) * g.kw + kj) * g.p();
                const ValidRange r = valid_range(kj, g);
                for (std::size_t oh = 0; oh < g.oh; ++oh) {
                    const std::ptrdiff_t ih =
                        static_cast<std::ptrdiff_t>(oh * g.stride + ki) - static_cast<std::ptrdiff_t>(g.pad);
                    if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.h)) continue;
                    const T* src = row + oh * g.ow;
                    T* dst = plane + static_cast<std::size_t>(ih) * g.w + kj - g.pad;
                    for (std::size_t ow = r.lo; ow < r.hi; ++ow) dst[ow * g.stride] += src[ow];
                }
            }
        }
    }
}

template <typename T>
Tensor<T> dense_forward(const LayerSpec& layer, const Tensor<T>& w, const Tensor<T>& b, const Tensor<T>& x) {
    const std::size_t n = x.dim(0);
    Tensor<T> y({n, layer.out_width});
    MapR<T> ym(y.data(), n, layer.out_width);
    ym.noalias() = CMapR<T>(x.data(), n, layer.in_width) *
                   CMapR<T>(w.data(), layer.out_width, layer.in_width).transpose();
    ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b.data(), layer.out_width);
    return y;
}

template <typename T>
Tensor<T> conv_forward(const LayerSpec& layer, const Tensor<T>& w, const Tensor<T>& b, const Tensor<T>& x) {
    const ConvGeometry g = conv_geometry(layer, x.shape());
    const std::size_t co = layer.out_channels;
    Tensor<T> y({g.n, co, g.oh, g.ow});
    AlignedVector<T> col(g.k() * g.p());
    CMapR<T> wm(w.data(), co, g.k());
    const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(b.data(), co);
    for (std::size_t n = 0; n < g.n; ++n) {
        im2col(x.data() + n * g.c * g.h * g.w, g, col.data());
        MapR<T> ym(y.data() + n * co * g.p(), co, g.p());
        ym.noalias() = wm * CMapR<T>(col.data(), g.k(), g.p());
        ym.colwise() += bias;
    }
    return y;
}

template <typename T>
Tensor<T> maxpool_forward(const LayerSpec& layer, const Tensor<T>& x) {
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = (h - layer.window) / layer.stride + 1;
    const std::size_t ow = (w - layer.window) / layer.stride + 1;
    Tensor<T> y({n, c, oh, ow});
    if (layer.window == 2 && layer.stride == 2) {
        for (std::size_t plane = 0; plane < n * c; ++plane) {
            const T* src = x.data() + plane * h * w;
            T* dst = y.data() + plane * oh * ow;
            for (std::size_t i = 0; i < oh; ++i) {
                const T* r0 = src + 2 * i * w;
                const T* r1 = r0 + w;
                for (std::size_t j = 0; j < ow; ++j) {
                    dst[i * ow + j] = std::max(std::max(r0[2 * j], r0[2 * j + 1]), std::max(r1[2 * j], r1[2 * j + 1]));
                }
            }
        }
        return y;
    }
    for (std::size_t plane = 0; plane < n * c; ++plane) {
        const T* src = x.data() + plane * h * w;
        T* dst = y.data() + plane * oh * ow;
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                T best = src[(i * layer.stride) * w + j * layer.stride];
                for (std::size_t a = 0; a < layer.window; ++a) {
                    for (std::size_t bcol = 0; bcol < layer.window; ++bcol) {
                        best = std::max(best, src[(i * layer.stride + a) * w + j * layer.stride + bcol]);
                    }
                }
                dst[i * ow + j] = best;
            }
        }
    }
    return y;
}

template <typename T>
T sigmoid(T x) {
    const T y = T(1) / (T(1) + std::exp(-x));
    // keep the output strictly inside (0, 1) even where the exponential saturates
    return std::clamp(y, std::numeric_limits<T>::min(), T(1) - std::numeric_limits<T>::epsilon() / 2);
}

template <typename T>
Tensor<T> flatten_batch(const Tensor<T>& x) {
    Tensor<T> y = x;
    y.reshape({x.dim(0), x.size() / x.dim(0)});
    return y;
}

struct InputSource {
    bool from_input;
    std::size_t index;  // branch index when from_input, else global layer index
};

std::vector<std::vector<InputSource>> input_sources(const NetworkSpec& spec) {
    std::vector<std::vector<InputSource>> out;
    std::size_t g = 0;
    std::vector<InputSource> branch_last;
    for (std::size_t b = 0; b < spec.branches.size(); ++b) {
        InputSource cur{true, b};
        for (std::size_t i = 0; i < spec.branches[b].size(); ++i) {
            out.push_back({cur});
            cur = {false, g};
            ++g;
        }
        branch_last.push_back(cur);
    }
    InputSource cur = branch_last[0];
    for (const auto& layer : spec.trunk) {
        if (layer.kind == LayerKind::Concat) {
            out.push_back(branch_last);
        } else {
            out.push_back({cur});
        }
        cur = {false, g};
        ++g;
    }
    return out;
}

template <typename T>
Tensor<T> forward_impl(const LayerSpec& layer, const Tensor<T>* w, const Tensor<T>* b, const Tensor<T>& x,
                       const Tensor<T>* x2) {
    switch (layer.kind) {
        case LayerKind::Dense: return dense_forward(layer, *w, *b, x);
        case LayerKind::Conv2d: return conv_forward(layer, *w, *b, x);
        case LayerKind::MaxPool2d: return maxpool_forward(layer, x);
        case LayerKind::Relu: {
            Tensor<T> y = x;
            for (T& v : y.values()) v = std::max(v, T(0));
            return y;
        }
        case LayerKind::Sigmoid: {
            Tensor<T> y = x;
            for (T& v : y.values()) v = sigmoid(v);
            return y;
        }
        case LayerKind::Flatten: return flatten_batch(x);
        case LayerKind::Concat: {
            const Tensor<T>& a = x;
            const Tensor<T>& bb = *x2;
            const std::size_t n = a.dim(0), wa = a.size() / n, wb = bb.size() / n;
            Tensor<T> y({n, wa + wb});
            for (std::size_t i = 0; i < n; ++i) {
                std::copy_n(a.data() + i * wa, wa, y.data() + i * (wa + wb));
                std::copy_n(bb.data() + i * wb, wb, y.data() + i * (wa + wb) + wa);
            }
            return y;
        }
    }
    throw std::logic_error("unhandled layer kind");
}

}  // namespace

template <typename T>
Tensor<T> forward_layer(const LayerSpec& layer, std::span<const Tensor<T>> params,
                        std::span<const Tensor<T>> inputs) {
    if (inputs.empty() || (layer.kind == LayerKind::Concat && inputs.size() != 2)) {
        throw std::invalid_argument(to_string(layer.kind) + ": wrong number of inputs");
    }
    if (layer.parameterized() && params.size() != 2) {
        throw std::invalid_argument(to_string(layer.kind) + ": expects weight and bias");
    }
    const Tensor<T>* w = layer.parameterized() ? &params[0] : nullptr;
    const Tensor<T>* b = layer.parameterized() ? &params[1] : nullptr;
    return forward_impl(layer, w, b, inputs[0], inputs.size() > 1 ? &inputs[1] : nullptr);
}

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
    layer_shapes_ = infer_shapes(spec_);
    for (std::size_t i = 0; i < spec_.layer_count(); ++i) {
        const auto& layer = spec_.layer(i);
        if (layer.parameterized()) {
            param_index_.push_back(static_cast<int>(params_.size()));
            for (auto& shape : layer.parameter_shapes()) params_.emplace_back(std::move(shape));
        } else {
            param_index_.push_back(-1);
        }
    }
}

template <typename T>
Network<T> Network<T>::initialized(NetworkSpec spec, std::uint64_t seed) {
    Network net(std::move(spec));
    Rng rng(seed);
    for (std::size_t i = 0; i < net.spec_.layer_count(); ++i) {
        const auto& layer = net.spec_.layer(i);
        if (!layer.parameterized()) continue;
        double fan_in = 0, fan_out = 0;
        if (layer.kind == LayerKind::Dense) {
            fan_in = static_cast<double>(layer.in_width);
            fan_out = static_cast<double>(layer.out_width);
        } else {
            const double area = static_cast<double>(layer.kernel_h * layer.kernel_w);
            fan_in = static_cast<double>(layer.in_channels) * area;
            fan_out = static_cast<double>(layer.out_channels) * area;
        }
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Tensor<T>& w = net.params_[static_cast<std::size_t>(net.param_index_[i])];
        for (T& v : w.values()) v = static_cast<T>(rng.uniform(-bound, bound));
    }
    return net;
}

template <typename T>
void Network<T>::set_parameters(std::vector<Tensor<T>> params) {
    if (params.size() != params_.size()) {
        throw std::invalid_argument("expected " + std::to_string(params_.size()) +
                                    " parameter tensors, got " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != params_[i].shape()) {
            throw std::invalid_argument("parameter " + std::to_string(i) + " has shape " +
                                        shape_to_string(params[i].shape()) + ", expected " +
                                        shape_to_string(params_[i].shape()));
        }
    }
    params_ = std::move(params);
}

template <typename T>
Activations<T> Network<T>::forward(std::span<const Tensor<T>> inputs) const {
    if (inputs.size() != spec_.input_shapes.size()) {
        throw ShapeError(0, "network takes " + std::to_string(spec_.input_shapes.size()) +
                                " inputs, got " + std::to_string(inputs.size()));
    }
    Activations<T> acts;
    std::size_t first_layer = 0;
    std::size_t batch = 0;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const Shape& want = spec_.input_shapes[b];
        Tensor<T> x = inputs[b];
        if (x.shape() == want) {
            Shape batched{1};
            batched.insert(batched.end(), want.begin(), want.end());
            x.reshape(std::move(batched));
        }
        const bool ok = x.rank() == want.size() + 1 && x.dim(0) > 0 &&
                        std::equal(want.begin(), want.end(), x.shape().begin() + 1);
        if (!ok) {
            throw ShapeError(first_layer, "input " + std::to_string(b) + " has shape " +
                                              shape_to_string(inputs[b].shape()) + ", expected [N]" +
                                              shape_to_string(want));
        }
        if (b > 0 && x.dim(0) != batch) {
            throw ShapeError(first_layer, "branch inputs disagree on batch size");
        }
        batch = x.dim(0);
        acts.inputs.push_back(std::move(x));
        first_layer += spec_.branches[b].size();
    }

    const auto sources = input_sources(spec_);
    acts.outputs.reserve(spec_.layer_count());
    for (std::size_t i = 0; i < spec_.layer_count(); ++i) {
        auto input_of = [&](const InputSource& s) -> const Tensor<T>& {
            return s.from_input ? acts.inputs[s.index] : acts.outputs[s.index];
        };
        const Tensor<T>* w = nullptr;
        const Tensor<T>* b = nullptr;
        if (param_index_[i] >= 0) {
            w = &params_[static_cast<std::size_t>(param_index_[i])];
            b = w + 1;
        }
        const Tensor<T>* x2 = sources[i].size() > 1 ? &input_of(sources[i][1]) : nullptr;
        acts.outputs.push_back(forward_impl(spec_.layer(i), w, b, input_of(sources[i][0]), x2));
    }
    return acts;
}

template <typename T>
BackwardResult<T> Network<T>::backward(const Activations<T>& acts, const Tensor<T>& targets,
                                       LossKind loss) const {
    const std::size_t count = spec_.layer_count();
    if (acts.outputs.size() != count) {
        throw std::invalid_argument("activations were not produced by this network");
    }
    const Tensor<T>& out = acts.output();
    const std::size_t n = out.dim(0);
    const std::size_t classes = spec_.output_width;
    if (targets.shape() != Shape{n, classes}) {
        throw std::invalid_argument("targets must be [" + std::to_string(n) + "," +
                                    std::to_string(classes) + "], got " +
                                    shape_to_string(targets.shape()));
    }

    BackwardResult<T> result;
    for (const auto& p : params_) result.gradients.emplace_back(p.shape());

    std::vector<Tensor<T>> grad(count);
    grad[count - 1] = Tensor<T>(out.shape());
    T total = 0;
    const T inv_n = T(1) / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const T> scores(out.data() + i * classes, classes);
        const std::size_t target = one_hot_index(std::span<const T>(targets.data() + i * classes, classes));
        total += categorical_cross_entropy(scores, target, loss);
        std::span<T> g(grad[count - 1].data() + i * classes, classes);
        categorical_cross_entropy_grad(scores, target, loss, g);
        for (T& v : g) v *= inv_n;
    }
    result.loss = total * inv_n;

    const auto sources = input_sources(spec_);
    auto input_of = [&](const InputSource& s) -> const Tensor<T>& {
        return s.from_input ? acts.inputs[s.index] : acts.outputs[s.index];
    };
    auto accumulate = [&](const InputSource& s, Tensor<T>&& dx) {
        if (s.from_input) return;
        Tensor<T>& dst = grad[s.index];
        if (dst.empty()) {
            dst = std::move(dx);
        } else {
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += dx[k];
        }
    };

    for (std::size_t ii = count; ii-- > 0;) {
        const LayerSpec& layer = spec_.layer(ii);
        const auto& src = sources[ii];
        const Tensor<T>& dy = grad[ii];
        if (dy.empty()) continue;  // nothing downstream depends on this layer
        const bool need_dx = std::any_of(src.begin(), src.end(), [](const InputSource& s) { return !s.from_input; });
        const Tensor<T>& x = input_of(src[0]);

        switch (layer.kind) {
            case LayerKind::Dense: {
                const Tensor<T>& w = params_[static_cast<std::size_t>(param_index_[ii])];
                Tensor<T>& dw = result.gradients[static_cast<std::size_t>(param_index_[ii])];
                Tensor<T>& db = result.gradients[static_cast<std::size_t>(param_index_[ii]) + 1];
                CMapR<T> dym(dy.data(), n, layer.out_width);
                CMapR<T> xm(x.data(), n, layer.in_width);
                MapR<T>(dw.data(), layer.out_width, layer.in_width).noalias() = dym.transpose() * xm;
                Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(db.data(), layer.out_width) = dym.colwise().sum();
                if (need_dx) {
                    Tensor<T> dx({n, layer.in_width});
                    MapR<T>(dx.data(), n, layer.in_width).noalias() =
                        dym * CMapR<T>(w.data(), layer.out_width, layer.in_width);
                    accumulate(src[0], std::move(dx));
                }
                break;
            }
            case LayerKind::Conv2d: {
                const Tensor<T>& w = params_[static_cast<std::size_t>(param_index_[ii])];
                Tensor<T>& dw = result.gradients[static_cast<std::size_t>(param_index_[ii])];
                Tensor<T>& db = result.gradients[static_cast<std::size_t>(param_index_[ii]) + 1];
                const ConvGeometry g = conv_geometry(layer, x.shape());
                const std::size_t co = layer.out_channels;
                MapR<T> dwm(dw.data(), co, g.k());
                Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dbm(db.data(), co);
                dwm.setZero();
                dbm.setZero();
                CMapR<T> wm(w.data(), co, g.k());
                AlignedVector<T> col(g.k() * g.p());
                Tensor<T> dx;
                if (need_dx) dx = Tensor<T>(x.shape());
                for (std::size_t s = 0; s < g.n; ++s) {
                    CMapR<T> dym(dy.data() + s * co * g.p(), co, g.p());
                    im2col(x.data() + s * g.c * g.h * g.w, g, col.data());
                    dwm.noalias() += dym * CMapR<T>(col.data(), g.k(), g.p()).transpose();
                    dbm += dym.rowwise().sum();
                    if (need_dx) {
                        MapR<T>(col.data(), g.k(), g.p()).noalias() = wm.transpose() * dym;
                        col2im(col.data(), g, dx.data() + s * g.c * g.h * g.w);
                    }
                }
                if (need_dx) accumulate(src[0], std::move(dx));
                break;
            }
            case LayerKind::MaxPool2d: {
                if (!need_dx) break;
                const std::size_t h = x.dim(2), w = x.dim(3);
                const std::size_t oh = dy.dim(2), ow = dy.dim(3);
                Tensor<T> dx(x.shape());
                for (std::size_t plane = 0; plane < x.dim(0) * x.dim(1); ++plane) {
                    const T* in = x.data() + plane * h * w;
                    const T* g = dy.data() + plane * oh * ow;
                    T* d = dx.data() + plane * h * w;
                    for (std::size_t i = 0; i < oh; ++i) {
                        for (std::size_t j = 0; j < ow; ++j) {
                            std::size_t best = (i * layer.stride) * w + j * layer.stride;
                            for (std::size_t a = 0; a < layer.window; ++a) {
                                for (std::size_t b = 0; b < layer.window; ++b) {
                                    const std::size_t idx = (i * layer.stride + a) * w + j * layer.stride + b;
                                    if (in[idx] > in[best]) best = idx;
                                }
                            }
                            d[best] += g[i * ow + j];
                        }
                    }
                }
                accumulate(src[0], std::move(dx));
                break;
            }
            case LayerKind::Relu: {
                if (!need_dx) break;
                Tensor<T> dx = dy;
                for (std::size_t k = 0; k < dx.size(); ++k) {
                    if (!(x[k] > T(0))) dx[k] = T(0);
                }
                accumulate(src[0], std::move(dx));
                break;
            }
            case LayerKind::Sigmoid: {
                if (!need_dx) break;
                const Tensor<T>& y = acts.outputs[ii];
                Tensor<T> dx = dy;
                for (std::size_t k = 0; k < dx.size(); ++k) dx[k] *= y[k] * (T(1) - y[k]);
                accumulate(src[0], std::move(dx));
                break;
            }
            case LayerKind::Flatten: {
                if (!need_dx) break;
                Tensor<T> dx = dy;
                dx.reshape(x.shape());
                accumulate(src[0], std::move(dx));
                break;
            }
            case LayerKind::Concat: {
                const Tensor<T>& a = input_of(src[0]);
                const Tensor<T>& b = input_of(src[1]);
                const std::size_t wa = a.size() / n, wb = b.size() / n;
                Tensor<T> da(a.shape()), dbt(b.shape());
                for (std::size_t s = 0; s < n; ++s) {
                    std::copy_n(dy.data() + s * (wa + wb), wa, da.data() + s * wa);
                    std::copy_n(dy.data() + s * (wa + wb) + wa, wb, dbt.data() + s * wb);
                }
                accumulate(src[0], std::move(da));
                accumulate(src[1], std::move(dbt));
                break;
            }
        }
    }
    return result;
}

template class Network<float>;
template class Network<double>;
template Tensor<float> forward_layer<float>(const LayerSpec&, std::span<const Tensor<float>>,
                                            std::span<const Tensor<float>>);
template Tensor<double> forward_layer<double>(const LayerSpec&, std::span<const Tensor<double>>,
                                              std::span<const Tensor<double>>);

}  // namespace mmcf
