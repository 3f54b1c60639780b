#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmcf/network.hpp"
#include "mmcf/rng.hpp"

namespace mmcf::test {

/// Fresh directory under the system temp dir, removed with everything in it.
class TempDir {
public:
    TempDir() {
        std::string pattern = (std::filesystem::temp_directory_path() / "mmcf_test_XXXXXX").string();
        if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Every regular file under `root`, relative paths, sorted.
inline std::vector<std::filesystem::path> list_files(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out.push_back(std::filesystem::relative(e.path(), root));
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <typename T>
Tensor<T> random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<T> t(shape);
    for (T& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

/// One-hot rows [n, classes] with random targets.
inline Tensor<double> random_targets(std::size_t n, std::size_t classes, Rng& rng) {
    Tensor<double> t({n, classes});
    for (std::size_t i = 0; i < n; ++i) t[i * classes + rng.below(classes)] = 1.0;
    return t;
}

struct GradCheck {
    double max_rel_error = 0;
    std::size_t checked = 0;
    std::size_t retried = 0;  // entries re-measured with other step sizes
};

/// Central differences of the batch loss against the analytic gradients, over
/// at most `per_tensor` randomly chosen entries of every parameter tensor.
/// Relative error is |a - n| / max(|a|, |n|, floor). An entry whose error
/// exceeds `retry_above` is measured again with steps 10h, h/10 and h/100 and keeps
/// the smallest error: a step that crosses a relu kink or flips a pooling
/// argmax gives a meaningless difference quotient.
inline GradCheck check_gradients(Network<double> net, std::span<const Tensor<double>> inputs,
                                 const Tensor<double>& targets, LossKind loss, Rng& rng,
                                 std::size_t per_tensor, double h = 1e-6, double floor = 1e-6,
                                 double retry_above = 1e-4) {
    const auto acts = net.forward(inputs);
    const auto analytic = net.backward(acts, targets, loss);
    auto loss_at = [&](const Network<double>& n) { return n.backward(n.forward(inputs), targets, loss).loss; };

    GradCheck out;
    for (std::size_t p = 0; p < net.parameters().size(); ++p) {
        const std::size_t size = net.parameters()[p].size();
        std::vector<std::size_t> picks(size);
        for (std::size_t i = 0; i < size; ++i) picks[i] = i;
        if (size > per_tensor) {
            rng.shuffle(std::span<std::size_t>(picks));
            picks.resize(per_tensor);
        }
        for (std::size_t i : picks) {
            double& w = net.parameters()[p][i];
            const double saved = w;
            const double a = analytic.gradients[p][i];
            auto error_at = [&](double step) {
                w = saved + step;
                const double up = loss_at(net);
                w = saved - step;
                const double down = loss_at(net);
                w = saved;
                const double numeric = (up - down) / (2 * step);
                return std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            };
            double err = error_at(h);
            if (err > retry_above) {
                err = std::min({err, error_at(10 * h), error_at(h / 10), error_at(h / 100)});
                ++out.retried;
            }
            out.max_rel_error = std::max(out.max_rel_error, err);
            ++out.checked;
        }
    }
    return out;
}

}  // namespace mmcf::test
