#include "mmcf/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mmcf {

void ConfusionMatrix::add(ContainerClass truth, Vote predicted) {
    const std::size_t col = predicted ? index_of(*predicted) : kUndecidedColumn;
    ++counts[index_of(truth)][col];
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (std::size_t r = 0; r < kClassCount; ++r) n += row_sum(r);
    return n;
}

std::uint64_t ConfusionMatrix::correct() const {
    std::uint64_t n = 0;
    for (std::size_t r = 0; r < kClassCount; ++r) n += counts[r][r];
    return n;
}

std::uint64_t ConfusionMatrix::undecided() const {
    std::uint64_t n = 0;
    for (std::size_t r = 0; r < kClassCount; ++r) n += counts[r][kUndecidedColumn];
    return n;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t row) const {
    std::uint64_t n = 0;
    for (auto v : counts.at(row)) n += v;
    return n;
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    if (n == 0) throw std::domain_error("accuracy of an empty confusion matrix");
    return static_cast<double>(correct()) / static_cast<double>(n);
}

double ConfusionMatrix::class_accuracy(std::size_t row) const {
    const auto n = row_sum(row);
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(counts[row][row]) / static_cast<double>(n);
}

Evaluation evaluate(std::span<const Vote> predictions, std::span<const ContainerClass> truth) {
    if (predictions.size() != truth.size()) {
        throw std::invalid_argument("prediction and label lists differ in length");
    }
    return evaluate([&](std::size_t i) { return predictions[i]; }, truth);
}

Evaluation evaluate(const std::function<Vote(std::size_t)>& predictor, std::span<const ContainerClass> truth) {
    if (truth.empty()) throw std::invalid_argument("cannot evaluate on an empty validation set");
    Evaluation out;
    for (std::size_t i = 0; i < truth.size(); ++i) out.matrix.add(truth[i], predictor(i));
    out.accuracy = out.matrix.accuracy();
    return out;
}

Aggregate aggregate(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("cannot aggregate an empty list");
    Aggregate out;
    // Welford
    double mean = 0;
    double m2 = 0;
    std::size_t n = 0;
    for (double v : values) {
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    out.mean = mean;
    out.single_run = n == 1;
    out.std = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    return out;
}

}  // namespace mmcf
