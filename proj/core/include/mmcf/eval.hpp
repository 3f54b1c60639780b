#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "mmcf/fusion.hpp"

namespace mmcf {

/// Column index of the undecided sink.
inline constexpr std::size_t kUndecidedColumn = kClassCount;

/// Rows are true classes; columns are predicted classes plus the undecided
/// sink. Undecided never counts as correct.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kClassCount + 1>, kClassCount> counts{};

    void add(ContainerClass truth, Vote predicted);
    std::uint64_t at(std::size_t row, std::size_t col) const { return counts.at(row).at(col); }

    std::uint64_t total() const;
    std::uint64_t correct() const;
    std::uint64_t undecided() const;
    std::uint64_t row_sum(std::size_t row) const;

    /// trace / total; throws std::domain_error on an empty matrix.
    double accuracy() const;
    /// diagonal / row sum; NaN for an empty row.
    double class_accuracy(std::size_t row) const;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct Evaluation {
    ConfusionMatrix matrix;
    double accuracy = 0;
};

/// Throws std::invalid_argument when the validation set is empty or the
/// lists differ in length.
Evaluation evaluate(std::span<const Vote> predictions, std::span<const ContainerClass> truth);
/// Calls predictor(i) for every validation sample i.
Evaluation evaluate(const std::function<Vote(std::size_t)>& predictor, std::span<const ContainerClass> truth);

struct Aggregate {
    double mean = 0;
    double std = 0;           // sample standard deviation (n - 1)
    bool single_run = false;  // std is reported as 0 when only one value exists
};

/// Throws std::invalid_argument on an empty list.
Aggregate aggregate(std::span<const double> values);

}  // namespace mmcf
