#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmcf/experiment.hpp"

namespace mmcf {

/// Report directory contents:
///
///   table1.csv                  method,mean_accuracy_pct,sample_std_pct,runs,note
///   per_class.csv               method,<7 class columns> (mean per-class accuracy, %)
///   runs.csv                    method,run,accuracy,correct,total
///   confusion_<slug>_run<r>.csv true,<7 classes>,Undecided
///   confusion_<slug>_run<r>.pgm heatmap, kConfusionCell pixels per cell
///   failed_runs.txt             only when a run failed
///
/// Run numbers in file names and runs.csv are 1-based.
inline constexpr int kConfusionCell = 16;

/// Percentage with one decimal, e.g. 0.9064 -> "90.6".
std::string format_percent(double fraction);

/// Grayscale heatmap with counts mapped linearly so the largest count is 255.
std::vector<std::uint8_t> confusion_heatmap(const ConfusionMatrix& m, int cell, int& width, int& height);

void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& path);
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path);

/// Writes every report file. Output is a pure function of the result.
void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir);

struct Table1Row {
    std::string method;
    std::string mean_pct;
    std::string std_pct;
    std::size_t runs = 0;
    std::string note;

    bool operator==(const Table1Row&) const = default;
};
std::vector<Table1Row> table1_rows(const ExperimentResult& result);
std::vector<Table1Row> read_table1(const std::filesystem::path& path);

struct PerClassRow {
    std::string method;
    std::array<std::string, kClassCount> pct;

    bool operator==(const PerClassRow&) const = default;
};
std::vector<PerClassRow> per_class_rows(const ExperimentResult& result);
std::vector<PerClassRow> read_per_class(const std::filesystem::path& path);

struct RunRow {
    std::string method;
    std::size_t run = 0;  // 1-based
    double accuracy = 0;
    std::uint64_t correct = 0;
    std::uint64_t total = 0;

    bool operator==(const RunRow&) const = default;
};
std::vector<RunRow> run_rows(const ExperimentResult& result);
std::vector<RunRow> read_runs(const std::filesystem::path& path);

}  // namespace mmcf
