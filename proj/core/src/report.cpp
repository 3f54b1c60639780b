#include "mmcf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mmcf/csv.hpp"
#include "mmcf/image.hpp"

namespace mmcf {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, std::size_t width) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != width) {
            throw std::runtime_error(path.string() + ": expected " + std::to_string(width) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        if (header) {
            header = false;
            continue;
        }
        rows.emplace_back(fields.begin(), fields.end());
    }
    return rows;
}

std::string confusion_stem(Method m, std::size_t run) {
    return "confusion_" + std::string(method_slug(m)) + "_run" + std::to_string(run + 1);
}

}  // namespace

std::string format_percent(double fraction) {
    if (std::isnan(fraction)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
    return buf;
}

std::vector<std::uint8_t> confusion_heatmap(const ConfusionMatrix& m, int cell, int& width, int& height) {
    if (cell < 1) throw std::invalid_argument("heatmap cell size must be positive");
    const int cols = static_cast<int>(kClassCount + 1);
    const int rows = static_cast<int>(kClassCount);
    width = cols * cell;
    height = rows * cell;
    std::uint64_t peak = 0;
    for (const auto& row : m.counts) peak = std::max(peak, *std::max_element(row.begin(), row.end()));
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto count = m.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            const auto v = peak == 0 ? 0
                                     : static_cast<std::uint8_t>((count * 255 + peak / 2) / peak);
            for (int y = r * cell; y < (r + 1) * cell; ++y) {
                std::fill_n(px.begin() + static_cast<std::ptrdiff_t>(y) * width + c * cell, cell, v);
            }
        }
    }
    return px;
}

void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& path) {
    auto f = open_out(path);
    f << "true";
    for (auto c : kAllClasses) f << ',' << to_string(c);
    f << ",Undecided\n";
    for (std::size_t r = 0; r < kClassCount; ++r) {
        f << to_string(class_from_index(r));
        for (auto v : m.counts[r]) f << ',' << v;
        f << '\n';
    }
    finish(f, path);
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path) {
    const auto rows = read_rows(path, kClassCount + 2);
    if (rows.size() != kClassCount) throw std::runtime_error(path.string() + ": expected 7 rows");
    ConfusionMatrix m;
    for (const auto& row : rows) {
        const std::size_t r = index_of(class_from_string(row[0]));
        for (std::size_t c = 0; c <= kClassCount; ++c) {
            const long long v = parse_int(row[c + 1]);
            if (v < 0) throw std::runtime_error(path.string() + ": negative count");
            m.counts[r][c] = static_cast<std::uint64_t>(v);
        }
    }
    return m;
}

std::vector<Table1Row> table1_rows(const ExperimentResult& result) {
    std::vector<Table1Row> out;
    for (const auto& rep : result.methods) {
        Table1Row row;
        row.method = std::string(method_name(rep.method));
        row.runs = rep.accuracies.size();
        if (row.runs > 0) {
            row.mean_pct = format_percent(rep.summary.mean);
            row.std_pct = format_percent(rep.summary.std);
            if (rep.summary.single_run) row.note = "single run; std undefined";
        } else {
            row.note = "no successful runs";
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<Table1Row> read_table1(const std::filesystem::path& path) {
    std::vector<Table1Row> out;
    for (const auto& r : read_rows(path, 5)) {
        out.push_back({r[0], r[1], r[2], static_cast<std::size_t>(parse_int(r[3])), r[4]});
    }
    return out;
}

std::vector<PerClassRow> per_class_rows(const ExperimentResult& result) {
    std::vector<PerClassRow> out;
    for (const auto& rep : result.methods) {
        PerClassRow row;
        row.method = std::string(method_name(rep.method));
        for (std::size_t c = 0; c < kClassCount; ++c) row.pct[c] = format_percent(rep.per_class[c]);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<PerClassRow> read_per_class(const std::filesystem::path& path) {
    std::vector<PerClassRow> out;
    for (const auto& r : read_rows(path, kClassCount + 1)) {
        PerClassRow row;
        row.method = r[0];
        for (std::size_t c = 0; c < kClassCount; ++c) row.pct[c] = r[c + 1];
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<RunRow> run_rows(const ExperimentResult& result) {
    std::vector<RunRow> out;
    for (const auto& rep : result.methods) {
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            out.push_back({std::string(method_slug(rep.method)), rep.runs[i] + 1, rep.accuracies[i],
                           rep.confusion[i].correct(), rep.confusion[i].total()});
        }
    }
    return out;
}

std::vector<RunRow> read_runs(const std::filesystem::path& path) {
    std::vector<RunRow> out;
    for (const auto& r : read_rows(path, 5)) {
        out.push_back({r[0], static_cast<std::size_t>(parse_int(r[1])), parse_double(r[2]),
                       static_cast<std::uint64_t>(parse_int(r[3])), static_cast<std::uint64_t>(parse_int(r[4]))});
    }
    return out;
}

void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        const auto path = out_dir / "table1.csv";
        auto f = open_out(path);
        f << "method,mean_accuracy_pct,sample_std_pct,runs,note\n";
        for (const auto& r : table1_rows(result)) {
            f << r.method << ',' << r.mean_pct << ',' << r.std_pct << ',' << r.runs << ',' << r.note << '\n';
        }
        finish(f, path);
    }
    {
        const auto path = out_dir / "per_class.csv";
        auto f = open_out(path);
        f << "method";
        for (auto c : kAllClasses) f << ',' << to_string(c);
        f << '\n';
        for (const auto& r : per_class_rows(result)) {
            f << r.method;
            for (const auto& v : r.pct) f << ',' << v;
            f << '\n';
        }
        finish(f, path);
    }
    {
        const auto path = out_dir / "runs.csv";
        auto f = open_out(path);
        f << "method,run,accuracy,correct,total\n";
        for (const auto& r : run_rows(result)) {
            f << r.method << ',' << r.run << ',' << format_number(r.accuracy) << ',' << r.correct << ',' << r.total
              << '\n';
        }
        finish(f, path);
    }
    for (const auto& rep : result.methods) {
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            const std::string stem = confusion_stem(rep.method, rep.runs[i]);
            write_confusion_csv(rep.confusion[i], out_dir / (stem + ".csv"));
            int w = 0;
            int h = 0;
            const auto px = confusion_heatmap(rep.confusion[i], kConfusionCell, w, h);
            write_pgm(px, w, h, out_dir / (stem + ".pgm"));
        }
    }
    const bool any_failed = std::any_of(result.runs.begin(), result.runs.end(), [](const auto& r) { return r.failed; });
    const auto failed_path = out_dir / "failed_runs.txt";
    if (any_failed) {
        auto f = open_out(failed_path);
        for (const auto& r : result.runs) {
            if (r.failed) f << "run " << r.run + 1 << ": " << r.error << '\n';
        }
        finish(f, failed_path);
    } else {
        std::filesystem::remove(failed_path);
    }
}

}  // namespace mmcf
