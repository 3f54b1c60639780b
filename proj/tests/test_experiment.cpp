#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mmcf/experiment.hpp"
#include "mmcf/report.hpp"
#include "support.hpp"

using namespace mmcf;

namespace {

ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.generator.episodes_per_class = 3;
    cfg.generator.image_size = 32;
    cfg.generator.seed = 3;
    cfg.image_size = 32;
    cfg.runs = 2;
    cfg.seed = 9;
    for (ModelKind k : kAllModelKinds) {
        TrainConfig t = default_train_config(k);
        t.epochs = 1;
        cfg.train[k] = t;
    }
    return cfg;
}

const SampleSet& quick_samples() {
    static const SampleSet set = [] {
        const auto cfg = quick_config();
        return make_sample_set(generate_synced_dataset(cfg.generator, cfg.sync).samples, cfg.image_size);
    }();
    return set;
}

const ExperimentResult& quick_result() {
    static const ExperimentResult r = run_experiment(quick_config(), quick_samples());
    return r;
}

}  // namespace

TEST(Methods, NamesAndSlugsRoundTrip) {
    std::set<std::string_view> slugs;
    for (Method m : kAllMethods) {
        EXPECT_EQ(method_from_string(method_slug(m)), m);
        EXPECT_EQ(method_from_string(method_name(m)), m);
        slugs.insert(method_slug(m));
    }
    EXPECT_EQ(slugs.size(), 7u);
    EXPECT_EQ(method_slug(Method::HardVoting), "hard_voting");
    EXPECT_THROW(method_from_string("bagging"), std::invalid_argument);
}

TEST(Seeds, DistinctPerRunAndKind) {
    const auto cfg = quick_config();
    std::set<std::uint64_t> seen;
    for (std::size_t r = 0; r < 10; ++r) {
        const auto s = run_seed(cfg, r);
        seen.insert(s);
        seen.insert(split_seed(s));
        for (ModelKind k : kAllModelKinds) seen.insert(model_seed(s, k));
    }
    EXPECT_EQ(seen.size(), 10u * 7);
}

TEST(ExperimentConfig, Validation) {
    auto cfg = quick_config();
    EXPECT_NO_THROW(cfg.validate());
    cfg.runs = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = quick_config();
    cfg.jobs = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = quick_config();
    cfg.stacking_holdout = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Experiment, EveryMethodEvaluatedOnTheSameEpisodes) {
    const auto& r = quick_result();
    ASSERT_EQ(r.runs.size(), 2u);
    ASSERT_EQ(r.methods.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(r.methods[i].method, kAllMethods[i]);
    for (const auto& run : r.runs) {
        ASSERT_FALSE(run.failed) << run.error;
        EXPECT_EQ(run.validation_episodes.size(), 7u);
        std::uint64_t total = 0;
        for (const auto& [m, ev] : run.evaluations) {
            if (total == 0) total = ev.matrix.total();
            EXPECT_EQ(ev.matrix.total(), total) << method_slug(m);
            EXPECT_GE(ev.accuracy, 0.0);
            EXPECT_LE(ev.accuracy, 1.0);
        }
    }
    EXPECT_NE(r.runs[0].validation_episodes, r.runs[1].validation_episodes);
    for (const auto& m : r.methods) {
        EXPECT_EQ(m.accuracies.size(), 2u);
        EXPECT_NEAR(m.summary.mean, (m.accuracies[0] + m.accuracies[1]) / 2, 1e-12);
    }
}

TEST(Experiment, ParallelRunsMatchSerialRuns) {
    auto cfg = quick_config();
    cfg.jobs = 2;
    const auto parallel = run_experiment(cfg, quick_samples());
    const auto& serial = quick_result();
    ASSERT_EQ(parallel.runs.size(), serial.runs.size());
    for (std::size_t i = 0; i < serial.runs.size(); ++i) {
        for (const auto& [m, ev] : serial.runs[i].evaluations) {
            EXPECT_EQ(parallel.runs[i].evaluations.at(m).matrix, ev.matrix) << method_slug(m);
        }
    }
    test::TempDir a, b;
    emit_report(serial, a.path());
    emit_report(parallel, b.path());
    const auto files = test::list_files(a.path());
    ASSERT_EQ(files, test::list_files(b.path()));
    for (const auto& f : files) EXPECT_EQ(test::slurp(a.path() / f), test::slurp(b.path() / f)) << f;
}

TEST(Experiment, FailedRunsAreExcluded) {
    RunResult ok;
    ok.run = 0;
    Evaluation ev;
    ev.matrix.add(ContainerClass::CanFull, ContainerClass::CanFull);
    ev.accuracy = 1.0;
    ok.evaluations[Method::Tactile] = ev;
    RunResult bad;
    bad.run = 1;
    bad.failed = true;
    bad.error = "boom";
    const auto reports = summarize({ok, bad}, {Method::Tactile});
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].runs, (std::vector<std::size_t>{0}));
    EXPECT_TRUE(reports[0].summary.single_run);
}

TEST(Report, FormatPercent) {
    EXPECT_EQ(format_percent(0.9064), "90.6");
    EXPECT_EQ(format_percent(1.0), "100.0");
    EXPECT_EQ(format_percent(0.0), "0.0");
    EXPECT_EQ(format_percent(std::nan("")), "");
}

TEST(Report, FilesRoundTrip) {
    const auto& r = quick_result();
    test::TempDir dir;
    emit_report(r, dir.path());
    EXPECT_EQ(read_table1(dir / "table1.csv"), table1_rows(r));
    EXPECT_EQ(read_per_class(dir / "per_class.csv"), per_class_rows(r));
    EXPECT_EQ(read_runs(dir / "runs.csv"), run_rows(r));
    EXPECT_EQ(run_rows(r).size(), 14u);
    for (Method m : kAllMethods) {
        for (int run : {1, 2}) {
            const std::string stem = "confusion_" + std::string(method_slug(m)) + "_run" + std::to_string(run);
            const auto back = read_confusion_csv(dir / (stem + ".csv"));
            EXPECT_EQ(back, r.runs[run - 1].evaluations.at(m).matrix);
            EXPECT_TRUE(std::filesystem::exists(dir / (stem + ".pgm")));
        }
    }
    EXPECT_FALSE(std::filesystem::exists(dir / "failed_runs.txt"));
}

TEST(Report, HeatmapPeaksAtTheLargestCell) {
    ConfusionMatrix m;
    for (int i = 0; i < 4; ++i) m.add(ContainerClass::BottleHalf, ContainerClass::BottleFull);
    m.add(ContainerClass::CanEmpty, std::nullopt);
    int w = 0, h = 0;
    const auto px = confusion_heatmap(m, 2, w, h);
    EXPECT_EQ(w, 2 * 8);
    EXPECT_EQ(h, 2 * 7);
    ASSERT_EQ(px.size(), std::size_t(w * h));
    EXPECT_EQ(px[std::size_t((1 * 2) * w + 2 * 2)], 255);
    EXPECT_EQ(*std::max_element(px.begin(), px.end()), 255);
    EXPECT_EQ(px[0], 0);
}
