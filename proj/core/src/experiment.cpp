#include "mmcf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "mmcf/dataset_io.hpp"
#include "mmcf/rng.hpp"

namespace mmcf {

namespace {

constexpr std::uint64_t kSplitStream = 0;
constexpr std::uint64_t kModelStreamBase = 1;
constexpr std::uint64_t kInnerSplitStream = 20;
constexpr std::uint64_t kInnerModelStreamBase = 30;
constexpr std::uint64_t kGeneratorStream = 0x6e6;

bool wants(const std::vector<Method>& methods, std::initializer_list<Method> any) {
    return std::any_of(any.begin(), any.end(), [&](Method m) {
        return std::find(methods.begin(), methods.end(), m) != methods.end();
    });
}

std::vector<ContainerClass> labels_at(const SampleSet& set, const std::vector<std::size_t>& idx) {
    std::vector<ContainerClass> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(set.labels[i]);
    return out;
}

Evaluation evaluate_scores(const std::vector<ClassScores>& scores, const std::vector<ContainerClass>& truth) {
    return evaluate([&](std::size_t i) -> Vote { return class_from_index(argmax(scores[i])); }, truth);
}

SampleSet make_set(const ExperimentConfig& cfg, const SyncedDataset& ds) {
    const bool images = wants(cfg.methods, {Method::Vision, Method::HardVoting, Method::SoftVoting,
                                            Method::MidFusion, Method::SensorFusion});
    return make_sample_set(ds.samples, cfg.image_size, images, cfg.crop_margin);
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Tactile: return "Tactile";
        case Method::Proprio: return "Proprioception";
        case Method::Vision: return "Vision";
        case Method::HardVoting: return "Hard Majority Voting";
        case Method::SoftVoting: return "Soft Majority Voting";
        case Method::MidFusion: return "Mid Fusion";
        case Method::SensorFusion: return "Sensor Fusion";
    }
    throw std::invalid_argument("unknown method");
}

std::string_view method_slug(Method m) {
    switch (m) {
        case Method::Tactile: return "tactile";
        case Method::Proprio: return "proprioception";
        case Method::Vision: return "vision";
        case Method::HardVoting: return "hard_voting";
        case Method::SoftVoting: return "soft_voting";
        case Method::MidFusion: return "mid_fusion";
        case Method::SensorFusion: return "sensor_fusion";
    }
    throw std::invalid_argument("unknown method");
}

Method method_from_string(std::string_view text) {
    for (Method m : kAllMethods) {
        if (text == method_slug(m) || text == method_name(m)) return m;
    }
    if (text == "proprio") return Method::Proprio;
    throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

SyncedDataset load_synced_dataset(const std::filesystem::path& root, const SyncConfig& sync, bool load_images) {
    const Manifest manifest = read_manifest(root);
    SyncedDataset out;
    for (const auto& entry : manifest.episodes) {
        const auto dir = root / entry.id;
        try {
            auto samples = synchronize(read_episode(dir, false), sync);
            if (load_images) {
                for (auto& s : samples) s.image = read_ppm(dir / s.frame_file);
            }
            for (auto& s : samples) out.samples.push_back(std::move(s));
        } catch (const DegenerateEpisode& e) {
            out.skipped.push_back(entry.id + ": " + e.what());
        }
    }
    return out;
}

SyncedDataset generate_synced_dataset(const GeneratorConfig& gen, const SyncConfig& sync) {
    sync.validate();
    SyncedDataset out;
    for_each_episode(gen, [&](std::size_t, Episode&& ep) {
        const std::string id = ep.id;
        try {
            for (auto& s : synchronize(std::move(ep), sync)) out.samples.push_back(std::move(s));
        } catch (const DegenerateEpisode& e) {
            out.skipped.push_back(id + ": " + e.what());
        }
    });
    return out;
}

TrainConfig ExperimentConfig::train_config(ModelKind kind) const {
    const auto it = train.find(kind);
    return it == train.end() ? default_train_config(kind) : it->second;
}

void ExperimentConfig::validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    if (methods.empty()) throw std::invalid_argument("no methods selected");
    if (!(crop_margin >= 0)) throw std::invalid_argument("crop margin must be non-negative");
    if (!(stacking_holdout >= 0 && stacking_holdout < 1)) {
        throw std::invalid_argument("stacking holdout must lie in [0, 1)");
    }
    sync.validate();
    generator.validate();
    for (ModelKind k : kAllModelKinds) {
        train_config(k).validate();
        if (k == ModelKind::VisionCNN || k == ModelKind::SensorFusionNet) (void)build(k, image_size);
    }
}

std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t run) { return derive_seed(cfg.seed, run); }
std::uint64_t split_seed(std::uint64_t run) { return derive_seed(run, kSplitStream); }
std::uint64_t model_seed(std::uint64_t run, ModelKind kind) {
    return derive_seed(run, kModelStreamBase + static_cast<std::uint64_t>(kind));
}

MidFusionStage train_mid_fusion(const ExperimentConfig& cfg, const SampleSet& data, const Split& sp,
                                std::uint64_t seed, const std::vector<TrainedModel>* full) {
    const double holdout = cfg.stacking_holdout;
    if (!(holdout >= 0 && holdout < 1)) throw std::invalid_argument("stacking holdout must lie in [0, 1)");

    // Rows the classifiers learn from and rows whose scores train the fusion net.
    std::vector<std::size_t> fit_rows = sp.train;
    std::vector<std::size_t> stack_rows = sp.train;
    if (holdout > 0) {
        std::vector<std::string> episodes;
        std::vector<ContainerClass> labels;
        for (auto i : sp.train) {
            episodes.push_back(data.episode[i]);
            labels.push_back(data.labels[i]);
        }
        const Split inner = split(episodes, labels, SplitSpec{1.0 - holdout, derive_seed(seed, kInnerSplitStream)});
        fit_rows.clear();
        stack_rows.clear();
        for (auto i : inner.train) fit_rows.push_back(sp.train[i]);
        for (auto i : inner.validation) stack_rows.push_back(sp.train[i]);
    }

    MidFusionStage stage;
    const bool reuse = holdout == 0 && full && full->size() == kStackedKinds.size();
    std::vector<ClassScores> train_scores[3];
    std::vector<ClassScores> val_scores[3];
    for (std::size_t k = 0; k < kStackedKinds.size(); ++k) {
        const ModelKind kind = kStackedKinds[k];
        const ModelData md = model_data(kind, data);
        if (reuse) {
            stage.classifiers.push_back((*full)[k]);
        } else {
            TrainConfig tc = cfg.train_config(kind);
            tc.seed = holdout > 0 ? derive_seed(seed, kInnerModelStreamBase + static_cast<std::uint64_t>(kind))
                                  : model_seed(seed, kind);
            stage.classifiers.push_back(train(kind, cfg.image_size, md, fit_rows, {}, tc));
        }
        train_scores[k] = predict(stage.classifiers.back(), md, stack_rows);
        val_scores[k] = predict(stage.classifiers.back(), md, sp.validation);
        if (stage.classifiers.back().config.loss == LossKind::Normalized) {
            // Only the ratios of these scores are trained; their overall scale drifts.
            for (auto* scores : {&train_scores[k], &val_scores[k]}) {
                for (auto& s : *scores) s = renormalize(s);
            }
        }
    }

    // Fusion rows: stacking rows first, then validation rows.
    std::vector<ContainerClass> labels = labels_at(data, stack_rows);
    const auto val_labels = labels_at(data, sp.validation);
    labels.insert(labels.end(), val_labels.begin(), val_labels.end());
    std::vector<ClassScores> v, t, p;
    for (std::size_t k = 0; k < 3; ++k) {
        auto& dst = k == 0 ? v : k == 1 ? t : p;
        dst = train_scores[k];
        dst.insert(dst.end(), val_scores[k].begin(), val_scores[k].end());
    }
    const ModelData md = mid_fusion_data(v, t, p, std::move(labels));
    std::vector<std::size_t> train_rows(stack_rows.size());
    std::vector<std::size_t> val_rows(sp.validation.size());
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::iota(val_rows.begin(), val_rows.end(), train_rows.size());
    TrainConfig tc = cfg.train_config(ModelKind::MidFusionMLP);
    tc.seed = model_seed(seed, ModelKind::MidFusionMLP);
    stage.fusion = train(ModelKind::MidFusionMLP, cfg.image_size, md, train_rows, val_rows, tc);
    stage.validation_scores = predict(stage.fusion, md, val_rows);
    return stage;
}

RunResult run_once(const ExperimentConfig& cfg, const SampleSet& data, std::size_t run) {
    RunResult result;
    result.run = run;
    const std::uint64_t seed = run_seed(cfg, run);
    try {
        const Split sp = split(data, SplitSpec{0.8, split_seed(seed)});
        result.validation_episodes = sp.validation_episodes;
        const auto truth = labels_at(data, sp.validation);

        const auto& m = cfg.methods;
        const bool voting = wants(m, {Method::HardVoting, Method::SoftVoting});
        const bool mid = wants(m, {Method::MidFusion});
        const bool reuse_for_mid = mid && cfg.stacking_holdout == 0;

        // Single-modality classifiers on the full training set.
        std::map<ModelKind, std::vector<ClassScores>> scores;
        std::vector<TrainedModel> full;
        const std::pair<Method, ModelKind> singles[] = {
            {Method::Vision, ModelKind::VisionCNN},
            {Method::Tactile, ModelKind::TactileMLP},
            {Method::Proprio, ModelKind::ProprioMLP},
        };
        for (const auto& [method, kind] : singles) {
            if (!voting && !reuse_for_mid && !wants(m, {method})) continue;
            const ModelData md = model_data(kind, data);
            TrainConfig tc = cfg.train_config(kind);
            tc.seed = model_seed(seed, kind);
            TrainedModel model = train(kind, cfg.image_size, md, sp.train, sp.validation, tc);
            scores[kind] = predict(model, md, sp.validation);
            result.evaluations[method] = evaluate_scores(scores[kind], truth);
            if (reuse_for_mid) full.push_back(std::move(model));
        }

        if (voting) {
            const auto& v = scores.at(ModelKind::VisionCNN);
            const auto& t = scores.at(ModelKind::TactileMLP);
            const auto& p = scores.at(ModelKind::ProprioMLP);
            result.evaluations[Method::HardVoting] =
                evaluate([&](std::size_t i) { return hard_vote(v[i], t[i], p[i]); }, truth);
            result.evaluations[Method::SoftVoting] =
                evaluate([&](std::size_t i) -> Vote { return soft_vote(v[i], t[i], p[i]); }, truth);
        }

        if (mid) {
            const auto stage = train_mid_fusion(cfg, data, sp, seed, reuse_for_mid ? &full : nullptr);
            result.evaluations[Method::MidFusion] = evaluate_scores(stage.validation_scores, truth);
        }

        if (wants(m, {Method::SensorFusion})) {
            const ModelData md = model_data(ModelKind::SensorFusionNet, data);
            TrainConfig tc = cfg.train_config(ModelKind::SensorFusionNet);
            tc.seed = model_seed(seed, ModelKind::SensorFusionNet);
            const TrainedModel model = train(ModelKind::SensorFusionNet, cfg.image_size, md, sp.train, sp.validation, tc);
            result.evaluations[Method::SensorFusion] = evaluate_scores(predict(model, md, sp.validation), truth);
        }
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
        result.evaluations.clear();
    }
    return result;
}

std::vector<MethodReport> summarize(const std::vector<RunResult>& runs, const std::vector<Method>& methods) {
    std::vector<MethodReport> out;
    for (Method m : kAllMethods) {
        if (std::find(methods.begin(), methods.end(), m) == methods.end()) continue;
        MethodReport rep;
        rep.method = m;
        std::array<double, kClassCount> sum{};
        std::array<std::size_t, kClassCount> count{};
        for (const auto& r : runs) {
            if (r.failed) continue;
            const auto& ev = r.evaluations.at(m);
            rep.runs.push_back(r.run);
            rep.accuracies.push_back(ev.accuracy);
            rep.confusion.push_back(ev.matrix);
            for (std::size_t c = 0; c < kClassCount; ++c) {
                const double a = ev.matrix.class_accuracy(c);
                if (std::isnan(a)) continue;
                sum[c] += a;
                ++count[c];
            }
        }
        if (!rep.accuracies.empty()) rep.summary = aggregate(rep.accuracies);
        for (std::size_t c = 0; c < kClassCount; ++c) {
            rep.per_class[c] = count[c] ? sum[c] / static_cast<double>(count[c])
                                        : std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(rep));
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const SampleSet& data) {
    cfg.validate();
    ExperimentResult result;
    result.runs.resize(cfg.runs);
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < cfg.runs; r = next++) {
            result.runs[r] = run_once(cfg, data, r);
            if (cfg.on_run_done) {
                std::lock_guard lock(report_mutex);
                cfg.on_run_done(result.runs[r]);
            }
        }
    };
    const std::size_t threads = std::min(cfg.jobs, cfg.runs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    result.methods = summarize(result.runs, cfg.methods);
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.regenerate_per_run) {
        const SyncedDataset ds = cfg.dataset ? load_synced_dataset(*cfg.dataset, cfg.sync)
                                             : generate_synced_dataset(cfg.generator, cfg.sync);
        auto result = run_experiment(cfg, make_set(cfg, ds));
        result.skipped_episodes = ds.skipped;
        return result;
    }

    // Fresh synthetic data per run; the dataset path is ignored.
    ExperimentResult result;
    result.runs.resize(cfg.runs);
    std::vector<std::vector<std::string>> skipped(cfg.runs);
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < cfg.runs; r = next++) {
            GeneratorConfig gen = cfg.generator;
            gen.seed = derive_seed(derive_seed(cfg.generator.seed, kGeneratorStream), r);
            const SyncedDataset ds = generate_synced_dataset(gen, cfg.sync);
            skipped[r] = ds.skipped;
            result.runs[r] = run_once(cfg, make_set(cfg, ds), r);
            if (cfg.on_run_done) {
                std::lock_guard lock(report_mutex);
                cfg.on_run_done(result.runs[r]);
            }
        }
    };
    const std::size_t threads = std::min(cfg.jobs, cfg.runs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        for (auto& s : skipped[r]) result.skipped_episodes.push_back("run " + std::to_string(r + 1) + ", " + s);
    }
    result.methods = summarize(result.runs, cfg.methods);
    return result;
}

}  // namespace mmcf
