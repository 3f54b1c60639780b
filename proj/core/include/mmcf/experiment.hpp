#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmcf/eval.hpp"
#include "mmcf/models.hpp"

namespace mmcf {

/// The seven reported methods, in report order.
enum class Method { Tactile, Proprio, Vision, HardVoting, SoftVoting, MidFusion, SensorFusion };

inline constexpr std::array<Method, 7> kAllMethods = {
    Method::Tactile,    Method::Proprio,   Method::Vision,       Method::HardVoting,
    Method::SoftVoting, Method::MidFusion, Method::SensorFusion,
};

/// Display name, e.g. "Hard Majority Voting".
std::string_view method_name(Method m);
/// File-name slug, e.g. "hard_voting".
std::string_view method_slug(Method m);
/// Accepts either the slug or the display name.
Method method_from_string(std::string_view text);

/// Synced samples of a dataset plus the episodes that had to be skipped.
struct SyncedDataset {
    std::vector<SyncedSample> samples;
    std::vector<std::string> skipped;  // "<episode>: <reason>"
};

/// Reads every episode under root, synchronizes it, and loads pixels only for
/// the frames that survive (when load_images is set).
SyncedDataset load_synced_dataset(const std::filesystem::path& root, const SyncConfig& sync,
                                  bool load_images = true);
/// Same, generating episodes in memory instead of reading them.
SyncedDataset generate_synced_dataset(const GeneratorConfig& gen, const SyncConfig& sync);

struct RunResult;

struct ExperimentConfig {
    std::optional<std::filesystem::path> dataset;  // generate in memory when absent
    GeneratorConfig generator;                     // used when generating
    bool regenerate_per_run = false;               // fresh synthetic data per run
    std::size_t runs = 10;
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::uint64_t seed = 1;
    int image_size = 64;
    double crop_margin = 0.15;
    SyncConfig sync;
    std::map<ModelKind, TrainConfig> train;  // overrides; seeds are always derived
    std::size_t jobs = 1;
    /// Fraction of the training episodes held out to produce the mid-fusion
    /// net's training inputs. 0 trains it on in-sample scores instead.
    double stacking_holdout = 0.2;
    /// Called once per finished run, serialized, in completion order.
    std::function<void(const RunResult&)> on_run_done;

    /// Effective training config for a kind (defaults plus overrides).
    TrainConfig train_config(ModelKind kind) const;
    void validate() const;
};

/// Outcome of every method within one run.
struct RunResult {
    std::size_t run = 0;  // 0-based
    bool failed = false;
    std::string error;
    std::vector<std::string> validation_episodes;
    std::map<Method, Evaluation> evaluations;
};

struct MethodReport {
    Method method = Method::Tactile;
    std::vector<std::size_t> runs;  // 0-based indices of the runs included
    std::vector<double> accuracies;
    Aggregate summary;
    std::array<double, kClassCount> per_class{};  // mean over runs
    std::vector<ConfusionMatrix> confusion;       // aligned with runs
};

struct ExperimentResult {
    std::vector<MethodReport> methods;  // report order
    std::vector<RunResult> runs;        // every run, failed ones included
    std::vector<std::string> skipped_episodes;
};

/// Seed of run `run` (0-based) and the streams derived from it.
std::uint64_t run_seed(const ExperimentConfig& cfg, std::size_t run);
std::uint64_t split_seed(std::uint64_t run_seed);
std::uint64_t model_seed(std::uint64_t run_seed, ModelKind kind);

/// Classifiers in mid-fusion input order.
inline constexpr std::array<ModelKind, 3> kStackedKinds = {ModelKind::VisionCNN, ModelKind::TactileMLP,
                                                          ModelKind::ProprioMLP};

struct MidFusionStage {
    std::vector<TrainedModel> classifiers;  // kStackedKinds order
    TrainedModel fusion;
    std::vector<ClassScores> validation_scores;  // fusion output on split.validation
};

/// Trains the mid-fusion net on one split. With cfg.stacking_holdout > 0 its
/// classifiers are trained on an inner split of the training episodes and the
/// net learns from their scores on the held-out part. With 0 it learns from
/// in-sample scores; `full` may then supply classifiers already trained on the
/// whole training set (kStackedKinds order) so they are not trained twice.
MidFusionStage train_mid_fusion(const ExperimentConfig& cfg, const SampleSet& data, const Split& split,
                                std::uint64_t run_seed, const std::vector<TrainedModel>* full = nullptr);

/// Runs one experiment run in isolation (used by run_experiment).
RunResult run_once(const ExperimentConfig& cfg, const SampleSet& data, std::size_t run);

/// The multi-run protocol: each run draws one split seed shared by all
/// methods, trains every needed model afresh and evaluates on that run's
/// validation episodes. Runs execute on cfg.jobs threads; a failed run is
/// excluded from every method's aggregate.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Same, on an already prepared sample set.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const SampleSet& data);

/// Builds the per-method reports from a list of run results.
std::vector<MethodReport> summarize(const std::vector<RunResult>& runs, const std::vector<Method>& methods);

}  // namespace mmcf
