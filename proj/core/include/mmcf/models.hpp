#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmcf/adam.hpp"
#include "mmcf/fusion.hpp"
#include "mmcf/network.hpp"
#include "mmcf/sync.hpp"

namespace mmcf {

enum class ModelKind { VisionCNN, TactileMLP, ProprioMLP, MidFusionMLP, SensorFusionNet };

inline constexpr std::array<ModelKind, 5> kAllModelKinds = {
    ModelKind::VisionCNN, ModelKind::TactileMLP, ModelKind::ProprioMLP, ModelKind::MidFusionMLP,
    ModelKind::SensorFusionNet,
};

std::string_view to_string(ModelKind kind);
/// Accepts the kind names above and the short forms vision, tactile,
/// proprio, mid_fusion, sensor_fusion.
ModelKind model_kind_from_string(std::string_view name);

inline constexpr int kMinImageSize = 32;

/// Network template of a kind. Throws std::invalid_argument for image sizes
/// below kMinImageSize.
NetworkSpec build(ModelKind kind, int image_size = 64, std::size_t class_count = kClassCount);

/// Epochs 10 (50 for ProprioMLP), batch 32 (5 for MidFusionMLP).
TrainConfig default_train_config(ModelKind kind);

/// Preprocessed samples held in memory. Tensors are shared so per-model views
/// never copy pixels.
struct SampleSet {
    int image_size = 0;
    std::vector<std::string> episode;
    std::vector<ContainerClass> labels;
    std::shared_ptr<const Tensor<float>> images;   // [N, 3, S, S], null without images
    std::shared_ptr<const Tensor<float>> tactile;  // [N, 15]
    std::shared_ptr<const Tensor<float>> proprio;  // [N, 69]
    std::shared_ptr<const Tensor<float>> dense;    // [N, 84] tactile | proprio

    std::size_t size() const { return labels.size(); }
};

/// Preprocesses every sample's frame (when it carries pixels and
/// with_images is set) and stacks the sensor vectors.
SampleSet make_sample_set(const std::vector<SyncedSample>& samples, int image_size, bool with_images = true,
                          double crop_margin = 0.15);

/// Batched network inputs, one tensor per branch, plus labels.
struct ModelData {
    std::vector<std::shared_ptr<const Tensor<float>>> inputs;
    std::vector<ContainerClass> labels;

    std::size_t size() const { return labels.size(); }
};

/// Inputs for every kind except MidFusionMLP. Throws std::invalid_argument
/// when the set lacks what the kind consumes.
ModelData model_data(ModelKind kind, const SampleSet& set);

/// [N, 21] mid-fusion inputs from the three classifiers' scores.
ModelData mid_fusion_data(std::span<const ClassScores> vision, std::span<const ClassScores> tactile,
                          std::span<const ClassScores> proprio, std::vector<ContainerClass> labels);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<std::string> train_episodes;
    std::vector<std::string> validation_episodes;
    std::vector<std::size_t> train;       // sample indices
    std::vector<std::size_t> validation;  // sample indices
};

/// Episode-level split, stratified by class. Each class keeps
/// max(1, round((1 - train_fraction) * n)) episodes for validation. Throws
/// std::invalid_argument when a class has fewer than two episodes.
Split split(std::span<const std::string> episode, std::span<const ContainerClass> labels, const SplitSpec& spec);
inline Split split(const SampleSet& set, const SplitSpec& spec) { return split(set.episode, set.labels, spec); }

struct EpochStats {
    double train_loss = 0;
    double train_accuracy = 0;
    double validation_loss = 0;      // NaN without a validation set
    double validation_accuracy = 0;  // NaN without a validation set
};

struct TrainedModel {
    ModelKind kind = ModelKind::TactileMLP;
    int image_size = 0;
    TrainConfig config;
    Network<float> network;
    std::vector<EpochStats> history;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The untrained network train() starts from.
Network<float> initial_network(ModelKind kind, int image_size, std::uint64_t seed);

/// Mini-batch Adam over the `train` indices with a seeded shuffle each epoch.
/// Validation metrics are recorded after every epoch when `validation` is
/// non-empty. Throws TrainingError naming the epoch and batch on a non-finite
/// loss or gradient.
TrainedModel train(ModelKind kind, int image_size, const ModelData& data, std::span<const std::size_t> train,
                   std::span<const std::size_t> validation, const TrainConfig& cfg);

/// Scores for the given sample indices, in order.
std::vector<ClassScores> predict(const TrainedModel& model, const ModelData& data,
                                 std::span<const std::size_t> indices);
/// Scores for every sample.
std::vector<ClassScores> predict(const TrainedModel& model, const ModelData& data);

/// Scores for one unbatched sample; inputs must match the kind's input
/// shapes exactly, otherwise std::invalid_argument names the mismatch.
ClassScores predict(const TrainedModel& model, std::span<const Tensor<float>> inputs);

/// Writes <dir>/weights.bin and <dir>/model.json.
void save_model(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_model(const std::filesystem::path& dir);

/// Rows of `src` ([N, ...]) selected by `indices`, stacked in order.
Tensor<float> gather_rows(const Tensor<float>& src, std::span<const std::size_t> indices);

}  // namespace mmcf
