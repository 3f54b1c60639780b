#include "mmcf/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <numeric>

#include "mmcf/preprocess.hpp"
#include "mmcf/rng.hpp"
#include "mmcf/weights_io.hpp"

namespace mmcf {

namespace {

using nlohmann::json;

constexpr std::size_t kPredictBatch = 64;

// Seed streams under TrainConfig::seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void conv_block(std::vector<LayerSpec>& layers, std::size_t cin, std::size_t cout, std::size_t& spatial) {
    layers.push_back(LayerSpec::conv2d(cin, cout, 3, 1, 1));
    layers.push_back(LayerSpec::relu());
    if (spatial >= 2) {
        layers.push_back(LayerSpec::maxpool2d(2, 2));
        spatial /= 2;
    }
}

void dense_relu(std::vector<LayerSpec>& layers, std::size_t in, std::size_t out) {
    layers.push_back(LayerSpec::dense(in, out));
    layers.push_back(LayerSpec::relu());
}

NetworkSpec mlp(std::size_t input, std::size_t hidden, std::size_t depth, std::size_t classes) {
    NetworkSpec spec;
    spec.input_shapes = {{input}};
    spec.output_width = classes;
    std::vector<LayerSpec> layers;
    std::size_t width = input;
    for (std::size_t i = 0; i < depth; ++i) {
        dense_relu(layers, width, hidden);
        width = hidden;
    }
    layers.push_back(LayerSpec::dense(width, classes));
    layers.push_back(LayerSpec::sigmoid());
    spec.branches = {std::move(layers)};
    return spec;
}

Tensor<float> one_hot(std::span<const ContainerClass> labels, std::span<const std::size_t> indices) {
    Tensor<float> out({indices.size(), kClassCount});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out[i * kClassCount + index_of(labels[indices[i]])] = 1.0f;
    }
    return out;
}

std::vector<Tensor<float>> gather_inputs(const ModelData& data, std::span<const std::size_t> indices) {
    std::vector<Tensor<float>> out;
    out.reserve(data.inputs.size());
    for (const auto& t : data.inputs) out.push_back(gather_rows(*t, indices));
    return out;
}

void check_data(const NetworkSpec& spec, const ModelData& data) {
    if (data.inputs.size() != spec.input_shapes.size()) {
        throw std::invalid_argument("model expects " + std::to_string(spec.input_shapes.size()) +
                                    " input(s), data provides " + std::to_string(data.inputs.size()));
    }
    for (std::size_t b = 0; b < data.inputs.size(); ++b) {
        const Shape& got = data.inputs[b]->shape();
        Shape want = spec.input_shapes[b];
        want.insert(want.begin(), data.size());
        if (got != want) {
            throw std::invalid_argument("input " + std::to_string(b) + " has shape " + shape_to_string(got) +
                                        ", model expects " + shape_to_string(want));
        }
    }
}

struct Metrics {
    double loss = 0;
    double accuracy = 0;
};

Metrics evaluate_loss(const Network<float>& net, const ModelData& data, std::span<const std::size_t> indices,
                      LossKind kind) {
    double loss = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < indices.size(); start += kPredictBatch) {
        const auto batch = indices.subspan(start, std::min(kPredictBatch, indices.size() - start));
        const auto inputs = gather_inputs(data, batch);
        const auto acts = net.forward(inputs);
        const Tensor<float>& out = acts.output();
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::span<const float> row(out.data() + i * kClassCount, kClassCount);
            const std::size_t target = index_of(data.labels[batch[i]]);
            loss += categorical_cross_entropy(row, target, kind);
            if (argmax(row) == target) ++correct;
        }
    }
    const double n = static_cast<double>(indices.size());
    return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::VisionCNN: return "VisionCNN";
        case ModelKind::TactileMLP: return "TactileMLP";
        case ModelKind::ProprioMLP: return "ProprioMLP";
        case ModelKind::MidFusionMLP: return "MidFusionMLP";
        case ModelKind::SensorFusionNet: return "SensorFusionNet";
    }
    throw std::invalid_argument("unknown model kind");
}

ModelKind model_kind_from_string(std::string_view name) {
    static const std::map<std::string_view, ModelKind> names = {
        {"VisionCNN", ModelKind::VisionCNN},         {"vision", ModelKind::VisionCNN},
        {"TactileMLP", ModelKind::TactileMLP},       {"tactile", ModelKind::TactileMLP},
        {"ProprioMLP", ModelKind::ProprioMLP},       {"proprio", ModelKind::ProprioMLP},
        {"proprioception", ModelKind::ProprioMLP},   {"MidFusionMLP", ModelKind::MidFusionMLP},
        {"mid_fusion", ModelKind::MidFusionMLP},     {"SensorFusionNet", ModelKind::SensorFusionNet},
        {"sensor_fusion", ModelKind::SensorFusionNet},
    };
    const auto it = names.find(name);
    if (it == names.end()) throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
    return it->second;
}

NetworkSpec build(ModelKind kind, int image_size, std::size_t class_count) {
    const bool needs_image = kind == ModelKind::VisionCNN || kind == ModelKind::SensorFusionNet;
    if (needs_image && image_size < kMinImageSize) {
        throw std::invalid_argument("image size " + std::to_string(image_size) + " is too small; " +
                                    std::string(to_string(kind)) + " requires at least " +
                                    std::to_string(kMinImageSize));
    }
    const auto side = static_cast<std::size_t>(image_size);

    switch (kind) {
        case ModelKind::TactileMLP: return mlp(kTactileWidth, 100, 4, class_count);
        case ModelKind::ProprioMLP: return mlp(kProprioWidth, 100, 4, class_count);
        case ModelKind::MidFusionMLP: return mlp(3 * class_count, 64, 4, class_count);
        case ModelKind::VisionCNN: {
            NetworkSpec spec;
            spec.input_shapes = {{3, side, side}};
            spec.output_width = class_count;
            std::vector<LayerSpec> layers;
            const std::size_t channels[] = {8, 8, 16, 16, 32, 32, 64, 64};
            std::size_t cin = 3;
            std::size_t spatial = side;
            for (std::size_t c : channels) {
                conv_block(layers, cin, c, spatial);
                cin = c;
            }
            layers.push_back(LayerSpec::flatten());
            dense_relu(layers, cin * spatial * spatial, 64);
            layers.push_back(LayerSpec::dense(64, class_count));
            layers.push_back(LayerSpec::sigmoid());
            spec.branches = {std::move(layers)};
            return spec;
        }
        case ModelKind::SensorFusionNet: {
            NetworkSpec spec;
            spec.input_shapes = {{3, side, side}, {kSensorDenseWidth}};
            spec.output_width = class_count;
            std::vector<LayerSpec> conv;
            std::size_t cin = 3;
            std::size_t spatial = side;
            for (std::size_t c : {8, 16, 32, 64}) {
                conv_block(conv, cin, c, spatial);
                cin = c;
            }
            conv.push_back(LayerSpec::flatten());
            std::vector<LayerSpec> dense;
            std::size_t width = kSensorDenseWidth;
            for (int i = 0; i < 4; ++i) {
                dense_relu(dense, width, 100);
                width = 100;
            }
            std::vector<LayerSpec> trunk{LayerSpec::concat()};
            dense_relu(trunk, cin * spatial * spatial + 100, 100);
            for (int i = 0; i < 3; ++i) dense_relu(trunk, 100, 100);
            trunk.push_back(LayerSpec::dense(100, class_count));
            trunk.push_back(LayerSpec::sigmoid());
            spec.branches = {std::move(conv), std::move(dense)};
            spec.trunk = std::move(trunk);
            return spec;
        }
    }
    throw std::invalid_argument("unknown model kind");
}

TrainConfig default_train_config(ModelKind kind) {
    TrainConfig cfg;
    cfg.epochs = kind == ModelKind::ProprioMLP ? 50 : 10;
    cfg.batch_size = kind == ModelKind::MidFusionMLP ? 5 : 32;
    return cfg;
}

Tensor<float> gather_rows(const Tensor<float>& src, std::span<const std::size_t> indices) {
    if (src.rank() == 0) throw std::invalid_argument("gather_rows on a scalar tensor");
    Shape shape = src.shape();
    const std::size_t rows = shape[0];
    const std::size_t stride = rows == 0 ? 0 : src.size() / rows;
    shape[0] = indices.size();
    Tensor<float> out(shape);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows) throw std::out_of_range("row index out of range");
        std::copy_n(src.data() + indices[i] * stride, stride, out.data() + i * stride);
    }
    return out;
}

SampleSet make_sample_set(const std::vector<SyncedSample>& samples, int image_size, bool with_images,
                          double crop_margin) {
    SampleSet set;
    set.image_size = image_size;
    const std::size_t n = samples.size();
    const auto side = static_cast<std::size_t>(std::max(image_size, 0));
    Tensor<float> tactile({n, kTactileWidth});
    Tensor<float> proprio({n, kProprioWidth});
    Tensor<float> dense({n, kSensorDenseWidth});
    const bool images = with_images && n > 0 &&
                        std::all_of(samples.begin(), samples.end(), [](const auto& s) { return !s.image.empty(); });
    Tensor<float> pixels;
    if (images) {
        if (image_size < 1) throw std::invalid_argument("image size must be positive");
        pixels = Tensor<float>({n, 3, side, side});
    }
    const std::size_t plane = 3 * side * side;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = samples[i];
        set.episode.push_back(s.episode);
        set.labels.push_back(s.label);
        std::copy(s.tactile.begin(), s.tactile.end(), tactile.data() + i * kTactileWidth);
        std::copy(s.proprio.begin(), s.proprio.end(), proprio.data() + i * kProprioWidth);
        std::copy(s.tactile.begin(), s.tactile.end(), dense.data() + i * kSensorDenseWidth);
        std::copy(s.proprio.begin(), s.proprio.end(), dense.data() + i * kSensorDenseWidth + kTactileWidth);
        if (images) {
            const auto t = preprocess_frame(s.image, s.box, image_size, crop_margin);
            std::copy(t.data(), t.data() + plane, pixels.data() + i * plane);
        }
    }
    set.tactile = std::make_shared<const Tensor<float>>(std::move(tactile));
    set.proprio = std::make_shared<const Tensor<float>>(std::move(proprio));
    set.dense = std::make_shared<const Tensor<float>>(std::move(dense));
    if (images) set.images = std::make_shared<const Tensor<float>>(std::move(pixels));
    return set;
}

ModelData model_data(ModelKind kind, const SampleSet& set) {
    ModelData data;
    data.labels = set.labels;
    auto need_images = [&] {
        if (!set.images) {
            throw std::invalid_argument(std::string(to_string(kind)) + " needs images but the sample set has none");
        }
        return set.images;
    };
    switch (kind) {
        case ModelKind::VisionCNN: data.inputs = {need_images()}; break;
        case ModelKind::TactileMLP: data.inputs = {set.tactile}; break;
        case ModelKind::ProprioMLP: data.inputs = {set.proprio}; break;
        case ModelKind::SensorFusionNet: data.inputs = {need_images(), set.dense}; break;
        case ModelKind::MidFusionMLP:
            throw std::invalid_argument("MidFusionMLP consumes classifier scores; use mid_fusion_data");
    }
    return data;
}

ModelData mid_fusion_data(std::span<const ClassScores> vision, std::span<const ClassScores> tactile,
                          std::span<const ClassScores> proprio, std::vector<ContainerClass> labels) {
    const std::size_t n = labels.size();
    if (vision.size() != n || tactile.size() != n || proprio.size() != n) {
        throw std::invalid_argument("mid-fusion score lists differ in length");
    }
    Tensor<float> x({n, kMidFusionWidth});
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = mid_fuse_input(vision[i], tactile[i], proprio[i]);
        std::copy(row.begin(), row.end(), x.data() + i * kMidFusionWidth);
    }
    ModelData data;
    data.inputs = {std::make_shared<const Tensor<float>>(std::move(x))};
    data.labels = std::move(labels);
    return data;
}

Split split(std::span<const std::string> episode, std::span<const ContainerClass> labels, const SplitSpec& spec) {
    if (episode.size() != labels.size()) throw std::invalid_argument("episode and label lists differ in length");
    if (!(spec.train_fraction > 0 && spec.train_fraction < 1)) {
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    }
    std::array<std::vector<std::string>, kClassCount> per_class;
    std::map<std::string, ContainerClass> seen;
    for (std::size_t i = 0; i < episode.size(); ++i) {
        const auto [it, inserted] = seen.emplace(episode[i], labels[i]);
        if (inserted) {
            per_class[index_of(labels[i])].push_back(episode[i]);
        } else if (it->second != labels[i]) {
            throw std::invalid_argument("episode " + episode[i] + " carries two labels");
        }
    }

    Rng rng(spec.seed);
    std::map<std::string, bool> is_validation;
    Split out;
    for (std::size_t c = 0; c < kClassCount; ++c) {
        auto& ids = per_class[c];
        if (ids.size() < 2) {
            throw std::invalid_argument("class " + std::string(to_string(class_from_index(c))) + " has " +
                                        std::to_string(ids.size()) + " episode(s); at least 2 are needed to split");
        }
        std::sort(ids.begin(), ids.end());
        rng.shuffle(std::span<std::string>(ids));
        const double want = (1.0 - spec.train_fraction) * static_cast<double>(ids.size());
        const std::size_t n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(want)), 1,
                                                          ids.size() - 1);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const bool val = i < n_val;
            is_validation[ids[i]] = val;
            (val ? out.validation_episodes : out.train_episodes).push_back(ids[i]);
        }
    }
    std::sort(out.train_episodes.begin(), out.train_episodes.end());
    std::sort(out.validation_episodes.begin(), out.validation_episodes.end());
    for (std::size_t i = 0; i < episode.size(); ++i) {
        (is_validation.at(episode[i]) ? out.validation : out.train).push_back(i);
    }
    return out;
}

Network<float> initial_network(ModelKind kind, int image_size, std::uint64_t seed) {
    return Network<float>::initialized(build(kind, image_size), derive_seed(seed, kInitStream));
}

TrainedModel train(ModelKind kind, int image_size, const ModelData& data, std::span<const std::size_t> train_idx,
                   std::span<const std::size_t> validation, const TrainConfig& cfg) {
    cfg.validate();
    if (train_idx.empty()) throw std::invalid_argument("training set is empty");
    TrainedModel model;
    model.kind = kind;
    model.image_size = image_size;
    model.config = cfg;
    model.network = initial_network(kind, image_size, cfg.seed);
    check_data(model.network.spec(), data);

    auto& net = model.network;
    auto state = AdamState<float>::zeros_like(net.parameters());
    Rng order_rng(derive_seed(cfg.seed, kShuffleStream));
    std::vector<std::size_t> order(train_idx.begin(), train_idx.end());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0;
        std::size_t correct = 0;
        std::size_t batch_no = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
            const auto batch =
                std::span<const std::size_t>(order).subspan(start, std::min(cfg.batch_size, order.size() - start));
            const auto inputs = gather_inputs(data, batch);
            const auto targets = one_hot(data.labels, batch);
            const auto acts = net.forward(inputs);
            auto result = net.backward(acts, targets, cfg.loss);
            auto where = [&] {
                return " at epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(batch_no + 1);
            };
            if (!std::isfinite(result.loss)) {
                throw TrainingError(std::string(to_string(kind)) + ": non-finite loss" + where());
            }
            try {
                adam_step(net.parameters(), result.gradients, state, cfg);
            } catch (const std::runtime_error& e) {
                throw TrainingError(std::string(to_string(kind)) + ": " + e.what() + where());
            }
            loss_sum += static_cast<double>(result.loss) * static_cast<double>(batch.size());
            const Tensor<float>& out = acts.output();
            for (std::size_t i = 0; i < batch.size(); ++i) {
                std::span<const float> row(out.data() + i * kClassCount, kClassCount);
                if (argmax(row) == index_of(data.labels[batch[i]])) ++correct;
            }
        }
        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(order.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        if (validation.empty()) {
            stats.validation_loss = std::numeric_limits<double>::quiet_NaN();
            stats.validation_accuracy = std::numeric_limits<double>::quiet_NaN();
        } else {
            const auto m = evaluate_loss(net, data, validation, cfg.loss);
            stats.validation_loss = m.loss;
            stats.validation_accuracy = m.accuracy;
        }
        model.history.push_back(stats);
    }
    return model;
}

std::vector<ClassScores> predict(const TrainedModel& model, const ModelData& data,
                                 std::span<const std::size_t> indices) {
    check_data(model.network.spec(), data);
    std::vector<ClassScores> out;
    out.reserve(indices.size());
    for (std::size_t start = 0; start < indices.size(); start += kPredictBatch) {
        const auto batch = indices.subspan(start, std::min(kPredictBatch, indices.size() - start));
        const auto acts = model.network.forward(gather_inputs(data, batch));
        const Tensor<float>& y = acts.output();
        for (std::size_t i = 0; i < batch.size(); ++i) {
            ClassScores s;
            std::copy_n(y.data() + i * kClassCount, kClassCount, s.begin());
            out.push_back(s);
        }
    }
    return out;
}

std::vector<ClassScores> predict(const TrainedModel& model, const ModelData& data) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return predict(model, data, all);
}

ClassScores predict(const TrainedModel& model, std::span<const Tensor<float>> inputs) {
    const auto& spec = model.network.spec();
    if (inputs.size() != spec.input_shapes.size()) {
        throw std::invalid_argument(std::string(to_string(model.kind)) + " takes " +
                                    std::to_string(spec.input_shapes.size()) + " input(s), got " +
                                    std::to_string(inputs.size()));
    }
    std::vector<Tensor<float>> batched;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        if (inputs[b].shape() != spec.input_shapes[b]) {
            throw std::invalid_argument(std::string(to_string(model.kind)) + " input " + std::to_string(b) +
                                        " must have shape " + shape_to_string(spec.input_shapes[b]) + ", got " +
                                        shape_to_string(inputs[b].shape()));
        }
        Tensor<float> t = inputs[b];
        Shape s = t.shape();
        s.insert(s.begin(), 1);
        t.reshape(std::move(s));
        batched.push_back(std::move(t));
    }
    const auto acts = model.network.forward(batched);
    ClassScores out;
    std::copy_n(acts.output().data(), kClassCount, out.begin());
    return out;
}

void save_model(const TrainedModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_weights(model.network, dir / "weights.bin");
    json history = json::array();
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    for (const auto& h : model.history) {
        history.push_back(json{{"train_loss", num(h.train_loss)},
                               {"train_accuracy", num(h.train_accuracy)},
                               {"validation_loss", num(h.validation_loss)},
                               {"validation_accuracy", num(h.validation_accuracy)}});
    }
    const auto& c = model.config;
    json j{{"kind", std::string(to_string(model.kind))},
           {"image_size", model.image_size},
           {"seed", c.seed},
           {"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"epsilon", c.epsilon},
           {"loss", to_string(c.loss)},
           {"history", std::move(history)}};
    std::ofstream f(dir / "model.json", std::ios::trunc);
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed: " + (dir / "model.json").string());
}

TrainedModel load_model(const std::filesystem::path& dir) {
    std::ifstream f(dir / "model.json");
    if (!f) throw std::runtime_error("cannot open " + (dir / "model.json").string());
    const json j = json::parse(f);
    TrainedModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.image_size = j.at("image_size").get<int>();
    auto& c = model.config;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.loss = loss_kind_from_string(j.at("loss").get<std::string>());
    auto num = [](const json& v) {
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    };
    for (const auto& h : j.at("history")) {
        model.history.push_back({num(h.at("train_loss")), num(h.at("train_accuracy")),
                                 num(h.at("validation_loss")), num(h.at("validation_accuracy"))});
    }
    model.network = load_weights(dir / "weights.bin", build(model.kind, model.image_size));
    return model;
}

}  // namespace mmcf
