#include "mmcf/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "mmcf/dataset_io.hpp"
#include "mmcf/experiment.hpp"
#include "mmcf/models.hpp"
#include "mmcf/preprocess.hpp"
#include "mmcf/report.hpp"
#include "mmcf/rng.hpp"
#include "mmcf/sync.hpp"

namespace mmcf {

namespace {

// Options shared by every command that needs synced samples.
struct DataOptions {
    std::string data;  // empty: generate in memory
    std::size_t episodes_per_class = 30;
    std::uint64_t gen_seed = 42;
    int frame_size = 64;
    std::size_t decimation = 10;
    bool all_frames = false;
    bool regenerate = false;

    void add(CLI::App& app) {
        app.add_option("--data", data, "Dataset directory written by 'gen' (default: generate in memory)");
        app.add_option("--episodes-per-class", episodes_per_class, "Episodes per class when generating")
            ->check(CLI::PositiveNumber);
        app.add_option("--gen-seed", gen_seed, "Generator seed when generating");
        app.add_option("--frame-size", frame_size, "Camera frame size when generating")
            ->check(CLI::IsMember({32, 64, 128, 256}));
        app.add_option("--decimation", decimation, "Keep every k-th camera frame")->check(CLI::PositiveNumber);
        app.add_flag("--all-frames", all_frames, "Do not restrict streams to the holding interval");
    }

    GeneratorConfig generator() const {
        GeneratorConfig g;
        g.episodes_per_class = episodes_per_class;
        g.seed = gen_seed;
        g.image_size = frame_size;
        return g;
    }

    SyncConfig sync() const { return SyncConfig{decimation, !all_frames}; }

    SyncedDataset load(bool images) const {
        return data.empty() ? generate_synced_dataset(generator(), sync())
                            : load_synced_dataset(data, sync(), images);
    }
};

struct TrainOptions {
    std::map<ModelKind, std::size_t> epochs;
    std::string loss = "normalized";
    double learning_rate = 1e-3;

    void add(CLI::App& app) {
        const std::pair<const char*, ModelKind> flags[] = {
            {"--vision-epochs", ModelKind::VisionCNN},     {"--tactile-epochs", ModelKind::TactileMLP},
            {"--proprio-epochs", ModelKind::ProprioMLP},   {"--mid-epochs", ModelKind::MidFusionMLP},
            {"--sensor-epochs", ModelKind::SensorFusionNet},
        };
        for (const auto& [flag, kind] : flags) {
            app.add_option_function<std::size_t>(
                   flag, [this, kind = kind](std::size_t v) { epochs[kind] = v; },
                   "Epochs for " + std::string(to_string(kind)))
                ->check(CLI::PositiveNumber);
        }
        app.add_option("--loss", loss, "Cross-entropy form: literal or normalized")
            ->check(CLI::IsMember({"literal", "normalized"}));
        app.add_option("--lr", learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
    }

    TrainConfig config(ModelKind kind) const {
        TrainConfig c = default_train_config(kind);
        if (auto it = epochs.find(kind); it != epochs.end()) c.epochs = it->second;
        c.loss = loss_kind_from_string(loss);
        c.learning_rate = learning_rate;
        return c;
    }
};

struct ExperimentOptions {
    DataOptions data;
    TrainOptions train;
    std::uint64_t seed = 1;
    std::size_t runs = 10;
    int image_size = 64;
    std::size_t jobs = 1;
    double margin = kDefaultCropMargin;
    double holdout = 0.2;
    std::string out;
};

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

void print_table(std::ostream& out, const ExperimentResult& result) {
    out << std::left << std::setw(22) << "method" << std::right << std::setw(10) << "accuracy" << std::setw(10)
        << "std" << std::setw(6) << "runs" << '\n';
    for (const auto& row : table1_rows(result)) {
        out << std::left << std::setw(22) << row.method << std::right << std::setw(9) << row.mean_pct << '%'
            << std::setw(9) << row.std_pct << '%' << std::setw(6) << row.runs;
        if (!row.note.empty()) out << "  (" << row.note << ')';
        out << '\n';
    }
}

ExperimentConfig experiment_config(const ExperimentOptions& o) {
    const DataOptions& d = o.data;
    const TrainOptions& t = o.train;
    ExperimentConfig cfg;
    cfg.runs = o.runs;
    cfg.seed = o.seed;
    cfg.image_size = o.image_size;
    cfg.crop_margin = o.margin;
    cfg.jobs = o.jobs;
    cfg.stacking_holdout = o.holdout;
    if (!d.data.empty()) cfg.dataset = d.data;
    cfg.generator = d.generator();
    cfg.regenerate_per_run = d.regenerate;
    cfg.sync = d.sync();
    for (ModelKind k : kAllModelKinds) cfg.train[k] = t.config(k);
    return cfg;
}

int cmd_gen(std::ostream& out, const std::string& dir, const GeneratorConfig& cfg) {
    const Manifest m = generate_dataset(cfg, dir);
    std::size_t frames = 0;
    for (const auto& e : m.episodes) frames += e.frames;
    out << "wrote " << m.episodes.size() << " episodes (" << frames << " frames) to " << dir << '\n';
    return 0;
}

int cmd_sync(std::ostream& out, std::ostream& err, const DataOptions& d, std::string path) {
    if (d.data.empty()) throw CLI::RequiredError("--data");
    if (path.empty()) path = (std::filesystem::path(d.data) / "synced.csv").string();
    const SyncedDataset ds = d.load(false);
    write_synced_csv(ds.samples, path);
    for (const auto& s : ds.skipped) err << "skipped " << s << '\n';
    out << "wrote " << ds.samples.size() << " synced samples to " << path << '\n';
    return 0;
}

int cmd_inspect(std::ostream& out, const DataOptions& d) {
    if (d.data.empty()) throw CLI::RequiredError("--data");
    const Manifest m = read_manifest(d.data);
    const auto& g = m.config;
    out << "generator: seed " << g.seed << ", " << g.episodes_per_class << " episodes/class, " << g.episode_duration
        << " s, frames " << g.image_size << "x" << g.image_size << '\n';
    out << "difficulty: occlusion " << g.occlusion_strength << ", transparency " << g.transparency_noise
        << ", proprio noise " << g.proprio_noise << ", grasp jitter " << g.grasp_jitter << '\n';

    std::array<std::size_t, kClassCount> episodes{};
    std::size_t tactile = 0, proprio = 0, frames = 0;
    for (const auto& e : m.episodes) {
        ++episodes[index_of(e.label)];
        tactile += e.tactile_samples;
        proprio += e.proprio_samples;
        frames += e.frames;
    }
    const SyncedDataset ds = d.load(false);
    std::array<std::size_t, kClassCount> synced{};
    double worst_tactile = 0, worst_proprio = 0;
    for (const auto& s : ds.samples) {
        ++synced[index_of(s.label)];
        worst_tactile = std::max(worst_tactile, std::abs(s.t_tactile - s.t_lead));
        worst_proprio = std::max(worst_proprio, std::abs(s.t_proprio - s.t_lead));
    }
    out << "streams: " << tactile << " tactile, " << proprio << " proprioception, " << frames << " frames\n";
    out << std::left << std::setw(14) << "class" << std::right << std::setw(10) << "episodes" << std::setw(10)
        << "synced" << '\n';
    for (auto c : kAllClasses) {
        out << std::left << std::setw(14) << to_string(c) << std::right << std::setw(10) << episodes[index_of(c)]
            << std::setw(10) << synced[index_of(c)] << '\n';
    }
    out << "synced samples: " << ds.samples.size() << ", skipped episodes: " << ds.skipped.size() << '\n';
    out << "largest offset: tactile " << fixed(worst_tactile * 1000, 2) << " ms, proprioception "
        << fixed(worst_proprio * 1000, 2) << " ms\n";
    return 0;
}

void print_history(std::ostream& out, const TrainedModel& model) {
    out << "epoch  train_loss  train_acc  val_loss  val_acc\n";
    for (std::size_t e = 0; e < model.history.size(); ++e) {
        const auto& h = model.history[e];
        out << std::setw(5) << e + 1 << std::setw(12) << fixed(h.train_loss, 4) << std::setw(10)
            << format_percent(h.train_accuracy) << '%' << std::setw(10) << fixed(h.validation_loss, 4)
            << std::setw(8) << format_percent(h.validation_accuracy) << "%\n";
    }
}

int cmd_train(std::ostream& out, std::ostream& err, const ExperimentOptions& o, const std::string& modality,
              std::optional<std::size_t> epochs, std::optional<std::size_t> batch, const std::string& out_dir) {
    const ModelKind kind = model_kind_from_string(modality);
    ExperimentConfig cfg = experiment_config(o);
    if (epochs) cfg.train[kind].epochs = *epochs;
    if (batch) cfg.train[kind].batch_size = *batch;
    cfg.validate();

    const bool images = kind != ModelKind::TactileMLP && kind != ModelKind::ProprioMLP;
    const SyncedDataset ds = o.data.load(images);
    for (const auto& s : ds.skipped) err << "skipped " << s << '\n';
    const SampleSet set = make_sample_set(ds.samples, cfg.image_size, images, cfg.crop_margin);
    const std::uint64_t seed = run_seed(cfg, 0);
    const Split sp = split(set, SplitSpec{0.8, split_seed(seed)});
    out << to_string(kind) << ": " << sp.train.size() << " training and " << sp.validation.size()
        << " validation samples (" << sp.train_episodes.size() << "/" << sp.validation_episodes.size()
        << " episodes)\n";

    TrainedModel model;
    if (kind == ModelKind::MidFusionMLP) {
        auto stage = train_mid_fusion(cfg, set, sp, seed);
        for (const auto& c : stage.classifiers) {
            const auto scores = predict(c, model_data(c.kind, set), sp.validation);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < scores.size(); ++i) {
                if (argmax(scores[i]) == index_of(set.labels[sp.validation[i]])) ++correct;
            }
            out << "  " << to_string(c.kind) << " validation accuracy "
                << format_percent(static_cast<double>(correct) / static_cast<double>(scores.size())) << "%\n";
        }
        model = std::move(stage.fusion);
    } else {
        TrainConfig tc = cfg.train_config(kind);
        tc.seed = model_seed(seed, kind);
        model = train(kind, cfg.image_size, model_data(kind, set), sp.train, sp.validation, tc);
    }
    print_history(out, model);
    if (!out_dir.empty()) {
        save_model(model, out_dir);
        out << "saved model to " << out_dir << '\n';
    }
    return 0;
}

int cmd_experiment(std::ostream& out, std::ostream& err, ExperimentConfig cfg, const std::string& out_dir) {
    cfg.on_run_done = [&](const RunResult& r) {
        if (r.failed) {
            err << "run " << r.run + 1 << " failed: " << r.error << '\n';
            return;
        }
        err << "run " << r.run + 1 << " done:";
        for (const auto& [m, ev] : r.evaluations) err << ' ' << method_slug(m) << '=' << format_percent(ev.accuracy);
        err << '\n';
    };
    const ExperimentResult result = run_experiment(cfg);
    for (const auto& s : result.skipped_episodes) err << "skipped " << s << '\n';
    print_table(out, result);
    if (!out_dir.empty()) {
        emit_report(result, out_dir);
        out << "report written to " << out_dir << '\n';
    }
    const bool all_failed =
        std::all_of(result.runs.begin(), result.runs.end(), [](const RunResult& r) { return r.failed; });
    return all_failed ? 2 : 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multimodal container-content classification toolkit", "mmcf"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic episode dataset");
    GeneratorConfig gcfg;
    std::string gen_out;
    gen->add_option("--out", gen_out, "Output directory (absent or empty)")->required();
    gen->add_option("--episodes-per-class", gcfg.episodes_per_class, "Episodes per class")
        ->check(CLI::PositiveNumber);
    gen->add_option("--seed", gcfg.seed, "Dataset seed");
    gen->add_option("--image-size", gcfg.image_size, "Camera frame size")->check(CLI::IsMember({32, 64, 128, 256}));
    gen->add_option("--duration", gcfg.episode_duration, "Episode length in seconds");
    gen->add_option("--occlusion", gcfg.occlusion_strength, "Hand occlusion strength")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--transparency", gcfg.transparency_noise, "Bottle transparency noise")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--proprio-noise", gcfg.proprio_noise, "Joint sensing noise")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--grasp-jitter", gcfg.grasp_jitter, "Grasp pose variation")->check(CLI::Range(0.0, 1.0));
    gen->set_config("--config");

    // sync
    auto* sync = app.add_subcommand("sync", "Build the synced sample cache of a dataset");
    DataOptions sync_data;
    std::string sync_out;
    sync->add_option("--data", sync_data.data, "Dataset directory")->required();
    sync->add_option("--out", sync_out, "Output CSV (default <data>/synced.csv)");
    sync->add_option("--decimation", sync_data.decimation, "Keep every k-th camera frame")
        ->check(CLI::PositiveNumber);
    sync->add_flag("--all-frames", sync_data.all_frames, "Do not restrict streams to the holding interval");
    sync->set_config("--config");

    // train
    auto* trn = app.add_subcommand("train", "Train one model on an 80:20 episode split");
    ExperimentOptions train_opts;
    std::string modality;
    std::optional<std::size_t> train_epochs, train_batch;
    std::string train_out;
    train_opts.data.add(*trn);
    train_opts.train.add(*trn);
    trn->add_option("--modality", modality, "vision, tactile, proprio, mid_fusion or sensor_fusion")->required();
    trn->add_option("--seed", train_opts.seed, "Split and training seed");
    trn->add_option("--image-size", train_opts.image_size, "Network input size");
    trn->add_option("--crop-margin", train_opts.margin, "Crop margin around the bounding box");
    trn->add_option("--stacking-holdout", train_opts.holdout,
                    "Share of training episodes whose classifier scores train the mid-fusion net (0: in-sample)")
        ->check(CLI::Range(0.0, 0.9));
    trn->add_option("--epochs", train_epochs, "Epochs (default depends on the model)")->check(CLI::PositiveNumber);
    trn->add_option("--batch-size", train_batch, "Batch size")->check(CLI::PositiveNumber);
    trn->add_option("--out", train_out, "Directory for weights.bin and model.json");
    trn->set_config("--config");

    // eval and compare share the experiment options
    auto add_experiment = [](CLI::App& cmd, ExperimentOptions& o) {
        o.data.add(cmd);
        o.train.add(cmd);
        cmd.add_flag("--regenerate", o.data.regenerate, "Generate fresh data for every run");
        cmd.add_option("--seed", o.seed, "Experiment seed");
        cmd.add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber);
        cmd.add_option("--image-size", o.image_size, "Network input size");
        cmd.add_option("--jobs", o.jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
        cmd.add_option("--crop-margin", o.margin, "Crop margin around the bounding box");
        cmd.add_option("--stacking-holdout", o.holdout,
                       "Share of training episodes whose classifier scores train the mid-fusion net (0: in-sample)")
            ->check(CLI::Range(0.0, 0.9));
        cmd.set_config("--config");
    };

    auto* ev = app.add_subcommand("eval", "Evaluate one method over one or more runs");
    ExperimentOptions eval_opts;
    eval_opts.runs = 1;
    std::string method;
    add_experiment(*ev, eval_opts);
    ev->add_option("--method", method, "tactile, proprioception, vision, hard_voting, soft_voting, mid_fusion, "
                                       "sensor_fusion")
        ->required();
    ev->add_option("--out", eval_opts.out, "Report directory");

    auto* cmp = app.add_subcommand("compare", "Run every method over several runs and write the report");
    ExperimentOptions cmp_opts;
    add_experiment(*cmp, cmp_opts);
    cmp->add_option("--out", cmp_opts.out, "Report directory")->required();

    // inspect
    auto* ins = app.add_subcommand("inspect", "Print dataset statistics");
    DataOptions ins_data;
    ins->add_option("--data", ins_data.data, "Dataset directory")->required();
    ins->set_config("--config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = nullptr;
        for (const auto* s : app.get_subcommands()) sub = s;
        err << (sub ? sub->help() : app.help());
        return 1;
    }

    try {
        if (*gen) return cmd_gen(out, gen_out, gcfg);
        if (*sync) return cmd_sync(out, err, sync_data, sync_out);
        if (*ins) return cmd_inspect(out, ins_data);
        if (*trn) {
            return cmd_train(out, err, train_opts, modality, train_epochs, train_batch, train_out);
        }
        if (*ev) {
            auto cfg = experiment_config(eval_opts);
            cfg.methods = {method_from_string(method)};
            return cmd_experiment(out, err, std::move(cfg), eval_opts.out);
        }
        if (*cmp) {
            auto cfg = experiment_config(cmp_opts);
            return cmd_experiment(out, err, std::move(cfg), cmp_opts.out);
        }
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace mmcf
