#include "mmcf/dataset_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "mmcf/csv.hpp"

namespace mmcf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return f;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    return f;
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
    out << "t";
    for (const auto& c : cols) out << ',' << c;
    out << '\n';
}

template <typename Sample>
void write_stream(const fs::path& path, const std::vector<std::string>& cols, const std::vector<Sample>& samples) {
    auto f = open_out(path);
    write_header(f, cols);
    std::string line;
    for (const auto& s : samples) {
        line = format_number(s.t);
        for (float v : s.values) {
            line += ',';
            line += format_number(v);
        }
        line += '\n';
        f << line;
    }
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

template <typename Sample>
std::vector<Sample> read_stream(const fs::path& path, const std::vector<std::string>& cols) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path.string() + ": missing header");
    const auto header = split_csv(line);
    if (header.size() != cols.size() + 1 || header[0] != "t") {
        throw std::runtime_error(path.string() + ": unexpected header");
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (header[i + 1] != cols[i]) throw std::runtime_error(path.string() + ": unexpected column " + std::string(header[i + 1]));
    }
    std::vector<Sample> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != cols.size() + 1) throw std::runtime_error(path.string() + ": ragged row");
        Sample s;
        s.t = parse_double(fields[0]);
        for (std::size_t i = 0; i < cols.size(); ++i) s.values[i] = parse_float(fields[i + 1]);
        out.push_back(s);
    }
    return out;
}

json config_to_json(const GeneratorConfig& c) {
    return json{{"episodes_per_class", c.episodes_per_class},
                {"episode_duration", c.episode_duration},
                {"image_size", c.image_size},
                {"occlusion_strength", c.occlusion_strength},
                {"transparency_noise", c.transparency_noise},
                {"proprio_noise", c.proprio_noise},
                {"grasp_jitter", c.grasp_jitter},
                {"seed", c.seed}};
}

GeneratorConfig config_from_json(const json& j) {
    GeneratorConfig c;
    c.episodes_per_class = j.at("episodes_per_class").get<std::size_t>();
    c.episode_duration = j.at("episode_duration").get<double>();
    c.image_size = j.at("image_size").get<int>();
    c.occlusion_strength = j.at("occlusion_strength").get<double>();
    c.transparency_noise = j.at("transparency_noise").get<double>();
    c.proprio_noise = j.at("proprio_noise").get<double>();
    c.grasp_jitter = j.at("grasp_jitter").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::vector<std::string> tactile_columns() {
    std::vector<std::string> cols;
    for (std::size_t f = 1; f <= kFingerCount; ++f) {
        for (const char* axis : {"x", "y", "z"}) cols.push_back("f" + std::to_string(f) + axis);
    }
    return cols;
}

std::vector<std::string> proprio_columns() {
    std::vector<std::string> cols;
    for (std::size_t j = 1; j <= kJointCount; ++j) {
        for (const char* q : {"_pos", "_vel", "_eff"}) cols.push_back("j" + std::to_string(j) + q);
    }
    return cols;
}

void write_episode(const Episode& ep, const fs::path& dir) {
    fs::create_directories(dir / "frames");
    write_stream(dir / "tactile.csv", tactile_columns(), ep.tactile);
    write_stream(dir / "proprio.csv", proprio_columns(), ep.proprio);
    {
        auto f = open_out(dir / "frames.csv");
        f << "t,file,x0,y0,x1,y1\n";
        for (const auto& fr : ep.frames) {
            f << format_number(fr.t) << ',' << fr.file << ',' << fr.box.x0 << ',' << fr.box.y0 << ','
              << fr.box.x1 << ',' << fr.box.y1 << '\n';
            if (!fr.image.empty()) write_ppm(fr.image, dir / fr.file);
        }
        if (!f) throw std::runtime_error("write failed: " + (dir / "frames.csv").string());
    }
    json meta{{"id", ep.id},
              {"class", std::string(to_string(ep.label))},
              {"grasp", std::string(to_string(ep.grasp))},
              {"duration", ep.duration},
              {"holding", {ep.holding.grasp, ep.holding.release}}};
    auto f = open_out(dir / "meta.json");
    f << meta.dump(2) << '\n';
}

Episode read_episode(const fs::path& dir, bool load_images) {
    Episode ep;
    {
        auto f = open_in(dir / "meta.json");
        const json meta = json::parse(f);
        ep.id = meta.at("id").get<std::string>();
        ep.label = class_from_string(meta.at("class").get<std::string>());
        ep.grasp = grasp_from_string(meta.at("grasp").get<std::string>());
        ep.duration = meta.at("duration").get<double>();
        ep.holding = {meta.at("holding").at(0).get<double>(), meta.at("holding").at(1).get<double>()};
    }
    ep.tactile = read_stream<TactileSample>(dir / "tactile.csv", tactile_columns());
    ep.proprio = read_stream<ProprioSample>(dir / "proprio.csv", proprio_columns());
    auto f = open_in(dir / "frames.csv");
    std::string line;
    std::getline(f, line);
    if (line != "t,file,x0,y0,x1,y1") throw std::runtime_error((dir / "frames.csv").string() + ": unexpected header");
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 6) throw std::runtime_error((dir / "frames.csv").string() + ": ragged row");
        Frame fr;
        fr.t = parse_double(fields[0]);
        fr.file = std::string(fields[1]);
        fr.box = {static_cast<int>(parse_int(fields[2])), static_cast<int>(parse_int(fields[3])),
                  static_cast<int>(parse_int(fields[4])), static_cast<int>(parse_int(fields[5]))};
        if (load_images) fr.image = read_ppm(dir / fr.file);
        ep.frames.push_back(std::move(fr));
    }
    return ep;
}

void write_manifest(const Manifest& m, const fs::path& root) {
    json episodes = json::array();
    for (const auto& e : m.episodes) {
        episodes.push_back(json{{"id", e.id},
                                {"class", std::string(to_string(e.label))},
                                {"grasp", std::string(to_string(e.grasp))},
                                {"tactile", e.tactile_samples},
                                {"proprio", e.proprio_samples},
                                {"frames", e.frames}});
    }
    json j{{"generator", config_to_json(m.config)}, {"episodes", std::move(episodes)}};
    auto f = open_out(root / "manifest.json");
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed: " + (root / "manifest.json").string());
}

Manifest read_manifest(const fs::path& root) {
    auto f = open_in(root / "manifest.json");
    const json j = json::parse(f);
    Manifest m;
    m.config = config_from_json(j.at("generator"));
    for (const auto& e : j.at("episodes")) {
        ManifestEntry entry;
        entry.id = e.at("id").get<std::string>();
        entry.label = class_from_string(e.at("class").get<std::string>());
        entry.grasp = grasp_from_string(e.at("grasp").get<std::string>());
        entry.tactile_samples = e.at("tactile").get<std::size_t>();
        entry.proprio_samples = e.at("proprio").get<std::size_t>();
        entry.frames = e.at("frames").get<std::size_t>();
        m.episodes.push_back(std::move(entry));
    }
    return m;
}

Manifest generate_dataset(const GeneratorConfig& cfg, const fs::path& out_dir) {
    cfg.validate();
    const bool existed = fs::exists(out_dir);
    if (existed && !fs::is_empty(out_dir)) {
        throw std::runtime_error("output directory " + out_dir.string() + " is not empty");
    }
    Manifest manifest;
    manifest.config = cfg;
    try {
        fs::create_directories(out_dir);
        for_each_episode(cfg, [&](std::size_t, Episode&& ep) {
            write_episode(ep, out_dir / ep.id);
            manifest.episodes.push_back({ep.id, ep.label, ep.grasp, ep.tactile.size(), ep.proprio.size(),
                                         ep.frames.size()});
        });
        write_manifest(manifest, out_dir);
    } catch (...) {
        std::error_code ec;
        if (existed) {
            for (const auto& entry : fs::directory_iterator(out_dir, ec)) fs::remove_all(entry.path(), ec);
        } else {
            fs::remove_all(out_dir, ec);
        }
        throw;
    }
    return manifest;
}

Manifest generate_dataset(GeneratorConfig cfg, std::uint64_t seed, const fs::path& out_dir) {
    cfg.seed = seed;
    return generate_dataset(cfg, out_dir);
}

}  // namespace mmcf
