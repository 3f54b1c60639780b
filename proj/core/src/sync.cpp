#include "mmcf/sync.hpp"

#include <algorithm>
#include <fstream>

#include "mmcf/csv.hpp"
#include "mmcf/dataset_io.hpp"

namespace mmcf {

namespace {

constexpr double kTieTolerance = 1e-9;

template <typename Sample>
std::vector<double> times_of(const std::vector<Sample>& samples) {
    std::vector<double> t;
    t.reserve(samples.size());
    for (const auto& s : samples) t.push_back(s.t);
    return t;
}

template <typename Sample>
void keep_within(std::vector<Sample>& samples, double lo, double hi) {
    std::erase_if(samples, [&](const Sample& s) { return s.t < lo || s.t > hi; });
}

}  // namespace

void SyncConfig::validate() const {
    if (decimation == 0) throw std::invalid_argument("decimation must be at least 1");
}

Episode filter_holding(Episode ep) {
    const double lo = ep.holding.grasp;
    const double hi = ep.holding.release;
    if (!(hi > lo)) {
        throw DegenerateEpisode("degenerate episode " + ep.id + ": empty holding interval");
    }
    keep_within(ep.tactile, lo, hi);
    keep_within(ep.proprio, lo, hi);
    keep_within(ep.frames, lo, hi);
    if (ep.tactile.empty() || ep.proprio.empty() || ep.frames.empty()) {
        throw DegenerateEpisode("degenerate episode " + ep.id + ": a stream is empty after holding filter");
    }
    return ep;
}

std::size_t nearest_index(std::span<const double> times, double t) {
    if (times.empty()) throw std::invalid_argument("nearest_index on empty stream");
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    const std::size_t next = static_cast<std::size_t>(it - times.begin());
    if (next == times.size()) return times.size() - 1;
    const double d_prev = t - times[next - 1];
    const double d_next = times[next] - t;
    return d_prev <= d_next + kTieTolerance ? next - 1 : next;
}

std::vector<SyncedSample> align(std::vector<Frame> lead, const std::vector<TactileSample>& tactile,
                                const std::vector<ProprioSample>& proprio, ContainerClass label,
                                const std::string& episode_id) {
    if (lead.empty() || tactile.empty() || proprio.empty()) {
        throw DegenerateEpisode("episode " + episode_id + ": cannot align with an empty stream");
    }
    const auto tt = times_of(tactile);
    const auto tp = times_of(proprio);
    std::vector<SyncedSample> out;
    out.reserve(lead.size());
    for (auto& frame : lead) {
        const std::size_t it = nearest_index(tt, frame.t);
        const std::size_t ip = nearest_index(tp, frame.t);
        SyncedSample s;
        s.episode = episode_id;
        s.t_lead = frame.t;
        s.t_tactile = tt[it];
        s.t_proprio = tp[ip];
        s.frame_file = frame.file;
        s.box = frame.box;
        s.tactile = tactile[it].values;
        s.proprio = proprio[ip].values;
        s.label = label;
        s.image = std::move(frame.image);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SyncedSample> synchronize(Episode ep, const SyncConfig& cfg) {
    cfg.validate();
    ep.frames = decimate(std::move(ep.frames), cfg.decimation);
    if (cfg.holding_only) ep = filter_holding(std::move(ep));
    return align(std::move(ep.frames), ep.tactile, ep.proprio, ep.label, ep.id);
}

void write_synced_csv(const std::vector<SyncedSample>& samples, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << "episode,t_lead,frame_file,label";
    for (const auto& c : tactile_columns()) f << ',' << c;
    for (const auto& c : proprio_columns()) f << ',' << c;
    f << '\n';
    std::string line;
    for (const auto& s : samples) {
        line = s.episode + ',' + format_number(s.t_lead) + ',' + s.frame_file + ',' + std::string(to_string(s.label));
        for (float v : s.tactile) line += ',' + format_number(v);
        for (float v : s.proprio) line += ',' + format_number(v);
        line += '\n';
        f << line;
    }
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SyncedSample> read_synced_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(f, line);
    const std::size_t width = 4 + kTactileWidth + kProprioWidth;
    if (split_csv(line).size() != width) throw std::runtime_error(path.string() + ": unexpected header");
    std::vector<SyncedSample> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != width) throw std::runtime_error(path.string() + ": ragged row");
        SyncedSample s;
        s.episode = std::string(fields[0]);
        s.t_lead = parse_double(fields[1]);
        s.frame_file = std::string(fields[2]);
        s.label = class_from_string(fields[3]);
        for (std::size_t i = 0; i < kTactileWidth; ++i) s.tactile[i] = parse_float(fields[4 + i]);
        for (std::size_t i = 0; i < kProprioWidth; ++i) s.proprio[i] = parse_float(fields[4 + kTactileWidth + i]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace mmcf
