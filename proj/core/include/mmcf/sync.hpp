#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmcf/datagen.hpp"

namespace mmcf {

struct SyncConfig {
    std::size_t decimation = 10;
    /// Restrict every stream to the holding interval. When false no stream is
    /// filtered.
    bool holding_only = true;

    void validate() const;
};

/// One aligned training example anchored on a camera frame.
struct SyncedSample {
    std::string episode;
    double t_lead = 0;
    double t_tactile = 0;
    double t_proprio = 0;
    std::string frame_file;  // relative to the episode directory
    BoundingBox box;
    std::array<float, kTactileWidth> tactile{};
    std::array<float, kProprioWidth> proprio{};
    ContainerClass label = ContainerClass::BottleEmpty;
    Image image;  // carried along when the source frame had pixels
};

class DegenerateEpisode : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Keeps items 0, k, 2k, ... in order.
template <typename T>
std::vector<T> decimate(std::vector<T> items, std::size_t k) {
    if (k == 0) throw std::invalid_argument("decimation factor must be at least 1");
    std::vector<T> out;
    out.reserve((items.size() + k - 1) / k);
    for (std::size_t i = 0; i < items.size(); i += k) out.push_back(std::move(items[i]));
    return out;
}

/// Restricts tactile, proprio and frames to [grasp, release] (inclusive).
/// Throws DegenerateEpisode when the interval is empty or any stream ends up
/// with no samples.
Episode filter_holding(Episode episode);

/// Index of the sample nearest to t in a sorted list of times; exact ties (to
/// within a nanosecond) go to the earlier sample.
std::size_t nearest_index(std::span<const double> times, double t);

/// One SyncedSample per lead frame, each matched to the nearest tactile and
/// proprio sample. Throws DegenerateEpisode when any stream is empty.
std::vector<SyncedSample> align(std::vector<Frame> lead, const std::vector<TactileSample>& tactile,
                                const std::vector<ProprioSample>& proprio, ContainerClass label,
                                const std::string& episode_id = {});

/// decimate -> filter_holding -> align.
std::vector<SyncedSample> synchronize(Episode episode, const SyncConfig& cfg);

/// Cache layout: episode,t_lead,frame_file,label,<15 tactile>,<69 proprio>.
void write_synced_csv(const std::vector<SyncedSample>& samples, const std::filesystem::path& path);
/// Bounding boxes and pixels are not part of the cache; they come back empty.
std::vector<SyncedSample> read_synced_csv(const std::filesystem::path& path);

}  // namespace mmcf
