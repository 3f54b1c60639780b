#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmcf/datagen.hpp"

namespace mmcf {

/// On-disk dataset layout:
///
///   <root>/manifest.json
///   <root>/ep_NNNNN/tactile.csv   t,f1x,f1y,f1z,...,f5z
///   <root>/ep_NNNNN/proprio.csv   t,j1_pos,j1_vel,j1_eff,...,j23_eff
///   <root>/ep_NNNNN/frames.csv    t,file,x0,y0,x1,y1
///   <root>/ep_NNNNN/frames/FFFF.ppm
///   <root>/ep_NNNNN/meta.json     class, grasp, holding interval
struct ManifestEntry {
    std::string id;
    ContainerClass label = ContainerClass::BottleEmpty;
    GraspType grasp = GraspType::Side;
    std::size_t tactile_samples = 0;
    std::size_t proprio_samples = 0;
    std::size_t frames = 0;

    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    GeneratorConfig config;
    std::vector<ManifestEntry> episodes;
};

std::vector<std::string> tactile_columns();
std::vector<std::string> proprio_columns();

void write_episode(const Episode& episode, const std::filesystem::path& dir);
/// Reads an episode directory. Frame pixels are loaded only on request.
Episode read_episode(const std::filesystem::path& dir, bool load_images = false);

void write_manifest(const Manifest& manifest, const std::filesystem::path& root);
Manifest read_manifest(const std::filesystem::path& root);

/// Generates 7 x episodes_per_class episodes under out_dir (which must be
/// absent or empty). On any failure everything written so far is removed and
/// the error is rethrown.
Manifest generate_dataset(const GeneratorConfig& cfg, const std::filesystem::path& out_dir);
Manifest generate_dataset(GeneratorConfig cfg, std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace mmcf
