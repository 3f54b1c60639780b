#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmcf/classes.hpp"
#include "mmcf/image.hpp"

namespace mmcf {

inline constexpr double kTactileRate = 50.0;
inline constexpr double kProprioRate = 40.0;
inline constexpr double kCameraRate = 30.0;

inline constexpr std::size_t kFingerCount = 5;
inline constexpr std::size_t kJointCount = 23;
inline constexpr std::size_t kTactileWidth = kFingerCount * 3;  // x, y, z per finger
inline constexpr std::size_t kProprioWidth = kJointCount * 3;   // pos, vel, eff per joint

struct GeneratorConfig {
    std::size_t episodes_per_class = 30;
    double episode_duration = 8.0;  // seconds
    int image_size = 64;            // square frames
    // Difficulty knobs, each in [0, 1].
    double occlusion_strength = 0.7;
    double transparency_noise = 0.6;
    double proprio_noise = 1.0;
    double grasp_jitter = 0.5;
    std::uint64_t seed = 42;

    void validate() const;
};

struct TactileSample {
    double t = 0;
    std::array<float, kTactileWidth> values{};  // f1x f1y f1z ... f5z, newtons
};

struct ProprioSample {
    double t = 0;
    std::array<float, kProprioWidth> values{};  // j1_pos j1_vel j1_eff ... j23_eff
};

struct Frame {
    double t = 0;
    BoundingBox box;
    std::string file;  // relative to the episode directory
    Image image;       // empty when loaded from disk without pixels
};

struct HoldingInterval {
    double grasp = 0;
    double release = 0;
};

/// One grasp-lift-release recording.
struct Episode {
    std::string id;
    ContainerClass label = ContainerClass::BottleEmpty;
    GraspType grasp = GraspType::Side;
    double duration = 0;
    HoldingInterval holding;
    std::vector<TactileSample> tactile;
    std::vector<ProprioSample> proprio;
    std::vector<Frame> frames;
};

/// Class-independent visual layout of one episode: lighting, clutter,
/// container placement and where the hand closes.
struct Scene {
    struct Clutter {
        int x0, y0, x1, y1;
        std::array<std::uint8_t, 3> color;
    };
    std::array<std::uint8_t, 3> wall{};
    std::array<std::uint8_t, 3> table{};
    double horizon = 0.55;  // fraction of image height
    double brightness = 1.0;
    double center_x = 0.5;  // fraction of image width
    double base_y = 0.75;   // container bottom, fraction of image height
    double scale = 1.0;
    double grasp_height = 0.5;  // fraction of container height, from the bottom
    std::vector<Clutter> clutter;
};

Scene make_scene(const GeneratorConfig& cfg, std::uint64_t scene_seed);

struct RenderedFrame {
    Image image;
    BoundingBox box;
};

/// Renders one camera frame. lift_phase is 0 when the container is not in
/// the hand and in (0, 1] for progress through the holding interval; the hand
/// occludes the container only while lift_phase > 0. Cans and spam boxes are
/// opaque, so their fill level never changes a pixel.
RenderedFrame render_frame(ContainerClass cls, double fill, double lift_phase, const Scene& scene,
                           const GeneratorConfig& cfg, std::uint64_t frame_seed);

/// Seed of the episode at `index` (class-major order) within a dataset.
std::uint64_t episode_seed(std::uint64_t dataset_seed, std::size_t index);
std::string episode_id(std::size_t index);

Episode generate_episode(ContainerClass cls, const GeneratorConfig& cfg, std::uint64_t seed,
                         std::string id = {});

/// Generates every episode of a dataset in class-major order without keeping
/// more than one episode in memory.
void for_each_episode(const GeneratorConfig& cfg,
                      const std::function<void(std::size_t index, Episode&& episode)>& visit);

}  // namespace mmcf
