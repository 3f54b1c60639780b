#include "mmcf/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "mmcf/rng.hpp"

namespace mmcf {

namespace {

constexpr double kGravity = 9.81;

// Timeline of an episode, seconds. Holding is [kGrasp, kRelease].
constexpr double kGrasp = 2.0;
constexpr double kRelease = 6.0;
constexpr double kReachStart = 0.3;
constexpr double kReachEnd = 1.6;
constexpr double kContactRamp = 0.4;  // grip builds over this span before grasp
constexpr double kRetractEnd = 7.7;

constexpr double kLiftHeight = 0.10;  // metres
constexpr double kSwayWidth = 0.05;

enum Stream : std::uint64_t { kSceneStream = 1, kTactileStream, kProprioStream, kFrameStream, kEpisodeStream };

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
double smoothstep(double v) {
    v = clamp01(v);
    return v * v * (3 - 2 * v);
}

// Height profile of the lifted container for progress p through holding.
double lift_profile(double p) {
    if (p <= 0 || p >= 1) return 0;
    return smoothstep(4 * p) * smoothstep(4 * (1 - p));
}

double lift_phase_at(double t) {
    if (t < kGrasp || t > kRelease) return 0;
    return std::max((t - kGrasp) / (kRelease - kGrasp), 1e-9);
}

// Container pose relative to its resting place, metres.
struct Pose {
    double z = 0;
    double x = 0;
};

Pose pose_at(double t) {
    const double p = lift_phase_at(t);
    const double h = lift_profile(p);
    return {kLiftHeight * h, kSwayWidth * std::sin(4 * std::numbers::pi * p) * h};
}

Pose acceleration_at(double t) {
    constexpr double dt = 1e-3;
    const Pose a = pose_at(t - dt), b = pose_at(t), c = pose_at(t + dt);
    return {(a.z - 2 * b.z + c.z) / (dt * dt), (a.x - 2 * b.x + c.x) / (dt * dt)};
}

// Grip closure in [0, 1]: ramps in before grasp and out after release.
double grip_at(double t) {
    if (t < kGrasp - kContactRamp) return 0;
    if (t < kGrasp) return smoothstep((t - (kGrasp - kContactRamp)) / kContactRamp);
    if (t <= kRelease) return 1;
    return 1 - smoothstep((t - kRelease) / kContactRamp);
}

double reach_at(double t) {
    if (t < kReachStart) return 0;
    if (t < kReachEnd) return smoothstep((t - kReachStart) / (kReachEnd - kReachStart));
    if (t <= kRelease + 0.2) return 1;
    return 1 - smoothstep((t - kRelease - 0.2) / (kRetractEnd - kRelease - 0.2));
}

// Relative contact strength per finger (thumb first) for each container.
// The short can leaves the outer fingers nearly free; the bottle and the boxy
// spam tin spread the grip over all five in much the same way.
constexpr std::array<double, kFingerCount> kContactBottle = {1.0, 0.85, 0.80, 0.60, 0.30};
constexpr std::array<double, kFingerCount> kContactCan = {1.0, 1.00, 0.55, 0.15, 0.02};
constexpr std::array<double, kFingerCount> kContactSpam = {1.0, 0.80, 0.75, 0.60, 0.35};

const std::array<double, kFingerCount>& contact_pattern(Container c) {
    switch (c) {
        case Container::Bottle: return kContactBottle;
        case Container::Can: return kContactCan;
        case Container::Spam: return kContactSpam;
    }
    return kContactBottle;
}

double grip_force(Container c) {
    switch (c) {
        case Container::Bottle: return 3.6;
        case Container::Can: return 5.0;
        case Container::Spam: return 3.4;
    }
    return 3.6;
}

// Where on the container the hand closes, metres above the table.
double grasp_height_m(Container c) {
    switch (c) {
        case Container::Bottle: return 0.12;
        case Container::Can: return 0.06;
        case Container::Spam: return 0.08;
    }
    return 0.1;
}

double hand_closure(Container c) {
    switch (c) {
        case Container::Bottle: return 0.85;
        case Container::Can: return 0.75;
        case Container::Spam: return 0.62;
    }
    return 0.8;
}

constexpr std::size_t kArmJoints = 8;
constexpr std::array<double, kArmJoints> kArmHome = {0.0, -0.3, 1.2, 0.0, 0.4, 0.0, 0.0, 0.0};
constexpr std::array<double, kArmJoints> kArmSide = {0.35, 0.45, 0.9, -0.2, 0.1, 0.3, 0.0, 0.2};
constexpr std::array<double, kArmJoints> kArmTop = {0.30, 0.60, 1.1, 0.9, -0.6, -0.2, 0.4, -0.1};
constexpr std::array<double, kArmJoints> kHeightGain = {0.0, -0.8, 0.5, 0.0, 0.3, 0.0, 0.0, 0.0};
constexpr std::array<double, kArmJoints> kLiftGain = {0.0, -1.5, 0.9, 0.0, 0.6, 0.0, 0.0, 0.0};
constexpr std::array<double, kArmJoints> kSwayGain = {2.0, 0.0, 0.0, 0.5, 0.0, 0.8, 0.0, 0.0};
// Effort per kilogram of load and the arm's own gravity torque scale.
constexpr std::array<double, kArmJoints> kLoadEffort = {0.0, 1.2, 0.8, 0.0, 0.4, 0.0, 0.05, 0.0};
constexpr std::array<double, kArmJoints> kArmEffort = {0.0, 2.0, 1.0, 0.0, 0.3, 0.0, 0.0, 0.0};
constexpr std::array<double, 3> kFingerJointShape = {0.5, 1.0, 0.7};

using Rgb = std::array<double, 3>;

Rgb random_color(Rng& rng, double lo, double hi) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

std::array<std::uint8_t, 3> to_bytes(const Rgb& c) {
    return {static_cast<std::uint8_t>(std::clamp(std::lround(c[0]), 0L, 255L)),
            static_cast<std::uint8_t>(std::clamp(std::lround(c[1]), 0L, 255L)),
            static_cast<std::uint8_t>(std::clamp(std::lround(c[2]), 0L, 255L))};
}

// Working canvas in doubles so blending does not accumulate rounding.
struct Canvas {
    int w, h;
    std::vector<double> px;
    Canvas(int w_, int h_) : w(w_), h(h_), px(static_cast<std::size_t>(w_) * h_ * 3, 0.0) {}
    double* at(int x, int y) { return &px[(static_cast<std::size_t>(y) * w + x) * 3]; }
    void set(int x, int y, const Rgb& c) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        double* p = at(x, y);
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
    }
    void blend(int x, int y, const Rgb& c, double alpha) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        double* p = at(x, y);
        for (int k = 0; k < 3; ++k) p[k] = p[k] * (1 - alpha) + c[k] * alpha;
    }
};

// Physical sizes (metres) and the pixel scale of the resting container.
struct ContainerGeometry {
    double width_frac;
    double height_frac;
};

ContainerGeometry geometry(Container c) {
    switch (c) {
        case Container::Bottle: return {0.13, 0.42};
        case Container::Can: return {0.20, 0.26};
        case Container::Spam: return {0.30, 0.18};
    }
    return {0.2, 0.2};
}

}  // namespace

void GeneratorConfig::validate() const {
    if (episodes_per_class == 0) throw std::invalid_argument("episodes_per_class must be positive");
    if (!(episode_duration >= kRelease + 1.0)) {
        throw std::invalid_argument("episode_duration must be at least " + std::to_string(kRelease + 1.0) + " s");
    }
    if (image_size != 32 && image_size != 64 && image_size != 128 && image_size != 256) {
        throw std::invalid_argument("image_size must be one of 32, 64, 128, 256");
    }
    for (double knob : {occlusion_strength, transparency_noise, proprio_noise, grasp_jitter}) {
        if (!(knob >= 0 && knob <= 1)) throw std::invalid_argument("difficulty knobs must lie in [0, 1]");
    }
}

Scene make_scene(const GeneratorConfig& cfg, std::uint64_t scene_seed) {
    Rng rng(scene_seed);
    Scene s;
    s.wall = to_bytes(random_color(rng, 150, 210));
    const double wood = rng.uniform(110, 160);
    s.table = to_bytes({wood, wood * 0.8, wood * 0.6});
    s.horizon = rng.uniform(0.45, 0.6);
    s.brightness = rng.uniform(0.85, 1.15);
    s.center_x = rng.uniform(0.35, 0.65);
    s.base_y = rng.uniform(0.72, 0.82);
    s.scale = rng.uniform(0.92, 1.08);
    s.grasp_height = rng.uniform(0.35, 0.65);
    const int size = cfg.image_size;
    const std::size_t count = 3 + rng.below(4);
    for (std::size_t i = 0; i < count; ++i) {
        Scene::Clutter c{};
        const int cw = static_cast<int>(rng.uniform(0.06, 0.2) * size);
        const int ch = static_cast<int>(rng.uniform(0.06, 0.2) * size);
        c.x0 = static_cast<int>(rng.uniform(0, 1) * (size - cw));
        c.y0 = static_cast<int>(rng.uniform(0.3, 1) * (size - ch));
        c.x1 = c.x0 + std::max(cw, 1);
        c.y1 = c.y0 + std::max(ch, 1);
        c.color = to_bytes(random_color(rng, 40, 230));
        s.clutter.push_back(c);
    }
    return s;
}

RenderedFrame render_frame(ContainerClass cls, double fill, double lift_phase, const Scene& scene,
                           const GeneratorConfig& cfg, std::uint64_t frame_seed) {
    Rng rng(frame_seed);
    const int size = cfg.image_size;
    const double sz = static_cast<double>(size);
    Canvas cv(size, size);

    // wall, table, clutter
    const int horizon = static_cast<int>(scene.horizon * sz);
    for (int y = 0; y < size; ++y) {
        const bool wall = y < horizon;
        const auto& base = wall ? scene.wall : scene.table;
        const double shade = wall ? 1.0 - 0.15 * y / sz : 0.85 + 0.15 * (y - horizon) / sz;
        for (int x = 0; x < size; ++x) {
            cv.set(x, y, {base[0] * shade, base[1] * shade, base[2] * shade});
        }
    }
    for (const auto& c : scene.clutter) {
        for (int y = c.y0; y < c.y1; ++y) {
            for (int x = c.x0; x < c.x1; ++x) cv.set(x, y, {double(c.color[0]), double(c.color[1]), double(c.color[2])});
        }
    }

    const Container container = container_of(cls);
    const ContainerGeometry geo = geometry(container);
    const double holding = lift_phase > 0 ? 1.0 : 0.0;
    const double lift = lift_profile(lift_phase);
    const double sway = std::sin(4 * std::numbers::pi * lift_phase) * lift;

    const int cw = std::max(3, static_cast<int>(std::lround(geo.width_frac * scene.scale * sz)));
    const int ch = std::max(4, static_cast<int>(std::lround(geo.height_frac * scene.scale * sz)));
    const double cx = scene.center_x * sz + sway * 0.05 * sz;
    const int x0 = std::clamp(static_cast<int>(std::lround(cx - cw / 2.0)), 0, size - cw);
    const int y1 = std::clamp(static_cast<int>(std::lround(scene.base_y * sz - lift * 0.12 * sz)), ch, size);
    const int y0 = y1 - ch;
    const int x1 = x0 + cw;

    // Silhouette rows: bottles have a narrower neck and a cap.
    auto row_span = [&](int y) -> std::pair<int, int> {
        if (container != Container::Bottle) return {x0, x1};
        const double from_top = (y - y0 + 0.5) / ch;
        if (from_top < 0.22) {
            const int neck = std::max(2, static_cast<int>(std::lround(cw * 0.55)));
            const int nx0 = x0 + (cw - neck) / 2;
            return {nx0, nx0 + neck};
        }
        return {x0, x1};
    };

    switch (container) {
        case Container::Bottle: {
            const Rgb plastic = {215, 235, 245};
            const Rgb edge = {110, 130, 145};
            const Rgb cap = {30, 60, 160};
            const Rgb water = {40, 90, 200};
            const double alpha = 0.38 * (1.0 - cfg.transparency_noise * rng.uniform());
            const double surface = fill * 0.9;  // water height, fraction of container height
            for (int y = y0; y < y1; ++y) {
                const auto [sx0, sx1] = row_span(y);
                const double from_bottom = (y1 - y - 0.5) / ch;
                const double from_top = (y - y0 + 0.5) / ch;
                for (int x = sx0; x < sx1; ++x) {
                    if (from_top < 0.07) {
                        cv.set(x, y, cap);
                        continue;
                    }
                    cv.blend(x, y, plastic, 0.3);
                    if (fill > 0 && from_bottom < surface) cv.blend(x, y, water, alpha);
                    if (x == sx0 || x == sx1 - 1) cv.blend(x, y, edge, 0.6);
                }
                if (fill > 0 && std::abs(from_bottom - surface) < 0.5 / ch) {
                    for (int x = sx0 + 1; x < sx1 - 1; ++x) cv.blend(x, y, {235, 245, 255}, alpha);
                }
            }
            break;
        }
        case Container::Can: {
            const Rgb label = {185, 35, 30};
            const Rgb metal = {175, 175, 180};
            for (int y = y0; y < y1; ++y) {
                const double from_top = (y - y0 + 0.5) / ch;
                for (int x = x0; x < x1; ++x) {
                    const double u = (x - x0 + 0.5) / cw * 2 - 1;
                    const double shade = 0.55 + 0.45 * std::sqrt(std::max(0.0, 1 - u * u));
                    const Rgb& base = (from_top < 0.1 || from_top > 0.92) ? metal : label;
                    cv.set(x, y, {base[0] * shade, base[1] * shade, base[2] * shade});
                }
            }
            break;
        }
        case Container::Spam: {
            const Rgb body = {30, 55, 150};
            const Rgb band = {235, 200, 40};
            for (int y = y0; y < y1; ++y) {
                const double from_top = (y - y0 + 0.5) / ch;
                for (int x = x0; x < x1; ++x) {
                    const bool in_band = from_top > 0.45 && from_top < 0.7;
                    cv.set(x, y, in_band ? band : body);
                }
            }
            break;
        }
    }

    // Robot hand while the container is held.
    if (holding > 0) {
        const Rgb hand = {228, 226, 220};
        const Rgb seam = {150, 150, 150};
        int hy0, hy1, hx0, hx1;
        if (grasp_for(cls) == GraspType::Side) {
            const double band = cfg.occlusion_strength * 0.5 * ch;
            // A squeezed plastic bottle slips further down through the fingers
            // the heavier it is; the rigid can does not.
            const double sag = container == Container::Bottle ? 0.5 * mass_grams(cls) / 1000.0 : 0.0;
            const double centre = y1 - (scene.grasp_height + sag) * ch;
            hy0 = static_cast<int>(std::lround(centre - band / 2));
            hy1 = static_cast<int>(std::lround(centre + band / 2));
            hx0 = x0 - static_cast<int>(0.3 * cw);
            hx1 = x1 + static_cast<int>(0.9 * cw);
        } else {
            hy0 = y0 - static_cast<int>(0.3 * ch);
            hy1 = y0 + static_cast<int>(cfg.occlusion_strength * 0.4 * ch);
            hx0 = x0 - static_cast<int>(0.05 * cw);
            hx1 = x1 + static_cast<int>(0.05 * cw);
        }
        for (int y = hy0; y < hy1; ++y) {
            for (int x = hx0; x < hx1; ++x) cv.set(x, y, ((x - hx0) % 4 == 3) ? seam : hand);
        }
    }

    Image img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double* p = cv.at(x, y);
            for (int k = 0; k < 3; ++k) {
                const double v = p[k] * scene.brightness + rng.normal(0.0, 3.0);
                img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return {std::move(img), BoundingBox{x0, y0, x1, y1}};
}

std::uint64_t episode_seed(std::uint64_t dataset_seed, std::size_t index) {
    return derive_seed(dataset_seed, kEpisodeStream * 1000003ULL + index);
}

std::string episode_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ep_%05zu", index);
    return buf;
}

Episode generate_episode(ContainerClass cls, const GeneratorConfig& cfg, std::uint64_t seed, std::string id) {
    cfg.validate();
    const Container container = container_of(cls);
    const double jitter = cfg.grasp_jitter;

    Episode ep;
    ep.id = std::move(id);
    ep.label = cls;
    ep.grasp = grasp_for(cls);
    ep.duration = cfg.episode_duration;
    ep.holding = {kGrasp, kRelease};

    Rng episode_rng(derive_seed(seed, kEpisodeStream));
    const double mass = mass_grams(cls) / 1000.0 * (1.0 + 0.04 * episode_rng.normal());

    // ---- tactile ---------------------------------------------------------
    {
        Rng rng(derive_seed(seed, kTactileStream));
        const auto& base = contact_pattern(container);
        std::array<double, kFingerCount> contact{};
        double contact_sum = 0;
        for (std::size_t f = 0; f < kFingerCount; ++f) {
            contact[f] = std::max(0.02, base[f] + 0.25 * jitter * rng.normal());
            contact_sum += contact[f];
        }
        const double grip = grip_force(container) * (1.0 + 0.15 * jitter * rng.normal());
        // A top grasp pinches the box by its sides; only part of the load shows
        // up as fingertip shear.
        const bool top = ep.grasp == GraspType::Top;
        const double load_share = top ? 0.75 * (1.0 + 0.1 * rng.normal()) : 1.0;
        std::array<double, kTactileWidth> bias{};
        for (auto& b : bias) b = 0.1 * jitter * rng.normal();
        // Start offsets below half a period keep every camera frame within half a
        // period of some tactile and joint sample, even at the stream edges.
        const double phase = rng.uniform(0.0, 0.5 / kTactileRate);
        const auto count = static_cast<std::size_t>(std::llround(cfg.episode_duration * kTactileRate));
        ep.tactile.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            TactileSample s;
            s.t = phase + static_cast<double>(i) / kTactileRate;
            const double g = grip_at(s.t);
            const double held = lift_phase_at(s.t) > 0 ? 1.0 : 0.0;
            const Pose acc = acceleration_at(s.t);
            const double load_z = held * mass * (kGravity + acc.z);
            const double load_x = held * mass * acc.x;
            const double share_noise = load_share * (top ? 1.0 + 0.1 * rng.normal() : 1.0);
            const double shear_sigma = 0.1;
            for (std::size_t f = 0; f < kFingerCount; ++f) {
                const double share = contact[f] / contact_sum;
                const double fx = load_x * share + bias[3 * f] * g + rng.normal(0.0, 0.08);
                const double fy = load_z * share * share_noise + bias[3 * f + 1] * g + rng.normal(0.0, shear_sigma) * g;
                const double fz = g * (grip * contact[f] + 0.3 * load_z * share * share_noise) + bias[3 * f + 2] * g +
                                  rng.normal(0.0, 0.08);
                s.values[3 * f] = static_cast<float>(fx);
                s.values[3 * f + 1] = static_cast<float>(fy);
                s.values[3 * f + 2] = static_cast<float>(fz);
            }
            ep.tactile.push_back(s);
        }
    }

    // ---- proprioception --------------------------------------------------
    {
        Rng rng(derive_seed(seed, kProprioStream));
        const auto& target = ep.grasp == GraspType::Top ? kArmTop : kArmSide;
        const double height = grasp_height_m(container);
        std::array<double, kArmJoints> reach_pose{};
        for (std::size_t j = 0; j < kArmJoints; ++j) {
            reach_pose[j] = target[j] + kHeightGain[j] * height + 0.06 * jitter * rng.normal();
        }
        const double closure = hand_closure(container) + 0.06 * jitter * rng.normal();
        const auto& contact = contact_pattern(container);
        const double grip = grip_force(container);
        std::array<double, kJointCount> hand_offset{};
        for (auto& o : hand_offset) o = 0.02 * jitter * rng.normal();
        std::array<double, kJointCount> effort_bias{};
        const double noise = cfg.proprio_noise;
        for (auto& b : effort_bias) b = 0.08 * noise * rng.normal();

        auto positions = [&](double t) {
            std::array<double, kJointCount> q{};
            const double r = reach_at(t);
            const Pose pose = pose_at(t);
            for (std::size_t j = 0; j < kArmJoints; ++j) {
                q[j] = kArmHome[j] + (reach_pose[j] - kArmHome[j]) * r + kLiftGain[j] * pose.z +
                       kSwayGain[j] * pose.x;
            }
            const double g = grip_at(t);
            for (std::size_t f = 0; f < kFingerCount; ++f) {
                for (std::size_t k = 0; k < 3; ++k) {
                    const std::size_t j = kArmJoints + 3 * f + k;
                    q[j] = (kFingerJointShape[k] * closure + hand_offset[j]) * g;
                }
            }
            return q;
        };

        const double phase = rng.uniform(0.0, 0.5 / kProprioRate);
        const auto count = static_cast<std::size_t>(std::llround(cfg.episode_duration * kProprioRate));
        constexpr double dt = 1e-3;
        ep.proprio.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            ProprioSample s;
            s.t = phase + static_cast<double>(i) / kProprioRate;
            const auto q = positions(s.t);
            const auto q_prev = positions(s.t - dt);
            const auto q_next = positions(s.t + dt);
            const double held = lift_phase_at(s.t) > 0 ? 1.0 : 0.0;
            const Pose acc = acceleration_at(s.t);
            const double load = held * mass * (1.0 + acc.z / kGravity);
            const double g = grip_at(s.t);
            for (std::size_t j = 0; j < kJointCount; ++j) {
                const double vel = (q_next[j] - q_prev[j]) / (2 * dt) + rng.normal(0.0, 0.02 * (1 + noise));
                double eff;
                if (j < kArmJoints) {
                    eff = kArmEffort[j] * std::cos(q[1] + (j >= 2 ? q[2] : 0.0)) + kLoadEffort[j] * load;
                } else {
                    const std::size_t f = (j - kArmJoints) / 3;
                    eff = 0.2 * grip * contact[f] * g;
                }
                eff += effort_bias[j] + rng.normal(0.0, 0.45 * noise);
                s.values[3 * j] = static_cast<float>(q[j] + rng.normal(0.0, 0.005 + 0.03 * noise));
                s.values[3 * j + 1] = static_cast<float>(vel);
                s.values[3 * j + 2] = static_cast<float>(eff);
            }
            ep.proprio.push_back(s);
        }
    }

    // ---- camera ----------------------------------------------------------
    {
        Rng rng(derive_seed(seed, kFrameStream));
        const Scene scene = make_scene(cfg, derive_seed(seed, kSceneStream));
        const double phase = rng.uniform(0.0, 1.0 / kCameraRate);
        const double fill = fill_fraction(cls);
        const std::uint64_t frame_base = rng.next_u64();
        for (std::size_t i = 0;; ++i) {
            const double t = phase + static_cast<double>(i) / kCameraRate;
            if (t > cfg.episode_duration - 0.5 / kProprioRate) break;
            auto rendered = render_frame(cls, fill, lift_phase_at(t), scene, cfg, derive_seed(frame_base, i));
            Frame fr;
            fr.t = t;
            fr.box = rendered.box;
            char name[32];
            std::snprintf(name, sizeof name, "frames/%04zu.ppm", i);
            fr.file = name;
            fr.image = std::move(rendered.image);
            ep.frames.push_back(std::move(fr));
        }
    }
    return ep;
}

void for_each_episode(const GeneratorConfig& cfg,
                      const std::function<void(std::size_t index, Episode&& episode)>& visit) {
    cfg.validate();
    std::size_t index = 0;
    for (ContainerClass cls : kAllClasses) {
        for (std::size_t e = 0; e < cfg.episodes_per_class; ++e, ++index) {
            visit(index, generate_episode(cls, cfg, episode_seed(cfg.seed, index), episode_id(index)));
        }
    }
}

}  // namespace mmcf
