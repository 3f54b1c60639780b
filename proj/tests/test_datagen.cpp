#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "mmcf/datagen.hpp"
#include "mmcf/dataset_io.hpp"
#include "mmcf/rng.hpp"
#include "support.hpp"

using namespace mmcf;

namespace {

GeneratorConfig tiny_config() {
    GeneratorConfig cfg;
    cfg.episodes_per_class = 2;
    cfg.image_size = 32;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST(Rng, DeterministicAndSeedSensitive) {
    Rng a(9), b(9), c(10);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
    }
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

TEST(Rng, DistributionsHaveTheRightMoments) {
    Rng rng(11);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    std::array<int, 5> bins{};
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        ++bins[rng.below(5)];
    }
    EXPECT_NEAR(su / n, 0.5, 0.005);
    EXPECT_NEAR(sn / n, 0.0, 0.01);
    EXPECT_NEAR(sn2 / n, 1.0, 0.02);
    for (int b : bins) EXPECT_NEAR(b, n / 5, n / 100);
}

TEST(Generator, SameSeedSameEpisode) {
    const auto cfg = tiny_config();
    const Episode a = generate_episode(ContainerClass::BottleHalf, cfg, 77, "x");
    const Episode b = generate_episode(ContainerClass::BottleHalf, cfg, 77, "x");
    ASSERT_EQ(a.tactile.size(), b.tactile.size());
    for (std::size_t i = 0; i < a.tactile.size(); ++i) EXPECT_EQ(a.tactile[i].values, b.tactile[i].values);
    for (std::size_t i = 0; i < a.proprio.size(); ++i) EXPECT_EQ(a.proprio[i].values, b.proprio[i].values);
    ASSERT_EQ(a.frames.size(), b.frames.size());
    for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i].image, b.frames[i].image);
    const Episode c = generate_episode(ContainerClass::BottleHalf, cfg, 78, "x");
    EXPECT_NE(a.tactile[100].values, c.tactile[100].values);
}

TEST(Generator, StreamRatesAndShapes) {
    const auto cfg = tiny_config();
    for (ContainerClass cls : kAllClasses) {
        const Episode ep = generate_episode(cls, cfg, 3 + index_of(cls));
        EXPECT_EQ(ep.label, cls);
        EXPECT_EQ(ep.grasp, grasp_for(cls));
        EXPECT_EQ(ep.tactile.size(), std::size_t(cfg.episode_duration * kTactileRate + 0.5));
        EXPECT_EQ(ep.proprio.size(), std::size_t(cfg.episode_duration * kProprioRate + 0.5));
        EXPECT_NEAR(double(ep.frames.size()), cfg.episode_duration * kCameraRate, 1.0);
        EXPECT_LT(ep.holding.grasp, ep.holding.release);
        EXPECT_LE(ep.holding.release, ep.duration);
        for (std::size_t i = 1; i < ep.tactile.size(); ++i) {
            EXPECT_NEAR(ep.tactile[i].t - ep.tactile[i - 1].t, 1.0 / kTactileRate, 1e-9);
        }
        for (std::size_t i = 1; i < ep.frames.size(); ++i) EXPECT_GT(ep.frames[i].t, ep.frames[i - 1].t);
        for (const auto& f : ep.frames) {
            EXPECT_EQ(f.image.width, 32);
            EXPECT_EQ(f.image.height, 32);
            EXPECT_GT(f.box.area(), 0);
            EXPECT_TRUE(f.box.inside(32, 32));
        }
        for (const auto& s : ep.tactile)
            for (float v : s.values) ASSERT_TRUE(std::isfinite(v));
        for (const auto& s : ep.proprio)
            for (float v : s.values) ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(Generator, OpaqueContainersLookTheSameAtAnyFill) {
    const auto cfg = tiny_config();
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const Scene scene = make_scene(cfg, rng.next_u64());
        const std::uint64_t fs = rng.next_u64();
        const double lift = trial % 2 ? rng.uniform(0.01, 1.0) : 0.0;
        const auto ce = render_frame(ContainerClass::CanEmpty, 0.0, lift, scene, cfg, fs);
        const auto cf = render_frame(ContainerClass::CanFull, 1.0, lift, scene, cfg, fs);
        EXPECT_EQ(ce.image, cf.image);
        EXPECT_EQ(ce.box, cf.box);
        const auto se = render_frame(ContainerClass::SpamEmpty, 0.0, lift, scene, cfg, fs);
        const auto sf = render_frame(ContainerClass::SpamFull, 1.0, lift, scene, cfg, fs);
        EXPECT_EQ(se.image, sf.image);
    }
}

TEST(Generator, BottleFillIsVisible) {
    GeneratorConfig cfg = tiny_config();
    cfg.image_size = 64;
    const Scene scene = make_scene(cfg, 99);
    const auto e = render_frame(ContainerClass::BottleEmpty, 0.0, 0.0, scene, cfg, 1);
    const auto f = render_frame(ContainerClass::BottleFull, 1.0, 0.0, scene, cfg, 1);
    EXPECT_NE(e.image, f.image);
}

TEST(Generator, ConfigValidation) {
    GeneratorConfig cfg;
    cfg.episodes_per_class = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.image_size = 48;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.proprio_noise = 1.5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.episode_duration = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_NO_THROW(GeneratorConfig{}.validate());
}

TEST(Generator, ForEachEpisodeIsClassMajor) {
    const auto cfg = tiny_config();
    std::vector<ContainerClass> labels;
    std::vector<std::string> ids;
    for_each_episode(cfg, [&](std::size_t index, Episode&& ep) {
        EXPECT_EQ(index, labels.size());
        labels.push_back(ep.label);
        ids.push_back(ep.id);
    });
    ASSERT_EQ(labels.size(), 14u);
    for (std::size_t i = 0; i < 14; ++i) {
        EXPECT_EQ(labels[i], class_from_index(i / 2));
        EXPECT_EQ(ids[i], episode_id(i));
    }
    EXPECT_EQ(episode_id(7), "ep_00007");
}

TEST(DatasetIo, EpisodeRoundTrip) {
    test::TempDir dir;
    const Episode ep = generate_episode(ContainerClass::SpamFull, tiny_config(), 4, "ep_00001");
    write_episode(ep, dir / "ep_00001");
    const Episode back = read_episode(dir / "ep_00001", true);
    EXPECT_EQ(back.id, ep.id);
    EXPECT_EQ(back.label, ep.label);
    EXPECT_EQ(back.grasp, ep.grasp);
    EXPECT_EQ(back.holding.grasp, ep.holding.grasp);
    EXPECT_EQ(back.holding.release, ep.holding.release);
    ASSERT_EQ(back.tactile.size(), ep.tactile.size());
    for (std::size_t i = 0; i < ep.tactile.size(); ++i) {
        EXPECT_EQ(back.tactile[i].t, ep.tactile[i].t);
        EXPECT_EQ(back.tactile[i].values, ep.tactile[i].values);
    }
    ASSERT_EQ(back.proprio.size(), ep.proprio.size());
    for (std::size_t i = 0; i < ep.proprio.size(); ++i) EXPECT_EQ(back.proprio[i].values, ep.proprio[i].values);
    ASSERT_EQ(back.frames.size(), ep.frames.size());
    for (std::size_t i = 0; i < ep.frames.size(); ++i) {
        EXPECT_EQ(back.frames[i].t, ep.frames[i].t);
        EXPECT_EQ(back.frames[i].box, ep.frames[i].box);
        EXPECT_EQ(back.frames[i].image, ep.frames[i].image);
    }
    EXPECT_TRUE(read_episode(dir / "ep_00001", false).frames.front().image.empty());
}

TEST(DatasetIo, GenerateWritesManifest) {
    test::TempDir dir;
    const auto m = generate_dataset(tiny_config(), dir / "data");
    const auto back = read_manifest(dir / "data");
    EXPECT_EQ(back.episodes, m.episodes);
    EXPECT_EQ(back.config.seed, 5u);
    EXPECT_EQ(back.config.image_size, 32);
    ASSERT_EQ(m.episodes.size(), 14u);
    EXPECT_TRUE(std::filesystem::exists(dir / "data" / "ep_00013" / "tactile.csv"));
}

TEST(DatasetIo, RefusesNonEmptyDirectoryAndLeavesItAlone) {
    test::TempDir dir;
    std::filesystem::create_directories(dir / "data");
    std::ofstream(dir / "data" / "keep.txt") << "x";
    EXPECT_THROW(generate_dataset(tiny_config(), dir / "data"), std::runtime_error);
    EXPECT_EQ(test::list_files(dir / "data"), (std::vector<std::filesystem::path>{"keep.txt"}));
}

TEST(DatasetIo, BadCsvHeaderIsReported) {
    test::TempDir dir;
    const Episode ep = generate_episode(ContainerClass::CanEmpty, tiny_config(), 4, "ep_00000");
    write_episode(ep, dir / "ep");
    std::ofstream(dir / "ep" / "tactile.csv") << "t,bogus\n0,1\n";
    EXPECT_THROW(read_episode(dir / "ep"), std::runtime_error);
}
