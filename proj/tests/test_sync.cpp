#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mmcf/datagen.hpp"
#include "mmcf/rng.hpp"
#include "mmcf/sync.hpp"
#include "support.hpp"

using namespace mmcf;

namespace {

std::size_t scan_nearest(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - t) < std::abs(times[best] - t) - 1e-9) best = i;
    }
    return best;
}

Episode small_episode(ContainerClass cls = ContainerClass::CanFull, std::uint64_t seed = 7) {
    GeneratorConfig cfg;
    cfg.image_size = 32;
    return generate_episode(cls, cfg, seed, "ep_test");
}

template <typename S>
std::vector<double> times_of(const std::vector<S>& v) {
    std::vector<double> t;
    for (const auto& s : v) t.push_back(s.t);
    return t;
}

}  // namespace

TEST(Decimate, KeepsEveryKthFromTheFirst) {
    std::vector<int> xs(23);
    for (int i = 0; i < 23; ++i) xs[i] = i;
    EXPECT_EQ(decimate(xs, 10), (std::vector<int>{0, 10, 20}));
    EXPECT_EQ(decimate(xs, 1), xs);
    EXPECT_TRUE(decimate(std::vector<int>{}, 3).empty());
    EXPECT_THROW(decimate(xs, 0), std::invalid_argument);
}

TEST(NearestIndex, MatchesExhaustiveScan) {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> times(1 + rng.below(40));
        double t = rng.uniform(-1, 1);
        for (double& x : times) {
            t += rng.uniform(0.001, 0.05);
            x = t;
        }
        for (int q = 0; q < 20; ++q) {
            const double query = rng.uniform(times.front() - 0.1, times.back() + 0.1);
            EXPECT_EQ(nearest_index(times, query), scan_nearest(times, query));
        }
    }
}

TEST(NearestIndex, ExactTiesPickTheEarlierSample) {
    std::vector<double> times{0.0, 0.02, 0.04};
    EXPECT_EQ(nearest_index(times, 0.01), 0u);
    EXPECT_EQ(nearest_index(times, 0.03), 1u);
    EXPECT_EQ(nearest_index(times, -5), 0u);
    EXPECT_EQ(nearest_index(times, 5), 2u);
    EXPECT_THROW(nearest_index(std::vector<double>{}, 0.0), std::invalid_argument);
}

TEST(FilterHolding, KeepsTheClosedInterval) {
    Episode ep;
    ep.holding = {1.0, 2.0};
    for (double t : {0.5, 1.0, 1.5, 2.0, 2.5}) {
        ep.tactile.push_back({t, {}});
        ep.proprio.push_back({t, {}});
        Frame f;
        f.t = t;
        ep.frames.push_back(f);
    }
    const auto out = filter_holding(ep);
    EXPECT_EQ(times_of(out.tactile), (std::vector<double>{1.0, 1.5, 2.0}));
    EXPECT_EQ(times_of(out.proprio), (std::vector<double>{1.0, 1.5, 2.0}));
    EXPECT_EQ(times_of(out.frames), (std::vector<double>{1.0, 1.5, 2.0}));
}

TEST(FilterHolding, EmptyIntervalOrStreamIsDegenerate) {
    Episode ep = small_episode();
    Episode bad = ep;
    bad.holding = {3.0, 2.0};
    EXPECT_THROW(filter_holding(bad), DegenerateEpisode);
    Episode gap = ep;
    gap.holding = {100.0, 101.0};
    EXPECT_THROW(filter_holding(gap), DegenerateEpisode);
}

TEST(Align, OneSamplePerLeadFrame) {
    Episode ep = small_episode();
    const auto samples = align(ep.frames, ep.tactile, ep.proprio, ep.label, ep.id);
    ASSERT_EQ(samples.size(), ep.frames.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        EXPECT_EQ(samples[i].t_lead, ep.frames[i].t);
        EXPECT_EQ(samples[i].label, ep.label);
        EXPECT_EQ(samples[i].episode, "ep_test");
    }
    EXPECT_THROW(align(ep.frames, {}, ep.proprio, ep.label), DegenerateEpisode);
    EXPECT_THROW(align(ep.frames, ep.tactile, {}, ep.label), DegenerateEpisode);
}

TEST(Synchronize, OffsetsWithinHalfASamplePeriod) {
    for (std::size_t c = 0; c < kClassCount; ++c) {
        Episode ep = small_episode(class_from_index(c), 100 + c);
        const auto tt = times_of(ep.tactile);
        const auto pt = times_of(ep.proprio);
        for (const auto& s : synchronize(ep, SyncConfig{})) {
            EXPECT_LE(std::abs(s.t_tactile - s.t_lead), 0.010 + 1e-12);
            EXPECT_LE(std::abs(s.t_proprio - s.t_lead), 0.0125 + 1e-12);
            EXPECT_EQ(s.t_tactile, tt[scan_nearest(tt, s.t_lead)]);
            EXPECT_EQ(s.t_proprio, pt[scan_nearest(pt, s.t_lead)]);
        }
    }
}

TEST(Synchronize, DecimatesThenFilters) {
    Episode ep = small_episode();
    const auto samples = synchronize(ep, SyncConfig{});
    const auto expected = filter_holding([&] {
        Episode e = ep;
        e.frames = decimate(e.frames, 10);
        return e;
    }());
    ASSERT_EQ(samples.size(), expected.frames.size());
    for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(samples[i].t_lead, expected.frames[i].t);
    for (const auto& s : samples) {
        EXPECT_GE(s.t_lead, ep.holding.grasp);
        EXPECT_LE(s.t_lead, ep.holding.release);
        EXPECT_GE(s.t_tactile, ep.holding.grasp);
        EXPECT_LE(s.t_proprio, ep.holding.release);
    }
}

TEST(Synchronize, AllFramesKeepsTheWholeEpisode) {
    Episode ep = small_episode();
    SyncConfig cfg;
    cfg.holding_only = false;
    cfg.decimation = 3;
    EXPECT_EQ(synchronize(ep, cfg).size(), (ep.frames.size() + 2) / 3);
    cfg.decimation = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Synchronize, CarriesPixelsAndBoxes) {
    Episode ep = small_episode();
    for (const auto& s : synchronize(ep, SyncConfig{})) {
        EXPECT_FALSE(s.image.empty());
        EXPECT_GT(s.box.area(), 0);
        EXPECT_FALSE(s.frame_file.empty());
    }
}

TEST(SyncedCsv, RoundTripsExactly) {
    test::TempDir dir;
    Episode ep = small_episode();
    const auto samples = synchronize(ep, SyncConfig{});
    write_synced_csv(samples, dir / "synced.csv");
    const auto back = read_synced_csv(dir / "synced.csv");
    ASSERT_EQ(back.size(), samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        EXPECT_EQ(back[i].episode, samples[i].episode);
        EXPECT_EQ(back[i].t_lead, samples[i].t_lead);
        EXPECT_EQ(back[i].frame_file, samples[i].frame_file);
        EXPECT_EQ(back[i].label, samples[i].label);
        EXPECT_EQ(back[i].tactile, samples[i].tactile);
        EXPECT_EQ(back[i].proprio, samples[i].proprio);
        EXPECT_TRUE(back[i].image.empty());
    }
}
