#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "mmcf/eval.hpp"
#include "mmcf/fusion.hpp"
#include "mmcf/rng.hpp"

using namespace mmcf;

namespace {

ClassScores peaked_at(std::size_t c, Rng& rng) {
    ClassScores s;
    for (float& v : s) v = static_cast<float>(rng.uniform(0.0, 0.5));
    s[c] = static_cast<float>(rng.uniform(0.6, 1.0));
    return s;
}

ClassScores random_scores(Rng& rng) {
    ClassScores s;
    for (float& v : s) v = static_cast<float>(rng.uniform());
    return s;
}

// Majority over three labels by counting, the definition hard voting follows.
Vote majority_oracle(std::size_t a, std::size_t b, std::size_t c) {
    std::array<int, kClassCount> count{};
    ++count[a];
    ++count[b];
    ++count[c];
    for (std::size_t k = 0; k < kClassCount; ++k) {
        if (count[k] >= 2) return class_from_index(k);
    }
    return std::nullopt;
}

std::size_t first_max(const ClassScores& s) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] > s[best]) best = i;
    }
    return best;
}

}  // namespace

TEST(Argmax, TiesGoToTheLowestIndex) {
    std::array<float, 4> s{0.2f, 0.7f, 0.7f, 0.1f};
    EXPECT_EQ(argmax(s), 1u);
    std::array<float, 3> flat{0.5f, 0.5f, 0.5f};
    EXPECT_EQ(argmax(flat), 0u);
    EXPECT_THROW(argmax(std::span<const float>()), std::invalid_argument);
}

TEST(HardVote, EnumeratesAll343ArgmaxTriples) {
    Rng rng(1);
    std::size_t undecided = 0, decided = 0;
    for (std::size_t a = 0; a < kClassCount; ++a)
        for (std::size_t b = 0; b < kClassCount; ++b)
            for (std::size_t c = 0; c < kClassCount; ++c) {
                const Vote got = hard_vote(peaked_at(a, rng), peaked_at(b, rng), peaked_at(c, rng));
                EXPECT_EQ(got, majority_oracle(a, b, c)) << a << b << c;
                (got ? decided : undecided) += 1;
            }
    EXPECT_EQ(undecided, 210u);
    EXPECT_EQ(decided, 133u);
}

TEST(HardVote, AgreesWithOracleOnRandomScores) {
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const auto v = random_scores(rng), t = random_scores(rng), p = random_scores(rng);
        EXPECT_EQ(hard_vote(v, t, p), majority_oracle(first_max(v), first_max(t), first_max(p)));
    }
}

TEST(SoftVote, AgreesWithSumThenArgmax) {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const std::array<ClassScores, 3> in{random_scores(rng), random_scores(rng), random_scores(rng)};
        ClassScores total{};
        for (const auto& s : in) {
            for (std::size_t k = 0; k < kClassCount; ++k) total[k] += s[k];
        }
        EXPECT_EQ(index_of(soft_vote(in[0], in[1], in[2])), first_max(total));
    }
}

TEST(SoftVote, ConfidentMinorityCanWin) {
    ClassScores v{}, t{}, p{};
    v[0] = 0.51f;
    t[0] = 0.51f;
    p[3] = 0.99f;
    v[3] = 0.5f;
    t[3] = 0.5f;
    EXPECT_EQ(hard_vote(v, t, p), ContainerClass::BottleEmpty);
    EXPECT_EQ(soft_vote(v, t, p), ContainerClass::SpamEmpty);
}

TEST(Voting, EquivariantUnderClassPermutation) {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        std::array<std::size_t, kClassCount> perm;
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(perm));
        const auto v = random_scores(rng), t = random_scores(rng), p = random_scores(rng);
        auto permute = [&](const ClassScores& s) {
            ClassScores o;
            for (std::size_t k = 0; k < kClassCount; ++k) o[perm[k]] = s[k];
            return o;
        };
        EXPECT_EQ(perm[index_of(soft_vote(v, t, p))], index_of(soft_vote(permute(v), permute(t), permute(p))));
        const Vote h = hard_vote(v, t, p);
        const Vote hp = hard_vote(permute(v), permute(t), permute(p));
        ASSERT_EQ(h.has_value(), hp.has_value());
        if (h) {
            EXPECT_EQ(perm[index_of(*h)], index_of(*hp));
        }
    }
}

TEST(Renormalize, SumsToOneAndKeepsRatios) {
    ClassScores s{0.1f, 0.2f, 0.3f, 0.0f, 0.4f, 0.0f, 0.0f};
    auto r = renormalize(s);
    EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-6);
    EXPECT_NEAR(r[2] / r[0], 3.0, 1e-5);
    auto u = renormalize(ClassScores{});
    for (float v : u) EXPECT_FLOAT_EQ(v, 1.0f / 7);
}

TEST(MidFuseInput, ConcatenatesVisionTactileProprio) {
    Rng rng(5);
    const auto v = random_scores(rng), t = random_scores(rng), p = random_scores(rng);
    const auto x = mid_fuse_input(v, t, p);
    for (std::size_t k = 0; k < kClassCount; ++k) {
        EXPECT_EQ(x[k], v[k]);
        EXPECT_EQ(x[7 + k], t[k]);
        EXPECT_EQ(x[14 + k], p[k]);
    }
}

TEST(SensorFuseInput, TactileFirstAndWidthsChecked) {
    std::vector<float> tac(15), pro(69);
    std::iota(tac.begin(), tac.end(), 0.0f);
    std::iota(pro.begin(), pro.end(), 100.0f);
    Tensor<float> img({3, 4, 4}, 0.5f);
    auto in = sensor_fuse_input(img, tac, pro);
    EXPECT_EQ(in.image, img);
    EXPECT_EQ(in.dense[14], 14.0f);
    EXPECT_EQ(in.dense[15], 100.0f);
    EXPECT_EQ(in.dense[83], 168.0f);
    std::vector<float> short_tac(14);
    EXPECT_THROW(sensor_fuse_input(img, short_tac, pro), std::invalid_argument);
    std::vector<float> long_pro(70);
    EXPECT_THROW(sensor_fuse_input(img, tac, long_pro), std::invalid_argument);
}

TEST(Confusion, UndecidedIsCountedButNeverCorrect) {
    ConfusionMatrix m;
    m.add(ContainerClass::CanFull, ContainerClass::CanFull);
    m.add(ContainerClass::CanFull, std::nullopt);
    m.add(ContainerClass::CanFull, ContainerClass::CanEmpty);
    m.add(ContainerClass::BottleHalf, ContainerClass::BottleHalf);
    EXPECT_EQ(m.total(), 4u);
    EXPECT_EQ(m.correct(), 2u);
    EXPECT_EQ(m.undecided(), 1u);
    EXPECT_EQ(m.at(6, kUndecidedColumn), 1u);
    EXPECT_EQ(m.row_sum(6), 3u);
    EXPECT_DOUBLE_EQ(m.accuracy(), 0.5);
    EXPECT_DOUBLE_EQ(m.class_accuracy(6), 1.0 / 3);
    EXPECT_TRUE(std::isnan(m.class_accuracy(0)));
    EXPECT_THROW(ConfusionMatrix{}.accuracy(), std::domain_error);
}

TEST(Evaluate, RejectsEmptyOrMismatchedInput) {
    std::vector<Vote> votes{ContainerClass::BottleEmpty};
    std::vector<ContainerClass> truth{ContainerClass::BottleEmpty, ContainerClass::SpamFull};
    EXPECT_THROW(evaluate(votes, truth), std::invalid_argument);
    EXPECT_THROW(evaluate(std::vector<Vote>{}, std::vector<ContainerClass>{}), std::invalid_argument);
    truth.pop_back();
    auto e = evaluate(votes, truth);
    EXPECT_DOUBLE_EQ(e.accuracy, 1.0);
}

TEST(Evaluate, PredictorFormMatchesListForm) {
    Rng rng(6);
    std::vector<ContainerClass> truth;
    std::vector<Vote> votes;
    for (int i = 0; i < 200; ++i) {
        truth.push_back(class_from_index(rng.below(7)));
        const std::size_t k = rng.below(8);
        votes.push_back(k == 7 ? Vote{} : Vote{class_from_index(k)});
    }
    auto a = evaluate(votes, truth);
    auto b = evaluate([&](std::size_t i) { return votes[i]; }, truth);
    EXPECT_EQ(a.matrix, b.matrix);
    EXPECT_EQ(a.accuracy, b.accuracy);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += votes[i] == truth[i];
    EXPECT_DOUBLE_EQ(a.accuracy, double(hits) / truth.size());
}

TEST(Aggregate, MatchesTwoPassSampleStd) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs(2 + rng.below(20));
        for (double& x : xs) x = rng.uniform(0.3, 0.99);
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= xs.size();
        double ss = 0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (xs.size() - 1));
        auto a = aggregate(xs);
        EXPECT_NEAR(a.mean, mean, 1e-12);
        EXPECT_NEAR(a.std, sd, 1e-12);
        EXPECT_FALSE(a.single_run);
    }
}

TEST(Aggregate, SingleRunAndEmpty) {
    std::vector<double> one{0.8};
    auto a = aggregate(one);
    EXPECT_EQ(a.mean, 0.8);
    EXPECT_EQ(a.std, 0.0);
    EXPECT_TRUE(a.single_run);
    EXPECT_THROW(aggregate(std::vector<double>{}), std::invalid_argument);
    std::vector<double> same(5, 0.42);
    EXPECT_EQ(aggregate(same).std, 0.0);
}
