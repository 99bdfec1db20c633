#include "pollcast/selection.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "pollcast/regression.hpp"

namespace pollcast {
namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
    }
    return m;
}

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
}

TEST(AutoK, TenPercentRoundedUp) {
    EXPECT_EQ(auto_k(1), 1u);
    EXPECT_EQ(auto_k(10), 1u);
    EXPECT_EQ(auto_k(11), 2u);
    EXPECT_EQ(auto_k(23), 3u);
    EXPECT_EQ(auto_k(25), 3u);
}

TEST(Univariate, PicksCopyOfTarget) {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd x = gaussian(rng, 40, 5);
    const Eigen::VectorXd y = gaussian(rng, 40, 1).col(0);
    x.col(3) = y;
    const auto r = univariate_select(x, y, 1);
    ASSERT_EQ(r.chosen.size(), 1u);
    EXPECT_EQ(r.chosen[0], 3u);
    EXPECT_NEAR(r.scores[3], 1.0, 1e-12);
    EXPECT_FALSE(r.degenerate);
}

TEST(Univariate, NegativeCorrelationCountsToo) {
    std::mt19937_64 rng(2);
    Eigen::MatrixXd x = gaussian(rng, 30, 4);
    const Eigen::VectorXd y = gaussian(rng, 30, 1).col(0);
    x.col(1) = -4.0 * y.array() + 2.0;
    EXPECT_EQ(univariate_select(x, y, 1).chosen[0], 1u);
}

TEST(Univariate, ConstantColumnsAreDegenerate) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(10, 4, 3.0);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0, 9);
    const auto r = univariate_select(x, y, 2);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.chosen, (std::vector<std::size_t>{0, 1}));
    for (double s : r.scores) EXPECT_EQ(s, 0.0);
}

TEST(Univariate, KEqualsPKeepsEverything) {
    std::mt19937_64 rng(3);
    const auto x = gaussian(rng, 20, 6);
    const Eigen::VectorXd y = gaussian(rng, 20, 1).col(0);
    EXPECT_EQ(sorted(univariate_select(x, y, 6).chosen), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(sorted(rfe_select(x, y, 6).chosen), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Selection, KOutOfRangeThrows) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Random(10);
    EXPECT_THROW(univariate_select(x, y, 0), ModelError);
    EXPECT_THROW(univariate_select(x, y, 4), ModelError);
    EXPECT_THROW(rfe_select(x, y, 0), ModelError);
    EXPECT_THROW(rfe_select(x, y, 4), ModelError);
}

TEST(Rfe, RecoversPlantedPair) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = gaussian(rng, 60, 10);
        const Eigen::VectorXd y = 2.0 * x.col(1) - 3.0 * x.col(6);
        const auto r = rfe_select(x, y, 2);
        EXPECT_EQ(sorted(r.chosen), (std::vector<std::size_t>{1, 6})) << "seed " << seed;
        EXPECT_EQ(r.scores[1], 1.0);
        EXPECT_EQ(r.scores[6], 1.0);
        // Eight columns dropped: ranks 2..9 each appear once.
        auto ranks = r.scores;
        std::sort(ranks.begin(), ranks.end());
        EXPECT_EQ(ranks.back(), 9.0);
    }
}

TEST(Univariate, RecoversPlantedPair) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(100 + seed);
        const auto x = gaussian(rng, 200, 10);
        const Eigen::VectorXd y = 2.0 * x.col(2) - 3.0 * x.col(7);
        EXPECT_EQ(sorted(univariate_select(x, y, 2).chosen), (std::vector<std::size_t>{2, 7})) << "seed " << seed;
    }
}

TEST(Rfe, DuplicateColumnsKeepOne) {
    std::mt19937_64 rng(4);
    Eigen::MatrixXd x = gaussian(rng, 50, 5);
    x.col(4) = x.col(0);
    const Eigen::VectorXd y = x.col(0) + 0.1 * x.col(2);
    const auto r = rfe_select(x, y, 1);
    ASSERT_EQ(r.chosen.size(), 1u);
    EXPECT_TRUE(r.chosen[0] == 0 || r.chosen[0] == 4);
    // The copies share the signal evenly, so a noise column goes first.
    const auto r4 = rfe_select(x, y, 4);
    EXPECT_TRUE(r4.scores[1] == 2.0 || r4.scores[3] == 2.0);
}

TEST(Selection, InvariantUnderPositiveAffineMaps) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> scale(0.5, 20.0);
    std::uniform_real_distribution<double> shift(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = gaussian(rng, 40, 8);
        const Eigen::VectorXd y = x.col(trial % 8) + 0.5 * x.col((trial + 3) % 8) + 0.2 * gaussian(rng, 40, 1).col(0);
        Eigen::MatrixXd mapped = x;
        for (Eigen::Index j = 0; j < 8; ++j) mapped.col(j) = scale(rng) * x.col(j).array() + shift(rng);
        EXPECT_EQ(sorted(univariate_select(x, y, 3).chosen), sorted(univariate_select(mapped, y, 3).chosen));
        EXPECT_EQ(sorted(rfe_select(x, y, 3).chosen), sorted(rfe_select(mapped, y, 3).chosen));
    }
}

TEST(Selection, ChosenIndicesAreDistinctAndInRange) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index p = 1 + trial % 12;
        const auto x = gaussian(rng, 25, p);
        const Eigen::VectorXd y = gaussian(rng, 25, 1).col(0);
        const std::size_t k = 1 + static_cast<std::size_t>(trial) % static_cast<std::size_t>(p);
        for (const auto& r : {univariate_select(x, y, k), rfe_select(x, y, k)}) {
            ASSERT_EQ(r.chosen.size(), k);
            ASSERT_EQ(r.scores.size(), static_cast<std::size_t>(p));
            auto s = sorted(r.chosen);
            EXPECT_TRUE(std::adjacent_find(s.begin(), s.end()) == s.end());
            EXPECT_LT(s.back(), static_cast<std::size_t>(p));
        }
    }
}

}  // namespace
}  // namespace pollcast
