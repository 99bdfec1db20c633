#include "pollcast/regression.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pollcast/random.hpp"

namespace pollcast {
namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
    }
    return m;
}

// Standardization done independently of ols_fit, for the orthogonality check.
Eigen::MatrixXd standardized(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).sum() / static_cast<double>(x.rows());
        double ss = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) z(i, j) = sd > 0 ? (x(i, j) - mean) / sd : 0.0;
    }
    return z;
}

TEST(Ols, ExactLine) {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 2;
    Eigen::VectorXd y(3);
    y << 1, 3, 5;
    const auto m = ols_fit(x, y);
    EXPECT_NEAR(m.raw_intercept(), 1.0, 1e-12);
    EXPECT_NEAR(m.raw_slopes()(0), 2.0, 1e-12);
    EXPECT_LT((ols_predict(m, x) - y).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::MatrixXd three(1, 1);
    three << 3;
    EXPECT_NEAR(ols_predict(m, three)(0), 7.0, 1e-12);
}

TEST(Ols, ConstantTarget) {
    std::mt19937_64 rng(1);
    const auto x = random_matrix(rng, 20, 4);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 4.25);
    const auto m = ols_fit(x, y);
    EXPECT_EQ(m.intercept, 4.25);
    EXPECT_LT(m.coefficients.cwiseAbs().maxCoeff(), 1e-12);
    const auto pred = ols_predict(m, random_matrix(rng, 5, 4));
    EXPECT_LT((pred.array() - 4.25).abs().maxCoeff(), 1e-12);
}

TEST(Ols, ZeroCoefficientModelPredictsIntercept) {
    OlsModel m;
    m.coefficients = Eigen::VectorXd::Zero(3);
    m.means = Eigen::VectorXd::Zero(3);
    m.stds = Eigen::VectorXd::Ones(3);
    m.intercept = -2.5;
    std::mt19937_64 rng(2);
    const auto pred = ols_predict(m, random_matrix(rng, 7, 3));
    EXPECT_TRUE((pred.array() == -2.5).all());
}

TEST(Ols, RecoversPlantedCoefficients) {
    std::mt19937_64 rng(3);
    const auto x = random_matrix(rng, 50, 2);
    const Eigen::VectorXd y = 3.0 * x.col(0) - 2.0 * x.col(1);
    const auto m = ols_fit(x, y);
    EXPECT_NEAR(m.raw_slopes()(0), 3.0, 1e-8);
    EXPECT_NEAR(m.raw_slopes()(1), -2.0, 1e-8);
    EXPECT_NEAR(m.raw_intercept(), 0.0, 1e-8);
    EXPECT_LT((ols_predict(m, x) - y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ols, RankDeficientUsesMinimumNorm) {
    std::mt19937_64 rng(4);
    Eigen::MatrixXd x(30, 3);
    x.leftCols(2) = random_matrix(rng, 30, 2);
    x.col(2) = x.col(0);
    const Eigen::VectorXd y = 2.0 * x.col(0) + x.col(1);
    const auto m = ols_fit(x, y);
    EXPECT_EQ(m.rank, 2);
    // The duplicated direction is split evenly between the two copies.
    EXPECT_NEAR(m.coefficients(0), m.coefficients(2), 1e-10);
    EXPECT_LT((ols_predict(m, x) - y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, ConstantColumnGetsZero) {
    std::mt19937_64 rng(5);
    Eigen::MatrixXd x(25, 2);
    x.col(0) = random_matrix(rng, 25, 1);
    x.col(1).setConstant(7.0);
    const Eigen::VectorXd y = 0.5 * x.col(0).array() + 1.0;
    const auto m = ols_fit(x, y);
    EXPECT_EQ(m.coefficients(1), 0.0);
    EXPECT_EQ(m.stds(1), 0.0);
    EXPECT_NEAR(m.raw_slopes()(0), 0.5, 1e-12);
}

TEST(Ols, Errors) {
    EXPECT_THROW(ols_fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), ModelError);
    EXPECT_THROW(ols_fit(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)), ModelError);
    const auto m = ols_fit(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(3));
    EXPECT_THROW(ols_predict(m, Eigen::MatrixXd::Zero(2, 2)), ModelError);
}

TEST(OlsProperties, ResidualOrthogonalityAndMse) {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> rows(3, 80);
    std::uniform_int_distribution<int> cols(1, 30);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rows(rng);
        const int p = cols(rng);
        auto x = random_matrix(rng, n, p);
        if (trial % 3 == 0 && p > 1) x.col(p - 1) = 2.0 * x.col(0);  // collinear
        if (trial % 5 == 0) x.col(0).setConstant(1.5);
        const Eigen::VectorXd y = random_matrix(rng, n, 1).col(0) * 10.0;
        const auto m = ols_fit(x, y);
        const Eigen::VectorXd resid = y - ols_predict(m, x);
        const double tol = 1e-8 * y.norm();
        EXPECT_LE(std::abs(resid.sum()), tol);
        const auto z = standardized(x);
        for (Eigen::Index j = 0; j < p; ++j) EXPECT_LE(std::abs(z.col(j).dot(resid)), tol) << "trial " << trial;
        const double var = (y.array() - y.mean()).square().mean();
        EXPECT_LE(resid.squaredNorm() / n, var * (1.0 + 1e-12) + 1e-15);
    }
}

TEST(Forest, ConstantTargetIsExact) {
    std::mt19937_64 rng(7);
    const auto x = random_matrix(rng, 40, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 2.75);
    const auto model = forest_fit(x, y, {.n_trees = 10}, 1);
    EXPECT_TRUE((forest_predict(model, random_matrix(rng, 9, 3)).array() == 2.75).all());
    const auto imp = forest_importance(model, {"a", "b", "c"});
    EXPECT_TRUE(imp.degenerate);
    for (double v : imp.mean) EXPECT_EQ(v, 0.0);
}

TEST(Forest, SingleLeafPredictsTrainingMean) {
    std::mt19937_64 rng(8);
    const auto x = random_matrix(rng, 12, 2);
    const Eigen::VectorXd y = random_matrix(rng, 12, 1).col(0);
    ForestParams params{.n_trees = 1, .min_leaf = 12, .bootstrap = false};
    const auto model = forest_fit(x, y, params, 3);
    ASSERT_EQ(model.trees[0].nodes.size(), 1u);
    const auto pred = forest_predict(model, random_matrix(rng, 4, 2));
    for (Eigen::Index i = 0; i < pred.size(); ++i) EXPECT_NEAR(pred(i), y.mean(), 1e-14);
}

struct StepData {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

StepData step_function(std::uint64_t seed, Eigen::Index n) {
    SplitMix64 rng(seed);
    StepData d{Eigen::MatrixXd(n, 1), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        d.x(i, 0) = rng.uniform();
        d.y(i) = d.x(i, 0) > 0.5 ? 1.0 : 0.0;
    }
    return d;
}

TEST(Forest, LearnsStepFunction) {
    const auto train = step_function(1, 100);
    const auto model = forest_fit(train.x, train.y, {}, 11);
    const Eigen::VectorXd pred = forest_predict(model, train.x);
    const double mse = (pred - train.y).squaredNorm() / 100.0;
    const double mean_mse = (train.y.array() - train.y.mean()).square().mean();
    EXPECT_LT(mse, mean_mse);

    const auto held_out = step_function(2, 200);
    const auto out = forest_predict(model, held_out.x);
    EXPECT_GE(out.minCoeff(), 0.0);
    EXPECT_LE(out.maxCoeff(), 1.0);
}

TEST(Forest, DeterministicAcrossRunsAndThreads) {
    std::mt19937_64 rng(9);
    const auto x = random_matrix(rng, 60, 8);
    const Eigen::VectorXd y = x.col(2).array().sin() + 0.3 * x.col(5).array();
    const auto probe = random_matrix(rng, 30, 8);
    ForestParams serial{.n_trees = 40};
    ForestParams parallel{.n_trees = 40, .threads = 4};
    const auto a = forest_predict(forest_fit(x, y, serial, 5), probe);
    const auto b = forest_predict(forest_fit(x, y, serial, 5), probe);
    const auto c = forest_predict(forest_fit(x, y, parallel, 5), probe);
    const auto d = forest_predict(forest_fit(x, y, serial, 6), probe);
    EXPECT_TRUE(a == b);
    EXPECT_TRUE(a == c);
    EXPECT_FALSE(a == d);
}

TEST(ForestProperties, LeavesAndPredictionsStayInRange) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_matrix(rng, 30 + trial, 4);
        const Eigen::VectorXd y = random_matrix(rng, 30 + trial, 1).col(0).array().exp();
        const auto model = forest_fit(x, y, {.n_trees = 15, .min_leaf = 1 + static_cast<std::size_t>(trial % 3)}, trial);
        for (const auto& tree : model.trees) {
            for (const auto& node : tree.nodes) {
                EXPECT_GE(node.value, node.min_target);
                EXPECT_LE(node.value, node.max_target);
                EXPECT_GE(node.min_target, y.minCoeff());
                EXPECT_LE(node.max_target, y.maxCoeff());
            }
        }
        const auto pred = forest_predict(model, random_matrix(rng, 50, 4) * 5.0);
        EXPECT_GE(pred.minCoeff(), y.minCoeff());
        EXPECT_LE(pred.maxCoeff(), y.maxCoeff());

        const auto imp = forest_importance(model, {"a", "b", "c", "d"});
        double sum = 0.0;
        for (double v : imp.mean) {
            EXPECT_GE(v, 0.0);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Forest, Errors) {
    EXPECT_THROW(forest_fit(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), {}, 0), ModelError);
    EXPECT_THROW(forest_fit(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2), {}, 0), ModelError);
    const auto m = forest_fit(Eigen::MatrixXd::Random(5, 2), Eigen::VectorXd::Random(5), {.n_trees = 2}, 0);
    EXPECT_THROW(forest_predict(m, Eigen::MatrixXd::Zero(1, 3)), ModelError);
}

TEST(Importance, PlantedFeatureDominates) {
    std::mt19937_64 rng(12);
    const auto x = random_matrix(rng, 200, 6);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y(i) = x(i, 3) > 0.2 ? 5.0 : -1.0;
    const auto model = forest_fit(x, y, {}, 2);
    const auto imp = forest_importance(model, {"n0", "n1", "n2", "signal", "n4", "n5"});
    EXPECT_GT(imp.mean[3], 0.9);
}

TEST(Importance, SingleFeatureIsOne) {
    const auto d = step_function(3, 50);
    const auto imp = forest_importance(forest_fit(d.x, d.y, {.n_trees = 5}, 1), {"x"});
    ASSERT_EQ(imp.mean.size(), 1u);
    EXPECT_DOUBLE_EQ(imp.mean[0], 1.0);
    EXPECT_FALSE(imp.degenerate);
}

TEST(Importance, AveragingReports) {
    ImportanceReport r{{"a", "b"}, {0.25, 0.75}, {0.0, 0.0}, 1, false};
    const auto same = average_importances({r, r});
    EXPECT_EQ(same.mean, r.mean);
    EXPECT_EQ(same.std, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(same.model_count, 2u);

    ImportanceReport s{{"a", "b"}, {0.75, 0.25}, {0.0, 0.0}, 1, false};
    const auto mixed = average_importances({r, s});
    EXPECT_DOUBLE_EQ(mixed.mean[0], 0.5);
    EXPECT_DOUBLE_EQ(mixed.std[0], 0.25);

    ImportanceReport other{{"a", "c"}, {0.5, 0.5}, {0.0, 0.0}, 1, false};
    EXPECT_THROW(average_importances({r, other}), ModelError);
    EXPECT_THROW(average_importances({}), ModelError);
}

TEST(Random, StreamsAreStable) {
    SplitMix64 a(42, 3), b(42, 3), c(42, 4);
    EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(a.next(), c.next());
    SplitMix64 r(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(r.below(7), 7u);
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

}  // namespace
}  // namespace pollcast
