#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pollcast {

class ModelError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least squares on z-scored columns with an intercept. Coefficients live in
// standardized space; raw_slopes()/raw_intercept() map them back.
struct OlsModel {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    Eigen::VectorXd means;
    Eigen::VectorXd stds;  // 0 marks a constant column (coefficient pinned to 0)
    Eigen::Index rank = 0;

    Eigen::Index feature_count() const { return coefficients.size(); }
    Eigen::VectorXd raw_slopes() const;
    double raw_intercept() const;
};

OlsModel ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd ols_predict(const OlsModel& model, const Eigen::MatrixXd& x);

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t max_features = 0;  // 0 -> ceil(sqrt(p))
    std::size_t min_leaf = 1;
    std::size_t max_depth = 0;     // 0 -> unlimited
    bool bootstrap = true;         // false: every tree sees the full sample
    std::size_t threads = 1;

    std::size_t resolved_max_features(std::size_t p) const;
};

struct TreeNode {
    // feature < 0 marks a leaf.
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    double min_target = 0.0;
    double max_target = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    // Unnormalized variance reduction per feature, weighted by node share of
    // the bootstrap sample.
    std::vector<double> importance;
    std::size_t split_count = 0;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    ForestParams params;
    std::uint64_t seed = 0;
    Eigen::Index feature_count = 0;
    double min_target = 0.0;
    double max_target = 0.0;
};

ForestModel forest_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                       std::uint64_t seed);
Eigen::VectorXd forest_predict(const ForestModel& model, const Eigen::MatrixXd& x);

struct ImportanceReport {
    std::vector<std::string> features;
    std::vector<double> mean;
    std::vector<double> std;
    std::size_t model_count = 0;
    // Set when a forest made no split at all; importances are then all zero.
    bool degenerate = false;
};

ImportanceReport forest_importance(const ForestModel& model, const std::vector<std::string>& features);
// Per-feature mean and population standard deviation across models.
ImportanceReport average_importances(const std::vector<ImportanceReport>& reports);

}  // namespace pollcast
