#include "pollcast/regression.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "pollcast/random.hpp"

namespace pollcast {

Eigen::VectorXd OlsModel::raw_slopes() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(coefficients.size());
    for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
        if (stds(j) > 0.0) out(j) = coefficients(j) / stds(j);
    }
    return out;
}

double OlsModel::raw_intercept() const {
    double b = intercept;
    for (Eigen::Index j = 0; j < coefficients.size(); ++j) {
        if (stds(j) > 0.0) b -= coefficients(j) * means(j) / stds(j);
    }
    return b;
}

OlsModel ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() == 0 || y.size() == 0) throw ModelError("ols_fit: empty matrix");
    if (x.rows() != y.size()) throw ModelError("ols_fit: row count does not match target length");

    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    OlsModel m;
    m.coefficients = Eigen::VectorXd::Zero(p);
    m.means = x.colwise().mean().transpose();
    m.stds = Eigen::VectorXd::Zero(p);
    m.intercept = y.mean();

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (x.col(j).maxCoeff() == x.col(j).minCoeff()) continue;
        const double sd = std::sqrt((x.col(j).array() - m.means(j)).square().sum() / static_cast<double>(n));
        if (sd > 0.0 && std::isfinite(sd)) {
            m.stds(j) = sd;
            active.push_back(j);
        }
    }
    if (active.empty()) return m;

    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
        const auto j = active[k];
        z.col(static_cast<Eigen::Index>(k)) = (x.col(j).array() - m.means(j)) / m.stds(j);
    }
    const Eigen::VectorXd centered = y.array() - m.intercept;
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(z);
    const Eigen::VectorXd beta = cod.solve(centered);
    m.rank = cod.rank();
    for (std::size_t k = 0; k < active.size(); ++k) m.coefficients(active[k]) = beta(static_cast<Eigen::Index>(k));
    return m;
}

Eigen::VectorXd ols_predict(const OlsModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.feature_count()) throw ModelError("ols_predict: column count does not match the fitted model");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), model.intercept);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (model.stds(j) > 0.0) {
            out.array() += model.coefficients(j) * (x.col(j).array() - model.means(j)) / model.stds(j);
        }
    }
    return out;
}

std::size_t ForestParams::resolved_max_features(std::size_t p) const {
    if (p == 0) return 0;
    if (max_features == 0) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p)))));
    }
    return std::min(max_features, p);
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(row(n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

namespace {

struct SplitCandidate {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double child_sse = 0.0;
    std::size_t left_count = 0;
};

class TreeBuilder {
  public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params, SplitMix64 rng)
        : x_(x), y_(y), params_(params), rng_(rng), max_features_(params.resolved_max_features(static_cast<std::size_t>(x.cols()))) {}

    RegressionTree build() {
        const auto n = static_cast<std::size_t>(x_.rows());
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i) sample[i] = params_.bootstrap ? rng_.below(n) : i;
        total_ = static_cast<double>(n);
        tree_.importance.assign(static_cast<std::size_t>(x_.cols()), 0.0);
        grow(std::move(sample), 0);
        return std::move(tree_);
    }

  private:
    std::int32_t grow(std::vector<std::size_t> idx, std::size_t depth) {
        const auto node_id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        double sum = 0.0;
        double lo = y_(static_cast<Eigen::Index>(idx.front()));
        double hi = lo;
        for (auto i : idx) {
            const double v = y_(static_cast<Eigen::Index>(i));
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double mean = sum / static_cast<double>(idx.size());
        {
            auto& node = tree_.nodes[static_cast<std::size_t>(node_id)];
            node.value = std::clamp(mean, lo, hi);
            node.min_target = lo;
            node.max_target = hi;
        }

        const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        if (lo == hi || idx.size() < 2 * params_.min_leaf || depth_capped) return node_id;

        double parent_sse = 0.0;
        for (auto i : idx) {
            const double d = y_(static_cast<Eigen::Index>(i)) - mean;
            parent_sse += d * d;
        }

        const auto best = find_split(idx, mean);
        if (best.feature < 0 || !(best.child_sse < parent_sse)) return node_id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        left.reserve(best.left_count);
        right.reserve(idx.size() - best.left_count);
        for (auto i : idx) {
            (x_(static_cast<Eigen::Index>(i), best.feature) <= best.threshold ? left : right).push_back(i);
        }
        tree_.importance[static_cast<std::size_t>(best.feature)] += (parent_sse - best.child_sse) / total_;
        ++tree_.split_count;
        idx.clear();
        idx.shrink_to_fit();

        const auto l = grow(std::move(left), depth + 1);
        const auto r = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }

    // Draws candidate columns without replacement. The first max_features are
    // always evaluated; further columns are tried only while no valid split
    // has been found.
    SplitCandidate find_split(const std::vector<std::size_t>& idx, double mean) {
        const auto p = static_cast<std::size_t>(x_.cols());
        std::vector<std::size_t> order(p);
        std::iota(order.begin(), order.end(), std::size_t{0});

        SplitCandidate best;
        for (std::size_t drawn = 0; drawn < p; ++drawn) {
            if (drawn >= max_features_ && best.feature >= 0) break;
            const auto pick = drawn + rng_.below(p - drawn);
            std::swap(order[drawn], order[pick]);
            evaluate(order[drawn], idx, mean, best);
        }
        return best;
    }

    void evaluate(std::size_t feature, const std::vector<std::size_t>& idx, double mean, SplitCandidate& best) {
        const auto col = static_cast<Eigen::Index>(feature);
        pairs_.clear();
        for (auto i : idx) {
            const auto r = static_cast<Eigen::Index>(i);
            pairs_.emplace_back(x_(r, col), y_(r) - mean);
        }
        std::sort(pairs_.begin(), pairs_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (pairs_.front().first == pairs_.back().first) return;

        const std::size_t m = pairs_.size();
        double total_sum = 0.0;
        double total_sq = 0.0;
        for (const auto& [_, v] : pairs_) {
            total_sum += v;
            total_sq += v * v;
        }
        double left_sum = 0.0;
        double left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            left_sum += pairs_[i].second;
            left_sq += pairs_[i].second * pairs_[i].second;
            const std::size_t nl = i + 1;
            const std::size_t nr = m - nl;
            if (nl < params_.min_leaf) continue;
            if (nr < params_.min_leaf) break;
            if (pairs_[i].first == pairs_[i + 1].first) continue;
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = std::max(0.0, left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                               std::max(0.0, right_sq - right_sum * right_sum / static_cast<double>(nr));
            if (best.feature < 0 || sse < best.child_sse) {
                double threshold = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
                if (!(threshold < pairs_[i + 1].first)) threshold = pairs_[i].first;
                best = {static_cast<std::int32_t>(feature), threshold, sse, nl};
            }
        }
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    const ForestParams& params_;
    SplitMix64 rng_;
    std::size_t max_features_;
    double total_ = 0.0;
    RegressionTree tree_;
    std::vector<std::pair<double, double>> pairs_;
};

}  // namespace

ForestModel forest_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                       std::uint64_t seed) {
    if (x.rows() < 2) throw ModelError("forest_fit: need at least 2 rows");
    if (x.rows() != y.size()) throw ModelError("forest_fit: row count does not match target length");
    if (x.cols() == 0) throw ModelError("forest_fit: no feature columns");
    if (params.n_trees == 0) throw ModelError("forest_fit: n_trees must be positive");
    if (params.min_leaf == 0) throw ModelError("forest_fit: min_leaf must be positive");

    ForestModel model;
    model.params = params;
    model.seed = seed;
    model.feature_count = x.cols();
    model.min_target = y.minCoeff();
    model.max_target = y.maxCoeff();
    model.trees.resize(params.n_trees);

    auto build = [&](std::size_t t) { model.trees[t] = TreeBuilder(x, y, params, SplitMix64(seed, t)).build(); };

    const std::size_t workers = std::min(std::max<std::size_t>(1, params.threads), params.n_trees);
    if (workers == 1) {
        for (std::size_t t = 0; t < params.n_trees; ++t) build(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < params.n_trees; t = next++) build(t);
            });
        }
    }
    return model;
}

Eigen::VectorXd forest_predict(const ForestModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.feature_count) throw ModelError("forest_predict: column count does not match the fitted model");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double sum = 0.0;
        for (const auto& tree : model.trees) sum += tree.predict(x.row(r));
        out(r) = std::clamp(sum / static_cast<double>(model.trees.size()), model.min_target, model.max_target);
    }
    return out;
}

ImportanceReport forest_importance(const ForestModel& model, const std::vector<std::string>& features) {
    const auto p = static_cast<std::size_t>(model.feature_count);
    if (features.size() != p) throw ModelError("forest_importance: feature name count does not match the model");
    ImportanceReport report;
    report.features = features;
    report.mean.assign(p, 0.0);
    report.std.assign(p, 0.0);
    report.model_count = 1;

    std::size_t contributing = 0;
    for (const auto& tree : model.trees) {
        const double total = std::accumulate(tree.importance.begin(), tree.importance.end(), 0.0);
        if (tree.split_count == 0 || !(total > 0.0)) continue;
        ++contributing;
        for (std::size_t j = 0; j < p; ++j) report.mean[j] += tree.importance[j] / total;
    }
    if (contributing == 0) {
        report.degenerate = true;
        return report;
    }
    const double sum = std::accumulate(report.mean.begin(), report.mean.end(), 0.0);
    for (auto& v : report.mean) v /= sum;
    return report;
}

ImportanceReport average_importances(const std::vector<ImportanceReport>& reports) {
    if (reports.empty()) throw ModelError("average_importances: no reports");
    ImportanceReport out;
    out.features = reports.front().features;
    const std::size_t p = out.features.size();
    out.mean.assign(p, 0.0);
    out.std.assign(p, 0.0);
    out.model_count = reports.size();
    out.degenerate = true;
    for (const auto& r : reports) {
        if (r.features != out.features) throw ModelError("average_importances: reports cover different features");
        out.degenerate = out.degenerate && r.degenerate;
        for (std::size_t j = 0; j < p; ++j) out.mean[j] += r.mean[j];
    }
    const double n = static_cast<double>(reports.size());
    for (auto& v : out.mean) v /= n;
    for (const auto& r : reports) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = r.mean[j] - out.mean[j];
            out.std[j] += d * d;
        }
    }
    for (auto& v : out.std) v = std::sqrt(v / n);
    return out;
}

}  // namespace pollcast
