#include "pollcast/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pollcast/regression.hpp"

namespace pollcast {

namespace {

void check_k(std::size_t k, Eigen::Index p, const char* who) {
    if (k == 0) throw ModelError(std::string(who) + ": k must be at least 1");
    if (k > static_cast<std::size_t>(p)) {
        throw ModelError(std::string(who) + ": k=" + std::to_string(k) + " exceeds the " + std::to_string(p) +
                         " available columns");
    }
}

// Relative tolerance under which two |coefficients| count as tied.
constexpr double kTieTolerance = 1e-9;

}  // namespace

std::string_view to_string(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::none: return "none";
        case SelectionMethod::univariate: return "univariate";
        case SelectionMethod::rfe: return "rfe";
    }
    return "none";
}

std::size_t auto_k(std::size_t p) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(p) - 1e-12)));
}

std::vector<double> correlation_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw ModelError("correlation_scores: row count does not match target length");
    std::vector<double> scores(static_cast<std::size_t>(x.cols()), 0.0);
    if (x.rows() == 0) return scores;
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double syy = yc.squaredNorm();
    if (!(syy > 0.0)) return scores;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (x.col(j).maxCoeff() == x.col(j).minCoeff()) continue;
        const Eigen::VectorXd xc = x.col(j).array() - x.col(j).mean();
        const double sxx = xc.squaredNorm();
        if (!(sxx > 0.0)) continue;
        const double sxy = xc.dot(yc);
        scores[static_cast<std::size_t>(j)] = std::min(1.0, sxy * sxy / (sxx * syy));
    }
    return scores;
}

SelectionResult univariate_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k) {
    check_k(k, x.cols(), "univariate_select");
    SelectionResult result;
    result.method = SelectionMethod::univariate;
    result.k = k;
    result.scores = correlation_scores(x, y);
    result.degenerate = std::all_of(result.scores.begin(), result.scores.end(), [](double s) { return s == 0.0; });

    std::vector<std::size_t> order(result.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return result.scores[a] > result.scores[b]; });
    result.chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    return result;
}

SelectionResult rfe_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::size_t k) {
    check_k(k, x.cols(), "rfe_select");
    const auto p = static_cast<std::size_t>(x.cols());
    SelectionResult result;
    result.method = SelectionMethod::rfe;
    result.k = k;
    result.scores.assign(p, 1.0);

    std::vector<std::size_t> alive(p);
    std::iota(alive.begin(), alive.end(), std::size_t{0});
    double rank = static_cast<double>(p - k + 1);
    Eigen::VectorXd weights;

    auto fit_alive = [&] {
        Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(alive.size()));
        for (std::size_t c = 0; c < alive.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(alive[c]));
        weights = ols_fit(sub, y).coefficients.cwiseAbs();
    };

    while (alive.size() > k) {
        fit_alive();
        // Weakest column; among near-ties the later one in column order goes.
        std::size_t drop = 0;
        for (std::size_t c = 1; c < alive.size(); ++c) {
            const double w = weights(static_cast<Eigen::Index>(c));
            const double cur = weights(static_cast<Eigen::Index>(drop));
            if (w <= cur + kTieTolerance * std::max(w, cur)) drop = c;
        }
        result.scores[alive[drop]] = rank;
        rank -= 1.0;
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(drop));
    }

    fit_alive();
    std::vector<std::size_t> order(alive.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return weights(static_cast<Eigen::Index>(a)) > weights(static_cast<Eigen::Index>(b));
    });
    for (auto o : order) result.chosen.push_back(alive[o]);
    return result;
}

}  // namespace pollcast
