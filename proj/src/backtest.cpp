#include "pollcast/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "pollcast/random.hpp"

namespace pollcast {

std::string_view to_string(Learner l) { return l == Learner::ols ? "ols" : "rf"; }

double mae(std::span<const double> forecasts, std::span<const double> actuals) {
    if (forecasts.size() != actuals.size()) throw DataError("mae: forecast and actual lengths differ");
    if (forecasts.empty()) throw DataError("mae: no forecasts");
    double sum = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) sum += std::abs(forecasts[i] - actuals[i]);
    return sum / static_cast<double>(forecasts.size());
}

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void finish(BacktestReport& report) {
    std::vector<double> maes;
    std::vector<double> base;
    for (const auto& p : report.periods) {
        maes.push_back(p.mae);
        base.push_back(p.baseline_mae);
    }
    if (!maes.empty()) {
        report.global_mae = mean_of(maes);
        report.baseline_global_mae = mean_of(base);
    }
}

}  // namespace

BacktestReport baseline_lagged(const PollSeries& polls, TargetMode mode) {
    const std::size_t first = mode == TargetMode::absolute ? 1 : 2;
    if (polls.size() < first + 1) {
        throw DataError("baseline: need at least " + std::to_string(first + 1) + " polls in " +
                        std::string(to_string(mode)) + " mode");
    }
    BacktestReport report;
    report.config.target_mode = mode;
    report.config.window = 0;
    const auto& entities = polls.entities();
    for (std::size_t t = first; t < polls.size(); ++t) {
        PeriodResult period;
        period.period_index = t - 1;
        period.period_start = polls.snapshots()[t - 1].date;
        std::vector<double> f;
        std::vector<double> y;
        for (std::size_t e = 0; e < entities.size(); ++e) {
            double actual = polls.share(t, e);
            double guess = polls.share(t - 1, e);
            if (mode == TargetMode::delta) {
                actual -= polls.share(t - 1, e);
                guess -= polls.share(t - 2, e);
            }
            period.predictions.push_back({entities[e], guess, actual, guess});
            f.push_back(guess);
            y.push_back(actual);
        }
        period.mae = mae(f, y);
        period.baseline_mae = period.mae;
        report.periods.push_back(std::move(period));
    }
    finish(report);
    return report;
}

std::size_t test_period_count(const PeriodTable& table, const BacktestConfig& cfg) {
    const std::size_t usable = table.period_count() - (cfg.target_mode == TargetMode::delta ? std::min<std::size_t>(1, table.period_count()) : 0);
    return usable > cfg.window ? usable - cfg.window : 0;
}

namespace {

struct ModelOutput {
    std::vector<double> predictions;
    std::optional<ModelSelection> selection;
    std::optional<ImportanceReport> importance;
    bool degenerate = false;
};

Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
        }
    }
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(static_cast<Eigen::Index>(rows[r]));
    return out;
}

bool all_constant(const Eigen::MatrixXd& x) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (x.col(j).maxCoeff() != x.col(j).minCoeff()) return false;
    }
    return true;
}

// Fits one model on `train` rows and predicts `test` rows. Only rows passed in
// are read, which is what keeps future periods out of the fit.
ModelOutput fit_and_predict(const FeatureMatrix& fm, const BacktestConfig& cfg, const std::vector<std::size_t>& train,
                            const std::vector<std::size_t>& test, std::uint64_t seed) {
    ModelOutput out;
    const std::size_t n_candidates = fm.aggregates.size();
    const Eigen::VectorXd y = take(fm.targets, train);

    std::vector<std::size_t> cols(n_candidates);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    if (cfg.selection != SelectionMethod::none) {
        const std::size_t k = cfg.k == 0 ? auto_k(n_candidates) : cfg.k;
        const Eigen::MatrixXd candidates = take(fm.values, train, cols);
        ModelSelection sel;
        sel.result = cfg.selection == SelectionMethod::univariate ? univariate_select(candidates, y, k)
                                                                  : rfe_select(candidates, y, k);
        for (auto c : sel.result.chosen) sel.features.push_back(fm.columns[c]);
        cols = sel.result.chosen;
        std::sort(cols.begin(), cols.end());
        out.selection = std::move(sel);
    }
    if (fm.has_lagged_self) cols.push_back(n_candidates);

    const Eigen::MatrixXd x_train = take(fm.values, train, cols);
    const Eigen::MatrixXd x_test = take(fm.values, test, cols);

    Eigen::VectorXd predicted;
    if (all_constant(x_train)) {
        out.degenerate = true;
        predicted = Eigen::VectorXd::Constant(x_test.rows(), y.mean());
    } else if (cfg.learner == Learner::ols) {
        predicted = ols_predict(ols_fit(x_train, y), x_test);
    } else {
        ForestParams params = cfg.forest;
        params.threads = 1;
        const auto model = forest_fit(x_train, y, params, seed);
        predicted = forest_predict(model, x_test);

        std::vector<std::string> names;
        for (auto c : cols) names.push_back(fm.columns[c]);
        const auto local = forest_importance(model, names);
        ImportanceReport full;
        full.features = fm.columns;
        full.mean.assign(fm.columns.size(), 0.0);
        full.std.assign(fm.columns.size(), 0.0);
        full.model_count = 1;
        full.degenerate = local.degenerate;
        for (std::size_t c = 0; c < cols.size(); ++c) full.mean[cols[c]] = local.mean[c];
        out.importance = std::move(full);
    }
    out.predictions.assign(predicted.data(), predicted.data() + predicted.size());
    return out;
}

}  // namespace

BacktestReport run_backtest(const PeriodTable& table, const BacktestConfig& cfg) {
    if (cfg.window < 1) throw DataError("backtest: window must be at least 1");
    const std::size_t needed = cfg.window + 1 + (cfg.target_mode == TargetMode::delta ? 1 : 0);
    if (table.period_count() < needed) {
        throw DataError("insufficient periods: window " + std::to_string(cfg.window) + " in " +
                        std::string(to_string(cfg.target_mode)) + " mode needs at least " + std::to_string(needed) +
                        " periods, got " + std::to_string(table.period_count()));
    }
    if (!cfg.pooled && cfg.learner == Learner::rf && cfg.window < 2) {
        throw DataError("backtest: per-entity random forests need a window of at least 2");
    }

    const FeatureMatrix fm =
        feature_matrix(table, {cfg.feature_set, cfg.target_mode, cfg.include_lagged_self, cfg.smoothing});
    if (cfg.selection != SelectionMethod::none && cfg.k > fm.aggregates.size()) {
        throw DataError("backtest: k=" + std::to_string(cfg.k) + " exceeds the " + std::to_string(fm.aggregates.size()) +
                        " candidate features");
    }
    const PeriodTable base = cfg.target_mode == TargetMode::delta ? to_deltas(table) : table;
    const std::size_t n_periods = fm.period_count();
    const std::size_t n_tests = n_periods - cfg.window;
    const std::size_t n_entities = table.entity_count();

    BacktestReport report;
    report.config = cfg;
    report.feature_columns = fm.columns;
    report.guarded_divisions = fm.divisions.total();
    report.periods.resize(n_tests);
    std::vector<std::vector<ImportanceReport>> importances(n_tests);

    auto run_one = [&](std::size_t i) {
        const std::size_t t = cfg.window + i;
        std::vector<std::size_t> train;
        for (std::size_t o = t - cfg.window; o < t; ++o) {
            const auto rows = fm.rows_of_period_ordinal(o);
            train.insert(train.end(), rows.begin(), rows.end());
        }
        const auto test = fm.rows_of_period_ordinal(t);

        PeriodResult& period = report.periods[i];
        period.period_index = fm.rows[test.front()].period_index;
        period.period_start = fm.rows[test.front()].period_start;
        period.predictions.resize(n_entities);

        auto record = [&](std::size_t group, const std::vector<std::size_t>& tr, const std::vector<std::size_t>& te,
                          const std::string& entity) {
            const std::uint64_t seed = SplitMix64(cfg.seed, t * (n_entities + 1) + group).next();
            auto out = fit_and_predict(fm, cfg, tr, te, seed);
            for (std::size_t r = 0; r < te.size(); ++r) {
                const auto e = fm.rows[te[r]].entity_index;
                period.predictions[e].prediction = out.predictions[r];
            }
            period.degenerate = period.degenerate || out.degenerate;
            if (out.selection) {
                out.selection->entity = entity;
                period.selections.push_back(std::move(*out.selection));
            }
            if (out.importance) importances[i].push_back(std::move(*out.importance));
        };

        if (cfg.pooled) {
            record(0, train, test, "");
        } else {
            for (std::size_t e = 0; e < n_entities; ++e) {
                std::vector<std::size_t> tr;
                for (auto r : train) {
                    if (fm.rows[r].entity_index == e) tr.push_back(r);
                }
                record(e + 1, tr, {test[e]}, table.entities[e]);
            }
        }

        std::vector<double> f, y, b;
        for (std::size_t e = 0; e < n_entities; ++e) {
            auto& p = period.predictions[e];
            p.entity = table.entities[e];
            p.actual = base.targets[t][e];
            p.baseline = base.lagged[t][e];
            f.push_back(p.prediction);
            y.push_back(p.actual);
            b.push_back(p.baseline);
        }
        period.mae = mae(f, y);
        period.baseline_mae = mae(b, y);
    };

    const std::size_t workers = std::min(std::max<std::size_t>(1, cfg.threads), n_tests);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tests; ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n_tests; i = next++) run_one(i);
            });
        }
    }

    finish(report);
    if (cfg.learner == Learner::rf) {
        std::vector<ImportanceReport> all;
        for (auto& per : importances) {
            for (auto& r : per) all.push_back(std::move(r));
        }
        if (!all.empty()) report.importance = average_importances(all);
    }
    return report;
}

}  // namespace pollcast
