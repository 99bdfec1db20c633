#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pollcast/aggregators.hpp"
#include "pollcast/mention_store.hpp"
#include "pollcast/regression.hpp"
#include "pollcast/selection.hpp"

namespace pollcast {

enum class Learner : std::uint8_t { ols, rf };

std::string_view to_string(Learner l);

struct BacktestConfig {
    std::size_t window = 16;
    Learner learner = Learner::ols;
    TargetMode target_mode = TargetMode::absolute;
    FeatureSet feature_set = FeatureSet::all;
    bool include_lagged_self = false;
    SelectionMethod selection = SelectionMethod::none;
    std::size_t k = 3;  // 0 -> ceil(10% of candidate columns)
    std::uint64_t seed = 42;
    Smoothing smoothing = Smoothing::none;
    // One model over all entities per test period; false fits one per entity.
    bool pooled = true;
    ForestParams forest;
    std::size_t threads = 1;
};

struct EntityPrediction {
    std::string entity;
    double prediction = 0.0;
    double actual = 0.0;
    double baseline = 0.0;
};

struct ModelSelection {
    std::string entity;  // empty for the pooled model
    SelectionResult result;
    std::vector<std::string> features;  // names of result.chosen
};

struct PeriodResult {
    std::size_t period_index = 0;
    Date period_start;
    std::vector<EntityPrediction> predictions;
    double mae = 0.0;
    double baseline_mae = 0.0;
    // One entry per fitted model when selection is enabled.
    std::vector<ModelSelection> selections;
    // All candidate columns were constant in the training window, so the
    // training-target mean was predicted.
    bool degenerate = false;
};

struct BacktestReport {
    BacktestConfig config;
    std::vector<std::string> feature_columns;
    std::vector<PeriodResult> periods;
    double global_mae = 0.0;
    double baseline_global_mae = 0.0;
    std::optional<ImportanceReport> importance;
    std::size_t guarded_divisions = 0;
};

// (Σ|f_i − y_i|) / n.
double mae(std::span<const double> forecasts, std::span<const double> actuals);

// Naive forecast: y_{t−1} in absolute mode, Δy_{t−1} in delta mode, scored
// over every poll that has a predecessor.
BacktestReport baseline_lagged(const PollSeries& polls, TargetMode mode);

// Number of test periods the sliding window produces for `table`.
std::size_t test_period_count(const PeriodTable& table, const BacktestConfig& cfg);

BacktestReport run_backtest(const PeriodTable& table, const BacktestConfig& cfg);

}  // namespace pollcast
