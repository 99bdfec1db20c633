#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pollcast/mention_store.hpp"

namespace pollcast {

// The 25 sentiment aggregate functions in canonical column order.
enum class AggregateId : std::uint8_t {
    entity_buzz,
    entity_positives,
    entity_neutrals,
    entity_negatives,
    bermingham,
    berminghamsovn,
    berminghamsovp,
    connor,
    gayo,
    polarity,
    polarityONeutral,
    polarityOTotal,
    subjOTotal,
    subjNeuv,
    subjSoV,
    subjVol,
    share,
    shareOfNegDistribution,
    normalized_positive,
    normalized_negative,
    normalized_neutral,
    normalized_bermingham,
    normalized_connor,
    normalized_gayo,
    normalized_polarity,
};

inline constexpr std::size_t kAggregateCount = 25;

std::string_view name(AggregateId id);
std::optional<AggregateId> aggregate_from_name(std::string_view name);
const std::array<AggregateId, kAggregateCount>& all_aggregates();

enum class FeatureSet : std::uint8_t { all, buzz, sentiment };

std::string_view to_string(FeatureSet s);
bool is_buzz_feature(AggregateId id);
std::vector<AggregateId> features_in(FeatureSet s);

enum class Smoothing : std::uint8_t { none, laplace };

using AggregateMap = std::map<AggregateId, double>;

// Records zero denominators hit by guarded divisions, per aggregate.
struct DivisionLog {
    std::array<std::size_t, kAggregateCount> zero_denominators{};

    std::size_t total() const;
    void merge(const DivisionLog& other);
};

// Sums over every entity of one period, plus the sums of per-entity
// normalized rates used by shareOfNegDistribution and normalized_gayo.
struct PeriodTotals {
    std::int64_t total_positives = 0;
    std::int64_t total_negatives = 0;
    std::int64_t total_neutrals = 0;
    std::int64_t total_buzz = 0;
    double sum_positive_rates = 0.0;
    double sum_negative_rates = 0.0;
    std::size_t entity_count = 0;

    static PeriodTotals from(std::span<const PolarityCounts> all_counts);
};

AggregateMap count_features(const PolarityCounts& c);
AggregateMap ratio_features(const PolarityCounts& c, DivisionLog* log = nullptr);
AggregateMap share_features(const PolarityCounts& c, const PeriodTotals& t,
                            std::span<const PolarityCounts> all_counts, DivisionLog* log = nullptr);

using AggregateRow = std::array<double, kAggregateCount>;

// All 25 aggregates of every entity in one period, one row per entity.
std::vector<AggregateRow> period_aggregates(std::span<const PolarityCounts> all_counts, Smoothing smoothing = Smoothing::none,
                                            DivisionLog* log = nullptr);

struct SampleKey {
    std::size_t period_index = 0;
    Date period_start;
    std::size_t entity_index = 0;
    std::string entity;
};

inline constexpr std::string_view kLaggedSelf = "lagged_self";

struct FeatureMatrix {
    std::vector<SampleKey> rows;
    std::vector<std::string> columns;  // aggregate names, then lagged_self when present
    std::vector<AggregateId> aggregates;
    Eigen::MatrixXd values;
    Eigen::VectorXd targets;
    FeatureSet feature_set = FeatureSet::all;
    TargetMode target_mode = TargetMode::absolute;
    bool has_lagged_self = false;
    DivisionLog divisions;

    std::size_t period_count() const;
    // Rows belonging to the given matrix-local period ordinal, in entity order.
    std::vector<std::size_t> rows_of_period_ordinal(std::size_t ordinal) const;
};

struct FeatureOptions {
    FeatureSet feature_set = FeatureSet::all;
    TargetMode target_mode = TargetMode::absolute;
    bool include_lagged_self = false;
    Smoothing smoothing = Smoothing::none;
};

// `table` must be in absolute mode. Delta mode differences every feature and
// the target per entity, dropping the first period.
FeatureMatrix feature_matrix(const PeriodTable& table, const FeatureOptions& opts);

void write_feature_csv(std::ostream& out, const FeatureMatrix& m);

}  // namespace pollcast
