#include "pollcast/aggregators.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pollcast/csv.hpp"

namespace pollcast {

namespace {

constexpr std::array<std::string_view, kAggregateCount> kNames = {
    "entity_buzz",         "entity_positives",       "entity_neutrals",     "entity_negatives",
    "bermingham",          "berminghamsovn",         "berminghamsovp",      "connor",
    "gayo",                "polarity",               "polarityONeutral",    "polarityOTotal",
    "subjOTotal",          "subjNeuv",               "subjSoV",             "subjVol",
    "share",               "shareOfNegDistribution", "normalized_positive", "normalized_negative",
    "normalized_neutral",  "normalized_bermingham",  "normalized_connor",   "normalized_gayo",
    "normalized_polarity",
};

constexpr std::array<AggregateId, kAggregateCount> make_all() {
    std::array<AggregateId, kAggregateCount> ids{};
    for (std::size_t i = 0; i < kAggregateCount; ++i) ids[i] = static_cast<AggregateId>(i);
    return ids;
}

constexpr auto kAll = make_all();

// x / 0 -> 0, noted against `id`.
double guarded(double num, double den, AggregateId id, DivisionLog* log) {
    if (den == 0.0) {
        if (log) ++log->zero_denominators[static_cast<std::size_t>(id)];
        return 0.0;
    }
    return num / den;
}

double as_real(std::int64_t v) { return static_cast<double>(v); }

PolarityCounts smoothed(const PolarityCounts& c, Smoothing s) {
    if (s == Smoothing::none) return c;
    return PolarityCounts::from(c.positives + 1, c.negatives + 1, c.neutrals + 1);
}

}  // namespace

std::string_view name(AggregateId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<AggregateId> aggregate_from_name(std::string_view n) {
    for (std::size_t i = 0; i < kAggregateCount; ++i) {
        if (kNames[i] == n) return static_cast<AggregateId>(i);
    }
    return std::nullopt;
}

const std::array<AggregateId, kAggregateCount>& all_aggregates() { return kAll; }

std::string_view to_string(FeatureSet s) {
    switch (s) {
        case FeatureSet::all: return "all";
        case FeatureSet::buzz: return "buzz";
        case FeatureSet::sentiment: return "sentiment";
    }
    return "all";
}

bool is_buzz_feature(AggregateId id) { return id == AggregateId::entity_buzz || id == AggregateId::share; }

std::vector<AggregateId> features_in(FeatureSet s) {
    std::vector<AggregateId> out;
    for (auto id : kAll) {
        if (s == FeatureSet::all || (s == FeatureSet::buzz) == is_buzz_feature(id)) out.push_back(id);
    }
    return out;
}

std::size_t DivisionLog::total() const {
    std::size_t n = 0;
    for (auto v : zero_denominators) n += v;
    return n;
}

void DivisionLog::merge(const DivisionLog& other) {
    for (std::size_t i = 0; i < kAggregateCount; ++i) zero_denominators[i] += other.zero_denominators[i];
}

PeriodTotals PeriodTotals::from(std::span<const PolarityCounts> all_counts) {
    PeriodTotals t;
    t.entity_count = all_counts.size();
    for (const auto& c : all_counts) {
        t.total_positives += c.positives;
        t.total_negatives += c.negatives;
        t.total_neutrals += c.neutrals;
        t.total_buzz += c.buzz;
        if (c.buzz > 0) {
            t.sum_positive_rates += as_real(c.positives) / as_real(c.buzz);
            t.sum_negative_rates += as_real(c.negatives) / as_real(c.buzz);
        }
    }
    return t;
}

AggregateMap count_features(const PolarityCounts& c) {
    return {
        {AggregateId::entity_buzz, as_real(c.buzz)},
        {AggregateId::entity_positives, as_real(c.positives)},
        {AggregateId::entity_neutrals, as_real(c.neutrals)},
        {AggregateId::entity_negatives, as_real(c.negatives)},
    };
}

AggregateMap ratio_features(const PolarityCounts& c, DivisionLog* log) {
    using A = AggregateId;
    const double pos = as_real(c.positives);
    const double neg = as_real(c.negatives);
    const double neu = as_real(c.neutrals);
    const double buzz = as_real(c.buzz);

    AggregateMap m;
    m[A::bermingham] = std::log10((pos + 1.0) / (neg + 1.0));
    m[A::connor] = guarded(pos, neg, A::connor, log);
    m[A::polarity] = pos - neg;
    m[A::polarityONeutral] = guarded(pos - neg, neu, A::polarityONeutral, log);
    m[A::polarityOTotal] = guarded(pos - neg, buzz, A::polarityOTotal, log);
    m[A::subjVol] = pos + neg;
    m[A::subjOTotal] = guarded(pos + neg, buzz, A::subjOTotal, log);
    m[A::subjNeuv] = guarded(pos + neg, neu, A::subjNeuv, log);

    const double np = guarded(pos, buzz, A::normalized_positive, log);
    const double nn = guarded(neg, buzz, A::normalized_negative, log);
    const double nu = guarded(neu, buzz, A::normalized_neutral, log);
    m[A::normalized_positive] = np;
    m[A::normalized_negative] = nn;
    m[A::normalized_neutral] = nu;
    m[A::normalized_bermingham] = std::log10((np + 1.0) / (nn + 1.0));
    m[A::normalized_connor] = guarded(np, nn, A::normalized_connor, log);
    m[A::normalized_polarity] = np - nn;
    return m;
}

AggregateMap share_features(const PolarityCounts& c, const PeriodTotals& t, std::span<const PolarityCounts> all_counts,
                            DivisionLog* log) {
    using A = AggregateId;
    const double pos = as_real(c.positives);
    const double neg = as_real(c.negatives);
    const double tp = as_real(t.total_positives);
    const double tn = as_real(t.total_negatives);

    AggregateMap m;
    m[A::share] = guarded(as_real(c.buzz), as_real(t.total_buzz), A::share, log);
    m[A::berminghamsovn] = guarded(neg, tn, A::berminghamsovn, log);
    m[A::berminghamsovp] = guarded(pos, tp, A::berminghamsovp, log);
    m[A::subjSoV] = guarded(pos + neg, tp + tn, A::subjSoV, log);
    m[A::gayo] = guarded(pos + (tn - neg), tp + tn, A::gayo, log);

    // Rates of a zero-buzz entity are 0, matching PeriodTotals::from.
    const double own_np = c.buzz > 0 ? pos / as_real(c.buzz) : 0.0;
    const double own_nn = c.buzz > 0 ? neg / as_real(c.buzz) : 0.0;
    double sum_np = 0.0;
    double sum_nn = 0.0;
    double others_nn = 0.0;
    bool own_seen = false;
    for (const auto& other : all_counts) {
        const double np_i = other.buzz > 0 ? as_real(other.positives) / as_real(other.buzz) : 0.0;
        const double nn_i = other.buzz > 0 ? as_real(other.negatives) / as_real(other.buzz) : 0.0;
        sum_np += np_i;
        sum_nn += nn_i;
        // `c` may alias an element of `all_counts`; otherwise subtract its own rate.
        if (!own_seen && &other == &c) {
            own_seen = true;
        } else {
            others_nn += nn_i;
        }
    }
    if (!own_seen) others_nn = sum_nn - own_nn;
    m[A::shareOfNegDistribution] = guarded(own_nn, sum_nn, A::shareOfNegDistribution, log);
    m[A::normalized_gayo] = guarded(own_np + others_nn, sum_np + sum_nn, A::normalized_gayo, log);
    return m;
}

std::vector<AggregateRow> period_aggregates(std::span<const PolarityCounts> raw_counts, Smoothing smoothing,
                                            DivisionLog* log) {
    std::vector<PolarityCounts> counts;
    counts.reserve(raw_counts.size());
    for (const auto& c : raw_counts) counts.push_back(smoothed(c, smoothing));
    const auto totals = PeriodTotals::from(counts);

    std::vector<AggregateRow> rows;
    rows.reserve(counts.size());
    for (const auto& c : counts) {
        AggregateRow row{};
        for (const auto& part : {count_features(c), ratio_features(c, log), share_features(c, totals, counts, log)}) {
            for (const auto& [id, v] : part) row[static_cast<std::size_t>(id)] = v;
        }
        rows.push_back(row);
    }
    return rows;
}

std::size_t FeatureMatrix::period_count() const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == 0 || rows[r].period_index != rows[r - 1].period_index) ++n;
    }
    return n;
}

std::vector<std::size_t> FeatureMatrix::rows_of_period_ordinal(std::size_t ordinal) const {
    std::vector<std::size_t> out;
    std::size_t current = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r > 0 && rows[r].period_index != rows[r - 1].period_index) ++current;
        if (current == ordinal) out.push_back(r);
        if (current > ordinal) break;
    }
    return out;
}

FeatureMatrix feature_matrix(const PeriodTable& table, const FeatureOptions& opts) {
    if (table.mode != TargetMode::absolute) throw DataError("feature_matrix expects an absolute-mode table");
    if (table.period_count() == 0 || table.entity_count() == 0) throw DataError("feature_matrix: empty period table");
    if (opts.target_mode == TargetMode::delta && table.period_count() < 2) {
        throw DataError("cannot differentiate: delta mode needs at least 2 periods");
    }

    FeatureMatrix fm;
    fm.feature_set = opts.feature_set;
    fm.target_mode = opts.target_mode;
    fm.has_lagged_self = opts.include_lagged_self;
    fm.aggregates = features_in(opts.feature_set);
    for (auto id : fm.aggregates) fm.columns.emplace_back(name(id));
    if (opts.include_lagged_self) fm.columns.emplace_back(kLaggedSelf);

    std::vector<std::vector<AggregateRow>> per_period;
    per_period.reserve(table.period_count());
    for (const auto& cells : table.counts) per_period.push_back(period_aggregates(cells, opts.smoothing, &fm.divisions));

    const PeriodTable targets = opts.target_mode == TargetMode::delta ? to_deltas(table) : table;
    const std::size_t first = opts.target_mode == TargetMode::delta ? 1 : 0;
    const std::size_t n_entities = table.entity_count();
    const std::size_t n_rows = (table.period_count() - first) * n_entities;

    fm.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(fm.columns.size()));
    fm.targets.resize(static_cast<Eigen::Index>(n_rows));
    Eigen::Index r = 0;
    for (std::size_t k = first; k < table.period_count(); ++k) {
        for (std::size_t e = 0; e < n_entities; ++e, ++r) {
            fm.rows.push_back({table.periods[k].index, table.periods[k].start, e, table.entities[e]});
            Eigen::Index c = 0;
            for (auto id : fm.aggregates) {
                const auto i = static_cast<std::size_t>(id);
                double v = per_period[k][e][i];
                if (first == 1) v -= per_period[k - 1][e][i];
                fm.values(r, c++) = v;
            }
            if (opts.include_lagged_self) fm.values(r, c) = targets.lagged[k - first][e];
            fm.targets(r) = targets.targets[k - first][e];
        }
    }
    return fm;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m) {
    out << "period_start,entity";
    for (const auto& c : m.columns) out << ',' << c;
    out << ",target\n";
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        out << format_date(m.rows[r].period_start) << ',' << csv::quote_if_needed(m.rows[r].entity);
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) out << ',' << csv::format_double(m.values(row, c));
        out << ',' << csv::format_double(m.targets(row)) << '\n';
    }
}

}  // namespace pollcast
