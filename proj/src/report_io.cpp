#include "pollcast/report_io.hpp"

#include <cmath>
#include <ostream>

#include "pollcast/csv.hpp"

namespace pollcast {

namespace {

using nlohmann::json;

template <typename Enum, std::size_t N>
Enum parse_enum(const json& j, const std::array<Enum, N>& values, const char* what) {
    const auto text = j.get<std::string>();
    for (auto v : values) {
        if (to_string(v) == text) return v;
    }
    throw DataError(std::string("unknown ") + what + " '" + text + "'");
}

constexpr std::array kLearners = {Learner::ols, Learner::rf};
constexpr std::array kModes = {TargetMode::absolute, TargetMode::delta};
constexpr std::array kSets = {FeatureSet::all, FeatureSet::buzz, FeatureSet::sentiment};
constexpr std::array kSelections = {SelectionMethod::none, SelectionMethod::univariate, SelectionMethod::rfe};

std::string_view smoothing_name(Smoothing s) { return s == Smoothing::none ? "none" : "laplace"; }

Smoothing smoothing_from(const json& j) {
    const auto text = j.get<std::string>();
    if (text == "none") return Smoothing::none;
    if (text == "laplace") return Smoothing::laplace;
    throw DataError("unknown smoothing '" + text + "'");
}

Date date_from(const json& j) {
    Date d;
    if (!parse_date(j.get<std::string>(), d)) throw DataError("bad date in report: " + j.dump());
    return d;
}

}  // namespace

json to_json(const BacktestConfig& cfg) {
    return {
        {"window", cfg.window},
        {"learner", to_string(cfg.learner)},
        {"target_mode", to_string(cfg.target_mode)},
        {"feature_set", to_string(cfg.feature_set)},
        {"lagged_self", cfg.include_lagged_self},
        {"selection", to_string(cfg.selection)},
        {"k", cfg.k},
        {"seed", cfg.seed},
        {"smoothing", smoothing_name(cfg.smoothing)},
        {"pooled", cfg.pooled},
        {"forest",
         {{"n_trees", cfg.forest.n_trees},
          {"max_features", cfg.forest.max_features},
          {"min_leaf", cfg.forest.min_leaf},
          {"max_depth", cfg.forest.max_depth},
          {"bootstrap", cfg.forest.bootstrap}}},
    };
}

BacktestConfig config_from_json(const json& j) {
    BacktestConfig cfg;
    cfg.window = j.at("window").get<std::size_t>();
    cfg.learner = parse_enum(j.at("learner"), kLearners, "learner");
    cfg.target_mode = parse_enum(j.at("target_mode"), kModes, "target mode");
    cfg.feature_set = parse_enum(j.at("feature_set"), kSets, "feature set");
    cfg.include_lagged_self = j.at("lagged_self").get<bool>();
    cfg.selection = parse_enum(j.at("selection"), kSelections, "selection");
    cfg.k = j.at("k").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.smoothing = smoothing_from(j.at("smoothing"));
    cfg.pooled = j.at("pooled").get<bool>();
    const auto& f = j.at("forest");
    cfg.forest.n_trees = f.at("n_trees").get<std::size_t>();
    cfg.forest.max_features = f.at("max_features").get<std::size_t>();
    cfg.forest.min_leaf = f.at("min_leaf").get<std::size_t>();
    cfg.forest.max_depth = f.at("max_depth").get<std::size_t>();
    cfg.forest.bootstrap = f.at("bootstrap").get<bool>();
    return cfg;
}

json to_json(const SelectionResult& s) {
    return {{"method", to_string(s.method)}, {"k", s.k}, {"chosen", s.chosen}, {"scores", s.scores},
            {"degenerate", s.degenerate}};
}

SelectionResult selection_from_json(const json& j) {
    SelectionResult s;
    s.method = parse_enum(j.at("method"), kSelections, "selection");
    s.k = j.at("k").get<std::size_t>();
    s.chosen = j.at("chosen").get<std::vector<std::size_t>>();
    s.scores = j.at("scores").get<std::vector<double>>();
    s.degenerate = j.at("degenerate").get<bool>();
    return s;
}

json to_json(const ImportanceReport& r) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.features.size(); ++i) {
        rows.push_back({{"feature", r.features[i]}, {"mean", r.mean[i]}, {"std", r.std[i]}});
    }
    return {{"model_count", r.model_count}, {"degenerate", r.degenerate}, {"features", rows}};
}

ImportanceReport importance_from_json(const json& j) {
    ImportanceReport r;
    r.model_count = j.at("model_count").get<std::size_t>();
    r.degenerate = j.at("degenerate").get<bool>();
    for (const auto& row : j.at("features")) {
        r.features.push_back(row.at("feature").get<std::string>());
        r.mean.push_back(row.at("mean").get<double>());
        r.std.push_back(row.at("std").get<double>());
    }
    return r;
}

json to_json(const BacktestReport& r) {
    json periods = json::array();
    for (const auto& p : r.periods) {
        json preds = json::array();
        for (const auto& e : p.predictions) {
            preds.push_back(
                {{"entity", e.entity}, {"prediction", e.prediction}, {"actual", e.actual}, {"baseline", e.baseline}});
        }
        json sels = json::array();
        for (const auto& s : p.selections) {
            sels.push_back({{"entity", s.entity}, {"features", s.features}, {"result", to_json(s.result)}});
        }
        periods.push_back({{"period_index", p.period_index},
                           {"period_start", format_date(p.period_start)},
                           {"mae", p.mae},
                           {"baseline_mae", p.baseline_mae},
                           {"degenerate", p.degenerate},
                           {"predictions", preds},
                           {"selections", sels}});
    }
    return {
        {"config", to_json(r.config)},
        {"feature_columns", r.feature_columns},
        {"test_periods", r.periods.size()},
        {"global_mae", r.global_mae},
        {"baseline_global_mae", r.baseline_global_mae},
        {"guarded_divisions", r.guarded_divisions},
        {"importance", r.importance ? to_json(*r.importance) : json(nullptr)},
        {"periods", periods},
    };
}

BacktestReport report_from_json(const json& j) {
    BacktestReport r;
    r.config = config_from_json(j.at("config"));
    r.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    r.global_mae = j.at("global_mae").get<double>();
    r.baseline_global_mae = j.at("baseline_global_mae").get<double>();
    r.guarded_divisions = j.at("guarded_divisions").get<std::size_t>();
    if (!j.at("importance").is_null()) r.importance = importance_from_json(j.at("importance"));
    for (const auto& pj : j.at("periods")) {
        PeriodResult p;
        p.period_index = pj.at("period_index").get<std::size_t>();
        p.period_start = date_from(pj.at("period_start"));
        p.mae = pj.at("mae").get<double>();
        p.baseline_mae = pj.at("baseline_mae").get<double>();
        p.degenerate = pj.at("degenerate").get<bool>();
        for (const auto& e : pj.at("predictions")) {
            p.predictions.push_back({e.at("entity").get<std::string>(), e.at("prediction").get<double>(),
                                     e.at("actual").get<double>(), e.at("baseline").get<double>()});
        }
        for (const auto& s : pj.at("selections")) {
            p.selections.push_back({s.at("entity").get<std::string>(), selection_from_json(s.at("result")),
                                    s.at("features").get<std::vector<std::string>>()});
        }
        r.periods.push_back(std::move(p));
    }
    return r;
}

json model_summary(const OlsModel& m, const std::vector<std::string>& features) {
    json coefs = json::array();
    const auto raw = m.raw_slopes();
    for (Eigen::Index j = 0; j < m.feature_count(); ++j) {
        coefs.push_back({{"feature", features.at(static_cast<std::size_t>(j))},
                         {"standardized", m.coefficients(j)},
                         {"raw", raw(j)},
                         {"mean", m.means(j)},
                         {"std", m.stds(j)}});
    }
    return {{"model", "ols"}, {"intercept", m.intercept}, {"raw_intercept", m.raw_intercept()}, {"rank", m.rank},
            {"coefficients", coefs}};
}

json model_summary(const ForestModel& m, const std::vector<std::string>& features) {
    return {{"model", "rf"},
            {"seed", m.seed},
            {"hyperparameters",
             {{"n_trees", m.params.n_trees},
              {"max_features", m.params.resolved_max_features(static_cast<std::size_t>(m.feature_count))},
              {"min_leaf", m.params.min_leaf},
              {"max_depth", m.params.max_depth},
              {"bootstrap", m.params.bootstrap}}},
            {"importance", to_json(forest_importance(m, features))}};
}

void write_predictions_csv(std::ostream& out, const BacktestReport& r) {
    out << "period,entity,prediction,actual,abs_error\n";
    for (const auto& p : r.periods) {
        for (const auto& e : p.predictions) {
            out << format_date(p.period_start) << ',' << csv::quote_if_needed(e.entity) << ','
                << csv::format_double(e.prediction) << ',' << csv::format_double(e.actual) << ','
                << csv::format_double(std::abs(e.prediction - e.actual)) << '\n';
        }
    }
}

void write_importance_csv(std::ostream& out, const ImportanceReport& r) {
    out << "feature,mean_importance,std\n";
    for (std::size_t i = 0; i < r.features.size(); ++i) {
        out << r.features[i] << ',' << csv::format_double(r.mean[i]) << ',' << csv::format_double(r.std[i]) << '\n';
    }
}

}  // namespace pollcast
