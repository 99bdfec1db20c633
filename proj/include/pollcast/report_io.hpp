#pragma once

#include <iosfwd>

#include <json.hpp>

#include "pollcast/backtest.hpp"
#include "pollcast/regression.hpp"

namespace pollcast {

// The thread count is an execution detail and is not part of the echo, so
// reports are byte-identical for any --threads value.
nlohmann::json to_json(const BacktestConfig& cfg);
BacktestConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectionResult& s);
SelectionResult selection_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ImportanceReport& r);
ImportanceReport importance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BacktestReport& r);
BacktestReport report_from_json(const nlohmann::json& j);

nlohmann::json model_summary(const OlsModel& m, const std::vector<std::string>& features);
nlohmann::json model_summary(const ForestModel& m, const std::vector<std::string>& features);

// `period,entity,prediction,actual,abs_error`
void write_predictions_csv(std::ostream& out, const BacktestReport& r);
// `feature,mean_importance,std`
void write_importance_csv(std::ostream& out, const ImportanceReport& r);

}  // namespace pollcast
