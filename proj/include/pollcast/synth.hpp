#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pollcast/aggregators.hpp"
#include "pollcast/mention_store.hpp"

namespace pollcast {

struct EntityProfile {
    std::string name;
    double positive_rate = 0.01;  // at zero latent sentiment
    double negative_rate = 0.5;
    double initial_share = 20.0;  // percentage points
    double volume = 1.0;          // multiplier on mentions_per_period
};

// Five profiles whose polarity rates follow the reference per-party counts
// (negatives dominate, positives mostly < 1%).
std::vector<EntityProfile> default_profiles();

struct ScenarioSpec {
    std::vector<EntityProfile> entities = default_profiles();
    std::size_t n_periods = 28;
    double mentions_per_period = 1000.0;
    // Latent sentiment: l_k = reversion * l_{k-1} + latent_step * N(0, 1).
    double latent_step = 0.25;
    double latent_reversion = 0.9;
    // Poll delta = coupling * (planted aggregate delta) + noise_sd * N(0, 1).
    double coupling = 2.0;
    double noise_sd = 0.1;
    AggregateId planted = AggregateId::bermingham;
    Date start = Date{std::chrono::year{2011} / std::chrono::June / 1};
    std::uint64_t seed = 1;

    void validate() const;
};

struct ScenarioTruth {
    std::vector<std::vector<double>> latent;          // [period][entity]
    std::vector<std::vector<double>> positive_rate;   // [period][entity]
    std::vector<std::vector<double>> negative_rate;   // [period][entity]
    std::vector<std::vector<double>> planted_value;   // [period][entity]
    std::vector<std::vector<PolarityCounts>> counts;  // [period][entity]
    double coupling = 0.0;
    double noise_sd = 0.0;
    AggregateId planted = AggregateId::bermingham;
};

struct Scenario {
    std::vector<MentionRecord> mentions;
    PollSeries polls;
    ScenarioTruth truth;
};

Scenario generate_scenario(const ScenarioSpec& spec);

nlohmann::json to_json(const ScenarioSpec& spec);
nlohmann::json to_json(const ScenarioTruth& truth, const std::vector<std::string>& entities);

}  // namespace pollcast
