#include "pollcast/synth.hpp"

#include <algorithm>
#include <cmath>

#include "pollcast/random.hpp"

namespace pollcast {

std::vector<EntityProfile> default_profiles() {
    // {name, positives/total, negatives/total, opening share}
    return {
        {"PSD", 121.0 / 106977.0, 69723.0 / 106977.0, 36.0, 1.0},
        {"PS", 225.0 / 44211.0, 28660.0 / 44211.0, 30.0, 1.0},
        {"CDS", 51.0 / 59540.0, 41935.0 / 59540.0, 12.0, 1.0},
        {"CDU", 79.0 / 8128.0, 2445.0 / 8128.0, 10.0, 1.0},
        {"BE", 306.0 / 14123.0, 9603.0 / 14123.0, 7.0, 1.0},
    };
}

void ScenarioSpec::validate() const {
    if (entities.empty()) throw DataError("scenario: at least one entity required");
    if (n_periods < 1) throw DataError("scenario: n_periods must be at least 1");
    if (!(mentions_per_period >= 0.0) || !std::isfinite(mentions_per_period)) {
        throw DataError("scenario: mentions_per_period must be non-negative");
    }
    if (!(latent_step >= 0.0) || !(noise_sd >= 0.0)) throw DataError("scenario: standard deviations must be non-negative");
    if (!(latent_reversion >= 0.0 && latent_reversion <= 1.0)) throw DataError("scenario: latent_reversion must be in [0, 1]");
    if (!std::isfinite(coupling)) throw DataError("scenario: coupling must be finite");
    for (const auto& e : entities) {
        if (e.name.empty()) throw DataError("scenario: entity name must be non-empty");
        if (!(e.positive_rate >= 0.0 && e.negative_rate >= 0.0 && e.positive_rate + e.negative_rate <= 1.0)) {
            throw DataError("scenario: polarity rates of " + e.name + " must be non-negative and sum to at most 1");
        }
        if (!(e.initial_share >= 0.0 && e.initial_share <= 100.0)) {
            throw DataError("scenario: initial share of " + e.name + " must be in [0, 100]");
        }
        if (!(e.volume >= 0.0)) throw DataError("scenario: volume of " + e.name + " must be non-negative");
    }
}

Scenario generate_scenario(const ScenarioSpec& spec) {
    spec.validate();
    using namespace std::chrono;
    const std::size_t n_e = spec.entities.size();
    const std::size_t n_p = spec.n_periods;

    SplitMix64 latent_rng(spec.seed, 0);
    SplitMix64 mention_rng(spec.seed, 1);
    SplitMix64 noise_rng(spec.seed, 2);

    std::vector<Date> dates;
    year_month_day ymd{spec.start};
    for (std::size_t k = 0; k <= n_p; ++k) {
        dates.emplace_back(ymd);
        ymd += months{1};
    }

    Scenario sc;
    auto& truth = sc.truth;
    truth.coupling = spec.coupling;
    truth.noise_sd = spec.noise_sd;
    truth.planted = spec.planted;
    truth.latent.assign(n_p, std::vector<double>(n_e));
    truth.positive_rate = truth.latent;
    truth.negative_rate = truth.latent;
    truth.planted_value = truth.latent;
    truth.counts.assign(n_p, std::vector<PolarityCounts>(n_e));

    for (std::size_t k = 0; k < n_p; ++k) {
        const auto begin = Timestamp{dates[k]};
        const auto span = (Timestamp{dates[k + 1]} - begin).count();
        for (std::size_t e = 0; e < n_e; ++e) {
            const auto& profile = spec.entities[e];
            const double prev = k == 0 ? 0.0 : truth.latent[k - 1][e] * spec.latent_reversion;
            const double l = prev + spec.latent_step * latent_rng.normal();
            truth.latent[k][e] = l;

            double pos = profile.positive_rate * std::exp(l);
            double neg = profile.negative_rate * std::exp(-l);
            if (pos + neg > 0.98) {
                const double scale = 0.98 / (pos + neg);
                pos *= scale;
                neg *= scale;
            }
            truth.positive_rate[k][e] = pos;
            truth.negative_rate[k][e] = neg;

            const auto n = mention_rng.poisson(spec.mentions_per_period * profile.volume);
            for (std::uint64_t i = 0; i < n; ++i) {
                const double u = mention_rng.uniform();
                const Polarity p = u < pos ? Polarity::positive : (u < pos + neg ? Polarity::negative : Polarity::neutral);
                const auto offset = seconds{static_cast<std::int64_t>(mention_rng.below(static_cast<std::uint64_t>(span)))};
                sc.mentions.push_back({begin + offset, profile.name, p});
                truth.counts[k][e].add(p);
            }
        }
        const auto rows = period_aggregates(truth.counts[k]);
        for (std::size_t e = 0; e < n_e; ++e) truth.planted_value[k][e] = rows[e][static_cast<std::size_t>(spec.planted)];
    }
    std::stable_sort(sc.mentions.begin(), sc.mentions.end(),
                     [](const MentionRecord& a, const MentionRecord& b) { return a.timestamp < b.timestamp; });

    // Poll k+1 closes period k. The first period has no predecessor, so only
    // noise moves the second poll.
    std::vector<std::vector<double>> shares(n_p + 1, std::vector<double>(n_e));
    for (std::size_t e = 0; e < n_e; ++e) shares[0][e] = spec.entities[e].initial_share;
    for (std::size_t k = 0; k < n_p; ++k) {
        for (std::size_t e = 0; e < n_e; ++e) {
            const double drift = k == 0 ? 0.0 : spec.coupling * (truth.planted_value[k][e] - truth.planted_value[k - 1][e]);
            shares[k + 1][e] = shares[k][e] + drift + spec.noise_sd * noise_rng.normal();
        }
    }

    std::vector<PollSnapshot> snapshots;
    std::vector<std::string> names;
    for (const auto& p : spec.entities) names.push_back(p.name);
    for (std::size_t k = 0; k <= n_p; ++k) {
        PollSnapshot snap{dates[k], {}};
        for (std::size_t e = 0; e < n_e; ++e) {
            if (!(shares[k][e] >= 0.0 && shares[k][e] <= 100.0)) {
                throw DataError("scenario: poll share of " + names[e] + " left [0, 100] at " + format_date(dates[k]) +
                                "; lower the coupling or noise");
            }
            snap.shares.emplace(names[e], shares[k][e]);
        }
        snapshots.push_back(std::move(snap));
    }
    sc.polls = PollSeries(std::move(snapshots), names);
    return sc;
}

nlohmann::json to_json(const ScenarioSpec& spec) {
    nlohmann::json entities = nlohmann::json::array();
    for (const auto& e : spec.entities) {
        entities.push_back({{"name", e.name},
                            {"positive_rate", e.positive_rate},
                            {"negative_rate", e.negative_rate},
                            {"initial_share", e.initial_share},
                            {"volume", e.volume}});
    }
    return {{"entities", entities},
            {"n_periods", spec.n_periods},
            {"mentions_per_period", spec.mentions_per_period},
            {"latent_step", spec.latent_step},
            {"latent_reversion", spec.latent_reversion},
            {"coupling", spec.coupling},
            {"noise_sd", spec.noise_sd},
            {"planted", name(spec.planted)},
            {"start", format_date(spec.start)},
            {"seed", spec.seed}};
}

nlohmann::json to_json(const ScenarioTruth& truth, const std::vector<std::string>& entities) {
    nlohmann::json periods = nlohmann::json::array();
    for (std::size_t k = 0; k < truth.latent.size(); ++k) {
        nlohmann::json cells = nlohmann::json::array();
        for (std::size_t e = 0; e < entities.size(); ++e) {
            const auto& c = truth.counts[k][e];
            cells.push_back({{"entity", entities[e]},
                             {"latent", truth.latent[k][e]},
                             {"positive_rate", truth.positive_rate[k][e]},
                             {"negative_rate", truth.negative_rate[k][e]},
                             {"planted_value", truth.planted_value[k][e]},
                             {"positives", c.positives},
                             {"negatives", c.negatives},
                             {"neutrals", c.neutrals}});
        }
        periods.push_back(cells);
    }
    return {{"coupling", truth.coupling}, {"noise_sd", truth.noise_sd}, {"planted", name(truth.planted)},
            {"periods", periods}};
}

}  // namespace pollcast
