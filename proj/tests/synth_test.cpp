#include "pollcast/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pollcast/backtest.hpp"

namespace pollcast {
namespace {

std::string dump(const Scenario& s) {
    std::ostringstream out;
    write_mentions_csv(out, s.mentions);
    write_polls_csv(out, s.polls);
    return out.str();
}

TEST(Synth, DefaultShape) {
    const auto s = generate_scenario({});
    EXPECT_EQ(s.polls.size(), 29u);
    EXPECT_EQ(s.polls.entities(), (std::vector<std::string>{"PSD", "PS", "CDS", "CDU", "BE"}));
    EXPECT_EQ(bucket_periods(s.mentions, s.polls).period_count(), 28u);
    EXPECT_TRUE(std::is_sorted(s.mentions.begin(), s.mentions.end(),
                               [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
}

TEST(Synth, NoNoiseNoCouplingKeepsPollsFlat) {
    ScenarioSpec spec;
    spec.noise_sd = 0.0;
    spec.coupling = 0.0;
    const auto s = generate_scenario(spec);
    for (std::size_t k = 0; k < s.polls.size(); ++k) {
        for (std::size_t e = 0; e < spec.entities.size(); ++e) {
            EXPECT_EQ(s.polls.share(k, e), spec.entities[e].initial_share);
        }
    }
    EXPECT_EQ(baseline_lagged(s.polls, TargetMode::absolute).global_mae, 0.0);
}

TEST(Synth, SameSeedSameOutput) {
    ScenarioSpec spec;
    spec.seed = 17;
    const auto a = generate_scenario(spec);
    const auto b = generate_scenario(spec);
    EXPECT_EQ(a.mentions, b.mentions);
    EXPECT_EQ(dump(a), dump(b));
    EXPECT_EQ(to_json(a.truth, a.polls.entities()).dump(), to_json(b.truth, b.polls.entities()).dump());
    spec.seed = 18;
    EXPECT_NE(dump(a), dump(generate_scenario(spec)));
}

TEST(Synth, CountsMatchMentions) {
    ScenarioSpec spec;
    spec.seed = 3;
    const auto s = generate_scenario(spec);
    const auto table = bucket_periods(s.mentions, s.polls);
    EXPECT_EQ(table.ignored_out_of_range, 0u);
    EXPECT_EQ(table.ignored_unknown_entity, 0u);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < table.period_count(); ++k) {
        for (std::size_t e = 0; e < table.entity_count(); ++e) {
            const auto& c = table.counts[k][e];
            EXPECT_EQ(c, s.truth.counts[k][e]);
            EXPECT_TRUE(c.valid());
            EXPECT_EQ(c.positives + c.negatives + c.neutrals, c.buzz);
            total += c.buzz;
        }
    }
    EXPECT_EQ(total, static_cast<std::int64_t>(s.mentions.size()));
}

TEST(Synth, PolarityMixFollowsProfile) {
    // With no latent movement every mention of an entity draws from fixed rates.
    ScenarioSpec spec;
    spec.latent_step = 0.0;
    spec.mentions_per_period = 2000.0;
    spec.seed = 5;
    const auto s = generate_scenario(spec);
    const auto& psd = spec.entities[0];
    std::int64_t n = 0, neg = 0, pos = 0;
    for (const auto& m : s.mentions) {
        if (m.entity != psd.name) continue;
        ++n;
        neg += m.polarity == Polarity::negative;
        pos += m.polarity == Polarity::positive;
    }
    ASSERT_GT(n, 0);
    const double nn = static_cast<double>(n);
    EXPECT_LE(std::abs(neg - nn * psd.negative_rate), 3.0 * std::sqrt(nn * psd.negative_rate * (1 - psd.negative_rate)));
    EXPECT_LE(std::abs(pos - nn * psd.positive_rate), 3.0 * std::sqrt(nn * psd.positive_rate * (1 - psd.positive_rate)));
    // Negatives dominate positives by a wide margin.
    EXPECT_GT(neg, 100 * pos);
}

TEST(Synth, NoiselessPollsAreAffineInPlantedAggregate) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ScenarioSpec spec;
        spec.noise_sd = 0.0;
        spec.seed = seed;
        const auto s = generate_scenario(spec);
        // Recompute the planted aggregate from bucketed mentions.
        const auto table = bucket_periods(s.mentions, s.polls);
        std::vector<std::vector<double>> planted;
        for (const auto& row : table.counts) {
            std::vector<double> v;
            for (const auto& agg : period_aggregates(row)) v.push_back(agg[static_cast<std::size_t>(spec.planted)]);
            planted.push_back(v);
        }
        for (std::size_t k = 1; k < table.period_count(); ++k) {
            for (std::size_t e = 0; e < table.entity_count(); ++e) {
                const double dy = s.polls.share(k + 1, e) - s.polls.share(k, e);
                EXPECT_NEAR(dy, spec.coupling * (planted[k][e] - planted[k - 1][e]), 1e-9);
            }
        }
        for (std::size_t e = 0; e < table.entity_count(); ++e) EXPECT_EQ(s.polls.share(1, e), s.polls.share(0, e));
    }
}

TEST(Synth, RejectsInvalidSpecs) {
    ScenarioSpec spec;
    spec.n_periods = 0;
    EXPECT_THROW(generate_scenario(spec), DataError);
    spec = {};
    spec.noise_sd = -1.0;
    EXPECT_THROW(generate_scenario(spec), DataError);
    spec = {};
    spec.entities.clear();
    EXPECT_THROW(generate_scenario(spec), DataError);
    spec = {};
    spec.entities[0].negative_rate = 0.9;
    spec.entities[0].positive_rate = 0.2;
    EXPECT_THROW(generate_scenario(spec), DataError);
    spec = {};
    spec.latent_reversion = 1.5;
    EXPECT_THROW(generate_scenario(spec), DataError);
    spec = {};
    spec.noise_sd = 50.0;
    EXPECT_THROW(generate_scenario(spec), DataError);  // shares leave [0, 100]
}

TEST(Synth, SpecJson) {
    const auto j = to_json(ScenarioSpec{});
    EXPECT_EQ(j.at("n_periods"), 28);
    EXPECT_EQ(j.at("planted"), "bermingham");
    EXPECT_EQ(j.at("start"), "2011-06-01");
    EXPECT_EQ(j.at("entities").size(), 5u);
}

}  // namespace
}  // namespace pollcast
