#pragma once

#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "pollcast/mention_store.hpp"

namespace pollcast::testing {

struct PartyRow {
    const char* name;
    std::int64_t negatives;
    std::int64_t positives;
    std::int64_t neutrals;
    std::int64_t total;
};

// Per-party mention counts of the reference sample
// (negative, positive, neutral, total).
inline constexpr std::array<PartyRow, 5> kPartySample = {{
    {"PSD", 69723, 121, 37133, 106977},
    {"PS", 28660, 225, 15326, 44211},
    {"CDS", 41935, 51, 17554, 59540},
    {"CDU", 2445, 79, 5604, 8128},
    {"BE", 9603, 306, 4214, 14123},
}};

inline constexpr std::int64_t kPartyGrandTotal = 232979;

inline std::vector<PolarityCounts> party_counts() {
    std::vector<PolarityCounts> out;
    for (const auto& r : kPartySample) out.push_back(PolarityCounts::from(r.positives, r.negatives, r.neutrals));
    return out;
}

inline Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline Timestamp at(int y, unsigned m, unsigned d, int hour = 12) {
    return Timestamp{ymd(y, m, d)} + std::chrono::hours{hour};
}

// Two polls enclosing one period; shares are arbitrary but valid.
inline PollSeries party_polls() {
    std::vector<PollSnapshot> snaps;
    snaps.push_back({ymd(2012, 1, 1), {{"PSD", 33.0}, {"PS", 30.0}, {"CDS", 11.0}, {"CDU", 9.0}, {"BE", 6.0}}});
    snaps.push_back({ymd(2012, 2, 1), {{"PSD", 32.5}, {"PS", 31.0}, {"CDS", 10.5}, {"CDU", 9.5}, {"BE", 6.5}}});
    return PollSeries(snaps, {"PSD", "PS", "CDS", "CDU", "BE"});
}

// One mention record per sample count, all inside the single period.
inline std::vector<MentionRecord> party_mentions() {
    std::vector<MentionRecord> out;
    out.reserve(static_cast<std::size_t>(kPartyGrandTotal));
    const auto start = Timestamp{ymd(2012, 1, 1)};
    std::int64_t i = 0;
    auto push = [&](const char* name, Polarity p, std::int64_t n) {
        for (std::int64_t k = 0; k < n; ++k, ++i) out.push_back({start + std::chrono::seconds{i % 2600000}, name, p});
    };
    for (const auto& r : kPartySample) {
        push(r.name, Polarity::negative, r.negatives);
        push(r.name, Polarity::positive, r.positives);
        push(r.name, Polarity::neutral, r.neutrals);
    }
    return out;
}

inline std::string party_mentions_csv() {
    std::ostringstream out;
    write_mentions_csv(out, party_mentions());
    return out.str();
}

}  // namespace pollcast::testing
