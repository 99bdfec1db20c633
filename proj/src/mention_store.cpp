#include "pollcast/mention_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "pollcast/csv.hpp"

namespace pollcast {

namespace {

using namespace std::chrono;

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_count(std::string_view s, std::int64_t& out) {
    s = csv::trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && out >= 0;
}

bool parse_real(std::string_view s, double& out) {
    s = csv::trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Maps header names to column positions; throws on missing columns.
std::vector<std::size_t> header_columns(const std::string& header_line,
                                        const std::vector<std::string_view>& required,
                                        std::string_view what) {
    const auto names = csv::split(header_line);
    std::vector<std::size_t> cols;
    for (const auto& want : required) {
        auto it = std::find_if(names.begin(), names.end(),
                               [&](const std::string& n) { return lower(csv::trim(n)) == want; });
        if (it == names.end()) {
            throw ParseError(std::string(what) + ": header is missing column '" + std::string(want) + "'",
                             {{1, "missing column " + std::string(want)}});
        }
        cols.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    return cols;
}

bool blank(std::string_view line) { return csv::trim(line).empty(); }

std::string at_line(std::string_view msg, std::size_t line) {
    return std::string(msg) + " at line " + std::to_string(line);
}

}  // namespace

std::string_view to_string(Polarity p) {
    switch (p) {
        case Polarity::positive: return "positive";
        case Polarity::negative: return "negative";
        case Polarity::neutral: return "neutral";
    }
    return "neutral";
}

std::string_view to_string(TargetMode m) { return m == TargetMode::absolute ? "absolute" : "delta"; }

void PolarityCounts::add(Polarity p) {
    switch (p) {
        case Polarity::positive: ++positives; break;
        case Polarity::negative: ++negatives; break;
        case Polarity::neutral: ++neutrals; break;
    }
    ++buzz;
}

bool PolarityCounts::valid() const {
    return positives >= 0 && negatives >= 0 && neutrals >= 0 && positives + negatives + neutrals == buzz;
}

PollSeries::PollSeries(std::vector<PollSnapshot> snapshots)
    : PollSeries(snapshots, snapshots.empty() ? std::vector<std::string>{} : [&] {
          std::vector<std::string> names;
          for (const auto& [name, _] : snapshots.front().shares) names.push_back(name);
          return names;
      }()) {}

PollSeries::PollSeries(std::vector<PollSnapshot> snapshots, std::vector<std::string> entity_order)
    : snapshots_(std::move(snapshots)), entities_(std::move(entity_order)) {
    if (snapshots_.size() < 2) throw DataError("poll series needs at least 2 snapshots");
    const std::set<std::string> names(entities_.begin(), entities_.end());
    if (names.size() != entities_.size() || names.empty()) throw DataError("poll series entity list is empty or has duplicates");
    for (std::size_t i = 0; i < snapshots_.size(); ++i) {
        const auto& snap = snapshots_[i];
        if (i > 0 && !(snapshots_[i - 1].date < snap.date)) {
            throw DataError("poll dates must be strictly increasing (" + format_date(snap.date) + ")");
        }
        if (snap.shares.size() != names.size()) {
            throw DataError("poll on " + format_date(snap.date) + " does not cover the same entity set");
        }
        for (const auto& [name, share] : snap.shares) {
            if (!names.contains(name)) {
                throw DataError("poll on " + format_date(snap.date) + " has unexpected entity " + name);
            }
            if (!std::isfinite(share) || share < 0.0 || share > 100.0) {
                throw DataError("poll share out of [0, 100] for " + name + " on " + format_date(snap.date));
            }
        }
    }
}

double PollSeries::share(std::size_t poll, std::size_t entity) const {
    return snapshots_.at(poll).shares.at(entities_.at(entity));
}

bool parse_date(std::string_view text, Date& out) {
    text = csv::trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
        return false;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return false;
    out = sys_days{ymd};
    return true;
}

bool parse_timestamp(std::string_view text, Timestamp& out) {
    text = csv::trim(text);
    Date date;
    if (text.size() < 10 || !parse_date(text.substr(0, 10), date)) return false;
    auto rest = text.substr(10);
    seconds tod{0};
    if (!rest.empty()) {
        if (rest[0] != 'T' && rest[0] != 't' && rest[0] != ' ') return false;
        rest.remove_prefix(1);
        int hh = 0, mm = 0, ss = 0;
        if (rest.size() < 5 || rest[2] != ':' || !parse_int(rest.substr(0, 2), hh) || !parse_int(rest.substr(3, 2), mm)) {
            return false;
        }
        rest.remove_prefix(5);
        if (!rest.empty() && rest[0] == ':') {
            if (rest.size() < 3 || !parse_int(rest.substr(1, 2), ss)) return false;
            rest.remove_prefix(3);
            if (!rest.empty() && rest[0] == '.') {
                std::size_t n = 1;
                while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n]))) ++n;
                if (n == 1) return false;
                rest.remove_prefix(n);  // sub-second precision is dropped
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) return false;
        tod = hours{hh} + minutes{mm} + seconds{ss};
        if (rest == "Z" || rest == "z") {
            rest = {};
        } else if (!rest.empty()) {
            if ((rest[0] != '+' && rest[0] != '-') || rest.size() != 6 || rest[3] != ':') return false;
            int oh = 0, om = 0;
            if (!parse_int(rest.substr(1, 2), oh) || !parse_int(rest.substr(4, 2), om)) return false;
            const seconds offset = hours{oh} + minutes{om};
            tod -= rest[0] == '+' ? offset : -offset;
        }
    }
    out = Timestamp{date} + tod;
    return true;
}

std::string format_date(Date d) {
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(Timestamp t) {
    const auto day = floor<days>(t);
    const hh_mm_ss tod{t - day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02dZ", static_cast<int>(tod.hours().count()),
                  static_cast<int>(tod.minutes().count()), static_cast<int>(tod.seconds().count()));
    return format_date(day) + buf;
}

bool parse_polarity(std::string_view text, Polarity& out) {
    const auto label = lower(csv::trim(text));
    if (label == "positive") {
        out = Polarity::positive;
    } else if (label == "negative") {
        out = Polarity::negative;
    } else if (label == "neutral") {
        out = Polarity::neutral;
    } else {
        return false;
    }
    return true;
}

namespace {

// Shared row validation for both mention formats.
std::optional<std::string> make_record(std::string_view ts, std::string_view entity, std::string_view pol,
                                       MentionRecord& rec) {
    if (!parse_timestamp(ts, rec.timestamp)) return "unparseable timestamp '" + std::string(csv::trim(ts)) + "'";
    rec.entity = std::string(csv::trim(entity));
    if (rec.entity.empty()) return std::string("empty entity");
    if (!parse_polarity(pol, rec.polarity)) return std::string("unknown polarity '") + std::string(csv::trim(pol)) + "'";
    return std::nullopt;
}

}  // namespace

MentionParseResult parse_mentions(std::istream& in, MentionFormat format, const ParseOptions& opts) {
    MentionParseResult result;
    std::string line;
    std::size_t line_no = 0;
    std::size_t data_rows = 0;
    std::vector<std::size_t> cols;

    if (format == MentionFormat::csv) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!blank(line)) break;
        }
        if (line_no == 0 || blank(line)) return result;
        cols = header_columns(line, {"timestamp", "entity", "polarity"}, "mentions");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        ++data_rows;
        MentionRecord rec;
        std::optional<std::string> problem;
        if (format == MentionFormat::csv) {
            const auto fields = csv::split(line);
            const auto needed = *std::max_element(cols.begin(), cols.end());
            if (fields.size() <= needed) {
                problem = "missing field";
            } else {
                problem = make_record(fields[cols[0]], fields[cols[1]], fields[cols[2]], rec);
            }
        } else {
            const auto obj = nlohmann::json::parse(line, nullptr, false);
            if (obj.is_discarded() || !obj.is_object()) {
                problem = "malformed JSON";
            } else {
                std::string values[3];
                const char* keys[3] = {"timestamp", "entity", "polarity"};
                for (int k = 0; k < 3 && !problem; ++k) {
                    auto it = obj.find(keys[k]);
                    if (it == obj.end() || !it->is_string()) {
                        problem = std::string("missing field ") + keys[k];
                    } else {
                        values[k] = it->get<std::string>();
                    }
                }
                if (!problem) problem = make_record(values[0], values[1], values[2], rec);
            }
        }
        if (problem) {
            result.errors.push_back({line_no, at_line(*problem, line_no)});
        } else {
            result.records.push_back(std::move(rec));
        }
    }

    if (!result.errors.empty()) {
        const double rate = static_cast<double>(result.errors.size()) / static_cast<double>(data_rows);
        if (rate > opts.max_error_rate) {
            throw ParseError("mentions: " + std::to_string(result.errors.size()) + " bad row(s), first: " +
                                 result.errors.front().message,
                             result.errors);
        }
    }
    return result;
}

PollSeries parse_polls(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!blank(line)) break;
    }
    if (blank(line)) throw DataError("polls: empty input");
    const auto cols = header_columns(line, {"date", "entity", "share_pct"}, "polls");

    std::map<Date, PollSnapshot> by_date;
    std::vector<std::string> order;
    std::set<std::string> seen;
    std::vector<RowError> errors;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto fields = csv::split(line);
        if (fields.size() <= *std::max_element(cols.begin(), cols.end())) {
            errors.push_back({line_no, at_line("missing field", line_no)});
            continue;
        }
        Date date;
        double share = 0.0;
        const std::string entity(csv::trim(fields[cols[1]]));
        if (!parse_date(fields[cols[0]], date)) {
            errors.push_back({line_no, at_line("unparseable date", line_no)});
        } else if (entity.empty()) {
            errors.push_back({line_no, at_line("empty entity", line_no)});
        } else if (!parse_real(fields[cols[2]], share)) {
            errors.push_back({line_no, at_line("unparseable share", line_no)});
        } else {
            auto& snap = by_date[date];
            snap.date = date;
            if (!snap.shares.emplace(entity, share).second) {
                errors.push_back({line_no, at_line("duplicate entity " + entity + " for one date", line_no)});
            }
            if (seen.insert(entity).second) order.push_back(entity);
        }
    }
    if (!errors.empty()) throw ParseError("polls: " + errors.front().message, errors);

    std::vector<PollSnapshot> snapshots;
    for (auto& [_, snap] : by_date) snapshots.push_back(std::move(snap));
    return PollSeries(std::move(snapshots), std::move(order));
}

std::vector<CountRow> parse_counts(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!blank(line)) break;
    }
    if (blank(line)) return {};
    const auto cols = header_columns(line, {"period_start", "entity", "positives", "negatives", "neutrals"}, "counts");
    std::vector<CountRow> rows;
    std::vector<RowError> errors;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto fields = csv::split(line);
        if (fields.size() <= *std::max_element(cols.begin(), cols.end())) {
            errors.push_back({line_no, at_line("missing field", line_no)});
            continue;
        }
        CountRow row;
        std::int64_t pos = 0, neg = 0, neu = 0;
        row.entity = std::string(csv::trim(fields[cols[1]]));
        if (!parse_date(fields[cols[0]], row.period_start)) {
            errors.push_back({line_no, at_line("unparseable period_start", line_no)});
        } else if (row.entity.empty()) {
            errors.push_back({line_no, at_line("empty entity", line_no)});
        } else if (!parse_count(fields[cols[2]], pos) || !parse_count(fields[cols[3]], neg) ||
                   !parse_count(fields[cols[4]], neu)) {
            errors.push_back({line_no, at_line("counts must be non-negative integers", line_no)});
        } else {
            row.counts = PolarityCounts::from(pos, neg, neu);
            rows.push_back(std::move(row));
        }
    }
    if (!errors.empty()) throw ParseError("counts: " + errors.front().message, errors);
    return rows;
}

namespace {

PeriodTable empty_table(const PollSeries& polls) {
    if (polls.size() < 2) throw DataError("poll series needs at least 2 snapshots");
    PeriodTable table;
    table.entities = polls.entities();
    const std::size_t n_periods = polls.size() - 1;
    const std::size_t n_entities = table.entities.size();
    table.counts.assign(n_periods, std::vector<PolarityCounts>(n_entities));
    table.targets.assign(n_periods, std::vector<double>(n_entities));
    table.lagged.assign(n_periods, std::vector<double>(n_entities));
    for (std::size_t k = 0; k < n_periods; ++k) {
        table.periods.push_back({k, polls.snapshots()[k].date, polls.snapshots()[k + 1].date});
        for (std::size_t e = 0; e < n_entities; ++e) {
            table.targets[k][e] = polls.share(k + 1, e);
            table.lagged[k][e] = polls.share(k, e);
        }
    }
    return table;
}

}  // namespace

PeriodTable bucket_periods(const std::vector<MentionRecord>& mentions, const PollSeries& polls) {
    PeriodTable table = empty_table(polls);
    std::unordered_map<std::string, std::size_t> entity_index;
    for (std::size_t e = 0; e < table.entities.size(); ++e) entity_index.emplace(table.entities[e], e);

    std::vector<Timestamp> bounds;
    for (const auto& snap : polls.snapshots()) bounds.emplace_back(snap.date);

    for (const auto& m : mentions) {
        const auto it = std::upper_bound(bounds.begin(), bounds.end(), m.timestamp);
        if (it == bounds.begin() || it == bounds.end()) {
            ++table.ignored_out_of_range;
            continue;
        }
        const auto found = entity_index.find(m.entity);
        if (found == entity_index.end()) {
            ++table.ignored_unknown_entity;
            continue;
        }
        const auto period = static_cast<std::size_t>(it - bounds.begin()) - 1;
        table.counts[period][found->second].add(m.polarity);
    }
    return table;
}

PeriodTable table_from_counts(const std::vector<CountRow>& rows, const PollSeries& polls) {
    PeriodTable table = empty_table(polls);
    std::unordered_map<std::string, std::size_t> entity_index;
    for (std::size_t e = 0; e < table.entities.size(); ++e) entity_index.emplace(table.entities[e], e);
    std::map<Date, std::size_t> period_index;
    for (const auto& p : table.periods) period_index.emplace(p.start, p.index);

    for (const auto& row : rows) {
        const auto p = period_index.find(row.period_start);
        if (p == period_index.end()) {
            ++table.ignored_out_of_range;
            continue;
        }
        const auto e = entity_index.find(row.entity);
        if (e == entity_index.end()) {
            ++table.ignored_unknown_entity;
            continue;
        }
        auto& cell = table.counts[p->second][e->second];
        cell = PolarityCounts::from(cell.positives + row.counts.positives, cell.negatives + row.counts.negatives,
                                    cell.neutrals + row.counts.neutrals);
    }
    return table;
}

PeriodTable to_deltas(const PeriodTable& table) {
    if (table.mode != TargetMode::absolute) throw DataError("table is already in delta mode");
    if (table.period_count() < 2) throw DataError("cannot differentiate: need at least 2 periods");
    PeriodTable out;
    out.mode = TargetMode::delta;
    out.entities = table.entities;
    out.ignored_out_of_range = table.ignored_out_of_range;
    out.ignored_unknown_entity = table.ignored_unknown_entity;
    for (std::size_t k = 1; k < table.period_count(); ++k) {
        out.periods.push_back(table.periods[k]);
        out.counts.push_back(table.counts[k]);
        std::vector<double> target(table.entity_count());
        std::vector<double> lag(table.entity_count());
        for (std::size_t e = 0; e < table.entity_count(); ++e) {
            target[e] = table.targets[k][e] - table.targets[k - 1][e];
            lag[e] = table.targets[k - 1][e] - table.lagged[k - 1][e];
        }
        out.targets.push_back(std::move(target));
        out.lagged.push_back(std::move(lag));
    }
    return out;
}

void write_mentions_csv(std::ostream& out, const std::vector<MentionRecord>& mentions) {
    out << "timestamp,entity,polarity\n";
    for (const auto& m : mentions) {
        out << format_timestamp(m.timestamp) << ',' << csv::quote_if_needed(m.entity) << ',' << to_string(m.polarity)
            << '\n';
    }
}

void write_mentions_jsonl(std::ostream& out, const std::vector<MentionRecord>& mentions) {
    for (const auto& m : mentions) {
        const nlohmann::json obj = {{"timestamp", format_timestamp(m.timestamp)},
                                    {"entity", m.entity},
                                    {"polarity", std::string(to_string(m.polarity))}};
        out << obj.dump() << '\n';
    }
}

void write_polls_csv(std::ostream& out, const PollSeries& polls) {
    out << "date,entity,share_pct\n";
    for (std::size_t k = 0; k < polls.size(); ++k) {
        for (std::size_t e = 0; e < polls.entities().size(); ++e) {
            out << format_date(polls.snapshots()[k].date) << ',' << csv::quote_if_needed(polls.entities()[e]) << ','
                << csv::format_double(polls.share(k, e)) << '\n';
        }
    }
}

}  // namespace pollcast
