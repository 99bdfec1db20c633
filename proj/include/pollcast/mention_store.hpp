#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pollcast {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

enum class Polarity : std::uint8_t { positive, negative, neutral };

std::string_view to_string(Polarity p);

struct MentionRecord {
    Timestamp timestamp;
    std::string entity;
    Polarity polarity = Polarity::neutral;

    bool operator==(const MentionRecord&) const = default;
};

// One published poll: entity -> vote intention in percentage points.
struct PollSnapshot {
    Date date;
    std::map<std::string, double> shares;
};

// Date-ascending poll snapshots over a fixed entity set. Entity order is the
// order of first appearance in the source and is used everywhere downstream.
class PollSeries {
  public:
    PollSeries() = default;
    PollSeries(std::vector<PollSnapshot> snapshots, std::vector<std::string> entity_order);
    explicit PollSeries(std::vector<PollSnapshot> snapshots);

    const std::vector<PollSnapshot>& snapshots() const { return snapshots_; }
    const std::vector<std::string>& entities() const { return entities_; }
    std::size_t size() const { return snapshots_.size(); }
    double share(std::size_t poll, std::size_t entity) const;

  private:
    std::vector<PollSnapshot> snapshots_;
    std::vector<std::string> entities_;
};

struct PolarityCounts {
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t neutrals = 0;
    std::int64_t buzz = 0;

    static PolarityCounts from(std::int64_t pos, std::int64_t neg, std::int64_t neu) {
        return {pos, neg, neu, pos + neg + neu};
    }
    void add(Polarity p);
    bool valid() const;
    bool operator==(const PolarityCounts&) const = default;
};

enum class TargetMode : std::uint8_t { absolute, delta };

std::string_view to_string(TargetMode m);

struct Period {
    std::size_t index = 0;
    Date start;  // inclusive
    Date end;    // exclusive
};

// Per-period, per-entity counts and poll targets. Cells are indexed
// [period][entity] following `entities`. Period k spans [poll_k, poll_{k+1})
// and its target is the poll closing the period; `lagged` holds the value one
// step earlier (the opening poll in absolute mode, the previous delta in
// delta mode).
struct PeriodTable {
    TargetMode mode = TargetMode::absolute;
    std::vector<Period> periods;
    std::vector<std::string> entities;
    std::vector<std::vector<PolarityCounts>> counts;
    std::vector<std::vector<double>> targets;
    std::vector<std::vector<double>> lagged;
    std::size_t ignored_out_of_range = 0;
    std::size_t ignored_unknown_entity = 0;

    std::size_t period_count() const { return periods.size(); }
    std::size_t entity_count() const { return entities.size(); }
};

// Per-row problem found while parsing; `line` is 1-based and counts the header.
struct RowError {
    std::size_t line = 0;
    std::string message;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::vector<RowError> errors)
        : std::runtime_error(what), errors_(std::move(errors)) {}
    const std::vector<RowError>& errors() const { return errors_; }

  private:
    std::vector<RowError> errors_;
};

class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MentionFormat : std::uint8_t { csv, json_lines };

struct ParseOptions {
    // Fraction of data rows allowed to fail before parsing aborts. 0 = strict.
    double max_error_rate = 0.0;
};

struct MentionParseResult {
    std::vector<MentionRecord> records;
    std::vector<RowError> errors;
};

// Accepts YYYY-MM-DD, optionally followed by THH:MM[:SS[.fff]] and Z or a
// +HH:MM / -HH:MM offset. Returns false on malformed input.
bool parse_timestamp(std::string_view text, Timestamp& out);
bool parse_date(std::string_view text, Date& out);
std::string format_date(Date d);
std::string format_timestamp(Timestamp t);

bool parse_polarity(std::string_view text, Polarity& out);

MentionParseResult parse_mentions(std::istream& in, MentionFormat format,
                                  const ParseOptions& opts = {});

PollSeries parse_polls(std::istream& in);

struct CountRow {
    Date period_start;
    std::string entity;
    PolarityCounts counts;
};

std::vector<CountRow> parse_counts(std::istream& in);

PeriodTable bucket_periods(const std::vector<MentionRecord>& mentions, const PollSeries& polls);

// Builds a table from pre-aggregated counts. Every period_start must equal a
// poll date that opens a period; missing cells are zero.
PeriodTable table_from_counts(const std::vector<CountRow>& rows, const PollSeries& polls);

PeriodTable to_deltas(const PeriodTable& table);

void write_mentions_csv(std::ostream& out, const std::vector<MentionRecord>& mentions);
void write_mentions_jsonl(std::ostream& out, const std::vector<MentionRecord>& mentions);
void write_polls_csv(std::ostream& out, const PollSeries& polls);

}  // namespace pollcast
