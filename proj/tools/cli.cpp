#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "pollcast/aggregators.hpp"
#include "pollcast/backtest.hpp"
#include "pollcast/csv.hpp"
#include "pollcast/mention_store.hpp"
#include "pollcast/report_io.hpp"
#include "pollcast/synth.hpp"

namespace pollcast::cli {

namespace {

namespace fs = std::filesystem;

// Missing input files are usage errors (exit 2), everything else is a
// runtime failure (exit 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string mentions;
    std::string mentions_format = "auto";
    std::string counts;
    std::string polls;
    std::string out = ".";
    std::size_t window = 16;
    std::string learner = "ols";
    std::string target = "absolute";
    std::string feature_set = "all";
    std::string lagged_self = "off";
    std::string selection = "none";
    std::string k = "3";
    std::uint64_t seed = 42;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    std::string smoothing = "none";
    bool per_entity = false;
    std::size_t trees = 100;
    std::size_t max_features = 0;
    std::size_t min_leaf = 1;
    std::size_t max_depth = 0;
    double max_error_rate = 0.0;

    // synth
    std::size_t periods = 28;
    double mentions_per_period = 1000.0;
    double coupling = 2.0;
    double noise = 0.1;
    double latent_step = 0.25;
    double latent_reversion = 0.9;
    std::string planted = "bermingham";
    std::string format = "csv";
};

const std::map<std::string, TargetMode> kTargets = {{"absolute", TargetMode::absolute}, {"delta", TargetMode::delta}};
const std::map<std::string, Learner> kLearners = {{"ols", Learner::ols}, {"rf", Learner::rf}};
const std::map<std::string, FeatureSet> kSets = {
    {"all", FeatureSet::all}, {"buzz", FeatureSet::buzz}, {"sentiment", FeatureSet::sentiment}};
const std::map<std::string, SelectionMethod> kSelections = {
    {"none", SelectionMethod::none}, {"univariate", SelectionMethod::univariate}, {"rfe", SelectionMethod::rfe}};
const std::map<std::string, Smoothing> kSmoothing = {{"none", Smoothing::none}, {"laplace", Smoothing::laplace}};

std::vector<std::string> keys_of(const auto& m) {
    std::vector<std::string> out;
    for (const auto& [k, _] : m) out.push_back(k);
    return out;
}

// key = value lines; '#' or ';' start comments; [sections] are ignored.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config file not found: " + fs::path(path).filename().string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = csv::trim(line);
        if (text.empty() || text.front() == '#' || text.front() == ';' || text.front() == '[') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key(csv::trim(text.substr(0, eq)));
        std::replace(key.begin(), key.end(), '_', '-');
        auto value = std::string(csv::trim(text.substr(eq + 1)));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Prepends config-file values for every flag not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const CLI::App& app) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty() || args.empty()) return args;
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(args.front());
    } catch (const CLI::OptionNotFound&) {
        return args;
    }
    std::vector<std::string> merged{args.front()};
    for (const auto& [key, value] : read_config(config_path)) {
        const std::string flag = "--" + key;
        // Keys meant for other subcommands are skipped.
        if (key == "config" || has_flag(args, flag) || sub->get_option_no_throw(flag) == nullptr) continue;
        if (key == "per-entity") {
            if (value == "true" || value == "on" || value == "1") merged.push_back(flag);
            continue;
        }
        merged.push_back(flag);
        merged.push_back(value);
    }
    merged.insert(merged.end(), args.begin() + 1, args.end());
    return merged;
}

std::ifstream open_input(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw UsageError(what + " file not found: " + fs::path(path).filename().string());
    return in;
}

fs::path prepare_out(const std::string& dir) {
    fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.filename().string());
    f << content;
}

MentionFormat mention_format(const Options& o) {
    if (o.mentions_format == "csv") return MentionFormat::csv;
    if (o.mentions_format == "jsonl") return MentionFormat::json_lines;
    const auto ext = fs::path(o.mentions).extension().string();
    return ext == ".jsonl" || ext == ".json" || ext == ".ndjson" ? MentionFormat::json_lines : MentionFormat::csv;
}

PeriodTable load_table(const Options& o, std::ostream& err) {
    if (o.polls.empty()) throw UsageError("--polls is required");
    auto polls_in = open_input(o.polls, "polls");
    const auto polls = parse_polls(polls_in);

    PeriodTable table;
    std::size_t ingested = 0;
    if (!o.counts.empty()) {
        auto in = open_input(o.counts, "counts");
        const auto rows = parse_counts(in);
        ingested = rows.size();
        table = table_from_counts(rows, polls);
    } else {
        if (o.mentions.empty()) throw UsageError("--mentions or --counts is required");
        auto in = open_input(o.mentions, "mentions");
        const auto parsed = parse_mentions(in, mention_format(o), {o.max_error_rate});
        for (const auto& e : parsed.errors) err << "warning: skipped row: " << e.message << '\n';
        ingested = parsed.records.size();
        table = bucket_periods(parsed.records, polls);
    }
    if (ingested == 0) err << "warning: no mentions ingested; all count features are zero\n";
    if (table.ignored_out_of_range > 0) {
        err << "warning: " << table.ignored_out_of_range << " record(s) outside the poll date range were ignored\n";
    }
    if (table.ignored_unknown_entity > 0) {
        err << "warning: " << table.ignored_unknown_entity << " record(s) for entities absent from the polls were ignored\n";
    }
    return table;
}

BacktestConfig backtest_config(const Options& o) {
    BacktestConfig cfg;
    cfg.window = o.window;
    cfg.learner = kLearners.at(o.learner);
    cfg.target_mode = kTargets.at(o.target);
    cfg.feature_set = kSets.at(o.feature_set);
    cfg.include_lagged_self = o.lagged_self == "on";
    cfg.selection = kSelections.at(o.selection);
    cfg.k = o.k == "auto" ? 0 : static_cast<std::size_t>(std::stoul(o.k));
    cfg.seed = o.seed;
    cfg.smoothing = kSmoothing.at(o.smoothing);
    cfg.pooled = !o.per_entity;
    cfg.forest.n_trees = o.trees;
    cfg.forest.max_features = o.max_features;
    cfg.forest.min_leaf = o.min_leaf;
    cfg.forest.max_depth = o.max_depth;
    cfg.threads = o.threads;
    return cfg;
}

nlohmann::json inputs_echo(const Options& o) {
    nlohmann::json j = nlohmann::json::object();
    if (!o.mentions.empty() && o.counts.empty()) j["mentions"] = fs::path(o.mentions).filename().string();
    if (!o.counts.empty()) j["counts"] = fs::path(o.counts).filename().string();
    if (!o.polls.empty()) j["polls"] = fs::path(o.polls).filename().string();
    return j;
}

int cmd_aggregate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto table = load_table(o, err);
    const auto cfg = backtest_config(o);
    const auto fm = feature_matrix(table, {cfg.feature_set, cfg.target_mode, cfg.include_lagged_self, cfg.smoothing});
    if (fm.divisions.total() > 0) {
        err << "warning: " << fm.divisions.total() << " division(s) by zero were replaced by 0\n";
    }
    const auto dir = prepare_out(o.out);
    std::ostringstream csv_text;
    write_feature_csv(csv_text, fm);
    write_file(dir / "features.csv", csv_text.str());
    out << "wrote features.csv: " << fm.rows.size() << " rows x " << fm.columns.size() << " feature columns\n";
    return kOk;
}

int cmd_backtest(const Options& o, std::ostream& out, std::ostream& err) {
    const auto table = load_table(o, err);
    const auto cfg = backtest_config(o);
    const auto report = run_backtest(table, cfg);

    auto j = to_json(report);
    j["inputs"] = inputs_echo(o);
    const auto dir = prepare_out(o.out);
    write_file(dir / "report.json", j.dump(2) + "\n");
    std::ostringstream preds;
    write_predictions_csv(preds, report);
    write_file(dir / "predictions.csv", preds.str());
    if (report.importance) {
        std::ostringstream imp;
        write_importance_csv(imp, *report.importance);
        write_file(dir / "importance.csv", imp.str());
    }
    if (report.guarded_divisions > 0) {
        err << "warning: " << report.guarded_divisions << " division(s) by zero were replaced by 0\n";
    }
    out << "test periods: " << report.periods.size() << '\n';
    out << "feature columns: " << report.feature_columns.size() << '\n';
    out << "global MAE: " << csv::format_double(report.global_mae) << '\n';
    out << "baseline MAE: " << csv::format_double(report.baseline_global_mae) << '\n';
    return kOk;
}

int cmd_baseline(const Options& o, std::ostream& out, std::ostream&) {
    if (o.polls.empty()) throw UsageError("--polls is required");
    auto in = open_input(o.polls, "polls");
    const auto polls = parse_polls(in);
    const auto report = baseline_lagged(polls, kTargets.at(o.target));
    auto j = to_json(report);
    j["inputs"] = inputs_echo(o);
    const auto dir = prepare_out(o.out);
    write_file(dir / "baseline.json", j.dump(2) + "\n");
    out << "periods: " << report.periods.size() << '\n';
    out << "baseline MAE: " << csv::format_double(report.global_mae) << '\n';
    return kOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
    ScenarioSpec spec;
    spec.n_periods = o.periods;
    spec.mentions_per_period = o.mentions_per_period;
    spec.coupling = o.coupling;
    spec.noise_sd = o.noise;
    spec.latent_step = o.latent_step;
    spec.latent_reversion = o.latent_reversion;
    spec.seed = o.seed;
    const auto planted = aggregate_from_name(o.planted);
    if (!planted) throw UsageError("unknown aggregate for --planted: " + o.planted);
    spec.planted = *planted;

    const auto sc = generate_scenario(spec);
    const auto dir = prepare_out(o.out);
    std::ostringstream mentions;
    std::string mentions_name;
    if (o.format == "jsonl") {
        write_mentions_jsonl(mentions, sc.mentions);
        mentions_name = "mentions.jsonl";
    } else {
        write_mentions_csv(mentions, sc.mentions);
        mentions_name = "mentions.csv";
    }
    write_file(dir / mentions_name, mentions.str());
    std::ostringstream polls;
    write_polls_csv(polls, sc.polls);
    write_file(dir / "polls.csv", polls.str());
    const nlohmann::json truth = {{"spec", to_json(spec)}, {"truth", to_json(sc.truth, sc.polls.entities())}};
    write_file(dir / "truth.json", truth.dump(2) + "\n");
    out << "wrote " << mentions_name << " (" << sc.mentions.size() << " mentions), polls.csv (" << sc.polls.size()
        << " polls), truth.json\n";
    return kOk;
}

void add_input_options(CLI::App* sub, Options& o) {
    sub->add_option("--mentions", o.mentions, "Mentions file (CSV or JSON lines)");
    sub->add_option("--mentions-format", o.mentions_format, "Mentions format")->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    sub->add_option("--counts", o.counts, "Pre-aggregated counts CSV (instead of --mentions)");
    sub->add_option("--polls", o.polls, "Polls CSV");
    sub->add_option("--max-error-rate", o.max_error_rate, "Tolerated fraction of bad mention rows")
        ->check(CLI::Range(0.0, 1.0));
}

void add_feature_options(CLI::App* sub, Options& o) {
    sub->add_option("--target", o.target, "Target mode")->check(CLI::IsMember(keys_of(kTargets)));
    sub->add_option("--feature-set", o.feature_set, "Aggregate columns")->check(CLI::IsMember(keys_of(kSets)));
    sub->add_option("--lagged-self", o.lagged_self, "Add the previous poll value as a feature")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--smoothing", o.smoothing, "Count smoothing")->check(CLI::IsMember(keys_of(kSmoothing)));
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--config", "Key = value config file; command-line flags win");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed");
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Sentiment aggregates and poll nowcasting backtests", "pollcast"};
    app.require_subcommand(1);

    auto* aggregate = app.add_subcommand("aggregate", "Write the per-period feature matrix");
    auto* backtest = app.add_subcommand("backtest", "Sliding-window backtest of poll nowcasts");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic mention stream and poll series");
    auto* baseline = app.add_subcommand("baseline", "Score the last-known-poll baseline");

    for (auto* sub : {aggregate, backtest}) {
        add_input_options(sub, o);
        add_feature_options(sub, o);
        add_common(sub, o);
    }
    backtest->add_option("--window", o.window, "Training window in periods")->check(CLI::PositiveNumber);
    backtest->add_option("--learner", o.learner, "Regression model")->check(CLI::IsMember(keys_of(kLearners)));
    backtest->add_option("--selection", o.selection, "Feature selection")->check(CLI::IsMember(keys_of(kSelections)));
    backtest->add_option("--k", o.k, "Features to keep (integer or auto = ceil 10%)");
    backtest->add_flag("--per-entity", o.per_entity, "Fit one model per entity instead of a pooled model");
    backtest->add_option("--trees", o.trees, "Random forest size")->check(CLI::PositiveNumber);
    backtest->add_option("--max-features", o.max_features, "Candidate columns per split (0 = ceil(sqrt(p)))");
    backtest->add_option("--min-leaf", o.min_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber);
    backtest->add_option("--max-depth", o.max_depth, "Maximum tree depth (0 = unlimited)");

    add_common(synth, o);
    synth->add_option("--periods", o.periods, "Number of inter-poll periods")->check(CLI::PositiveNumber);
    synth->add_option("--mentions-per-period", o.mentions_per_period, "Mean mentions per entity and period");
    synth->add_option("--coupling", o.coupling, "Poll delta per unit of planted aggregate delta");
    synth->add_option("--noise", o.noise, "Poll noise standard deviation (percentage points)");
    synth->add_option("--latent-step", o.latent_step, "Latent sentiment step standard deviation");
    synth->add_option("--latent-reversion", o.latent_reversion, "Latent sentiment AR coefficient");
    synth->add_option("--planted", o.planted, "Aggregate driving the polls");
    synth->add_option("--format", o.format, "Mentions output format")->check(CLI::IsMember({"csv", "jsonl"}));

    add_common(baseline, o);
    baseline->add_option("--polls", o.polls, "Polls CSV");
    baseline->add_option("--target", o.target, "Target mode")->check(CLI::IsMember(keys_of(kTargets)));

    try {
        auto args = merge_config(raw_args, app);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    if (o.k != "auto" && (o.k.empty() || !std::all_of(o.k.begin(), o.k.end(), ::isdigit) || o.k == "0")) {
        err << "error: --k must be a positive integer or auto\n";
        return kUsage;
    }

    try {
        if (aggregate->parsed()) return cmd_aggregate(o, out, err);
        if (backtest->parsed()) return cmd_backtest(o, out, err);
        if (synth->parsed()) return cmd_synth(o, out, err);
        return cmd_baseline(o, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace pollcast::cli
