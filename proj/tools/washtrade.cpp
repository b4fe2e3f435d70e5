#include <omp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "washtrade/errors.hpp"
#include "washtrade/graph.hpp"
#include "washtrade/pipeline.hpp"
#include "washtrade/report_io.hpp"
#include "washtrade/synth.hpp"

namespace fs = std::filesystem;
using namespace washtrade;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ManifestInput describe_input(const std::string& role, const fs::path& path) {
    return {role, path.string(), sha256_hex(read_file(path))};
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string safe_name(std::string s) {
    for (char& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    }
    return s;
}

struct DatasetOptions {
    std::string trades;
    std::string rates;
    std::string tokens;
    std::string format;
};

void add_dataset_options(CLI::App* cmd, DatasetOptions& o, bool trades_required) {
    auto* t = cmd->add_option("--trades", o.trades, "Trade file (CSV or JSONL)");
    if (trades_required) t->required();
    cmd->add_option("--rates", o.rates, "Daily ETH/USD rates CSV (date,usd_per_eth)");
    cmd->add_option("--tokens", o.tokens, "Token metadata CSV (token,decimals) for base-unit amounts");
    cmd->add_option("--format", o.format, "csv or jsonl (default: from the file extension)");
}

DatasetPaths to_paths(const DatasetOptions& o) {
    DatasetPaths p;
    p.trades = o.trades;
    if (!o.format.empty()) {
        p.format = parse_input_format(o.format);
    } else {
        p.format = fs::path(o.trades).extension() == ".jsonl" ? InputFormat::jsonl : InputFormat::csv;
    }
    if (!o.rates.empty()) p.rates = o.rates;
    if (!o.tokens.empty()) p.token_metadata = o.tokens;
    return p;
}

std::vector<ManifestInput> describe_inputs(const DatasetPaths& p) {
    std::vector<ManifestInput> out{describe_input("trades", p.trades)};
    if (p.rates) out.push_back(describe_input("rates", *p.rates));
    if (p.token_metadata) out.push_back(describe_input("tokens", *p.token_metadata));
    return out;
}

struct DetectOptions {
    DatasetOptions data;
    std::string out;
    std::string graph_dir;
    std::uint64_t scc_threshold = 100;
    std::string margin = "0.01";
    std::string windows = "1h,1d,1w";
    bool single_pass = false;
    bool trivial_sccs = false;
    bool float_fidelity = false;
};

int cmd_detect(const DetectOptions& o) {
    const std::string started = utc_now();
    DetectionConfig config;
    config.scc_threshold = o.scc_threshold;
    const auto margin = Decimal::parse(o.margin);
    if (!margin) throw ConfigError("--margin: not a decimal: " + o.margin);
    config.margin = *margin;
    config.windows = parse_window_ladder(o.windows);
    config.repeat_within_window = !o.single_pass;
    config.count_trivial_sccs = o.trivial_sccs;
    config.float_fidelity = o.float_fidelity;
    config.validate();

    const DatasetPaths paths = to_paths(o.data);
    Dataset data = load_dataset(paths);
    const DetectionRun run = run_detection(data.trades, config);

    const fs::path out(o.out);
    ensure_dir(out);
    std::vector<std::string> outputs = {"labels.csv", "wash_sets.json", "candidates.json", "scc_ccdf.csv",
                                        "rejections.json"};
    write_file(out / "labels.csv", format_labels_csv(data.trades, run.result));
    write_file(out / "wash_sets.json", format_wash_sets_json(run.result.wash_sets));
    write_file(out / "candidates.json", format_candidates_json(run.candidates));
    write_file(out / "scc_ccdf.csv", format_ccdf_csv(ccdf_scc_counts(run.scc_counts)));
    write_file(out / "rejections.json",
               format_rejections_json(data.rejected, data.input_records, data.trades.size(), data.missing_usd));

    if (!o.graph_dir.empty()) {
        const fs::path gdir(o.graph_dir);
        ensure_dir(gdir);
        for (const TokenTradeGraph& g : build_graphs(data.trades)) {
            const std::string name = safe_name(g.market.exchange_id + "_" + g.market.token) + ".csv";
            write_file(gdir / name, format_edge_list_csv(simplify(g)));
        }
    }

    std::size_t wash = 0, self = 0;
    for (Label l : run.result.labels) {
        if (l == Label::wash) ++wash;
        if (l == Label::self_trade) ++self;
    }
    RunManifest m;
    m.command = "detect";
    m.version = WASHTRADE_VERSION;
    m.config = config_to_json(config);
    m.inputs = describe_inputs(paths);
    m.started_at = started;
    m.outputs = outputs;
    m.stats = {{"input_records", data.input_records},
               {"trades", data.trades.size()},
               {"rejected", data.rejected.total()},
               {"trades_missing_usd", data.missing_usd},
               {"scc_keys", run.scc_counts.size()},
               {"candidates", run.candidates.size()},
               {"wash_sets", run.result.wash_sets.size()},
               {"wash_trades", wash},
               {"self_trades", self},
               {"threads", omp_get_max_threads()}};
    m.finished_at = utc_now();
    write_file(out / "manifest.json", format_manifest_json(m));
    std::cerr << "detect: " << data.trades.size() << " trades, " << run.candidates.size() << " candidates, "
              << run.result.wash_sets.size() << " wash sets, " << wash << " wash + " << self << " self-trades\n";
    return kExitOk;
}

struct QuantifyOptionsCli {
    DatasetOptions data;
    std::string detect_dir;
    std::string out;
    std::string basis = "eth";
    std::string fee_rate = "0.003";
};

std::string read_required(const fs::path& p) {
    if (!fs::exists(p)) throw DataError("missing detect output " + p.string());
    return read_file(p);
}

int cmd_quantify(QuantifyOptionsCli o) {
    const std::string started = utc_now();
    const fs::path dir(o.detect_dir);
    const RunManifest detect_manifest = parse_manifest_json(read_required(dir / "manifest.json"));
    if (o.data.trades.empty()) {
        // Reuse the inputs of the detect run.
        for (const ManifestInput& in : detect_manifest.inputs) {
            if (in.role == "trades") o.data.trades = in.path;
            if (in.role == "rates" && o.data.rates.empty()) o.data.rates = in.path;
            if (in.role == "tokens" && o.data.tokens.empty()) o.data.tokens = in.path;
        }
        if (o.data.trades.empty()) throw DataError("manifest names no trades input; pass --trades");
    }
    QuantifyOptions qo;
    if (o.basis == "eth") {
        qo.basis = VolumeBasis::eth;
    } else if (o.basis == "usd") {
        qo.basis = VolumeBasis::usd;
    } else {
        throw ConfigError("--volume-basis must be eth or usd");
    }
    const auto fee = Decimal::parse(o.fee_rate);
    if (!fee || fee->is_negative()) throw ConfigError("--fee-rate: not a non-negative decimal: " + o.fee_rate);
    qo.fee_rate = *fee;

    const auto rows = parse_labels_csv(read_required(dir / "labels.csv"));
    const auto wash_sets = parse_wash_sets_json(read_required(dir / "wash_sets.json"));
    const auto candidates = parse_candidates_json(read_required(dir / "candidates.json"));
    const DatasetPaths paths = to_paths(o.data);
    const Dataset data = load_dataset(paths);

    std::vector<Label> labels(data.trades.size(), Label::legitimate);
    if (!rows.empty() || !data.trades.empty()) {
        if (rows.size() != data.trades.size()) {
            throw DataError("labels.csv has " + std::to_string(rows.size()) + " rows but the dataset has " +
                            std::to_string(data.trades.size()) + " trades");
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].trade_id != data.trades[i].trade_id) {
                throw DataError("labels.csv row " + std::to_string(i + 2) + " is trade " + rows[i].trade_id +
                                ", expected " + data.trades[i].trade_id);
            }
            labels[i] = rows[i].label;
        }
    }

    const QuantifyReports r = run_quantify({data.trades, labels}, wash_sets, candidates, qo);
    const fs::path out = o.out.empty() ? dir : fs::path(o.out);
    ensure_dir(out);
    const std::vector<std::pair<std::string, std::string>> files = {
        {"token_wash_stats.csv", format_token_wash_stats_csv(r.shares)},
        {"token_share_ccdf.csv", format_share_ccdf_csv(r.shares)},
        {"structure_census.csv", format_structure_census_csv(r.structures)},
        {"monthly_volume.csv", format_time_series_csv(r.monthly)},
        {"weekly_share.csv", format_time_series_csv(r.weekly)},
        {"lifespan_medians.csv", format_lifespan_csv(r.lifespan)},
        {"lifespan_histogram.csv", format_lifespan_histogram_csv(r.lifespan)},
        {"summary.json", format_summary_json(r.summary)},
        {"trade_partners.csv", format_account_activity_csv(r.diagnostics)},
        {"trade_sizes.csv", format_size_histogram_csv(r.diagnostics)},
        {"diagnostics.json", format_diagnostics_json(r.diagnostics)},
    };
    RunManifest m;
    m.command = "quantify";
    m.version = WASHTRADE_VERSION;
    m.config = detect_manifest.config;
    m.config["volume_basis"] = o.basis;
    m.config["fee_rate"] = qo.fee_rate.to_string();
    m.inputs = describe_inputs(paths);
    m.inputs.push_back(describe_input("labels", dir / "labels.csv"));
    m.inputs.push_back(describe_input("wash_sets", dir / "wash_sets.json"));
    m.inputs.push_back(describe_input("candidates", dir / "candidates.json"));
    m.started_at = started;
    for (const auto& [name, content] : files) {
        write_file(out / name, content);
        m.outputs.push_back(name);
    }
    m.stats = {{"trades", data.trades.size()}, {"threads", omp_get_max_threads()}};
    m.finished_at = utc_now();
    write_file(out / "quantify_manifest.json", format_manifest_json(m));
    return kExitOk;
}

struct SynthOptions {
    std::string spec;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> repetitions;
    std::optional<std::size_t> background;
    std::string out;
};

int cmd_synth(const SynthOptions& o) {
    if (o.spec.empty() == o.preset.empty()) throw ConfigError("give exactly one of --spec and --preset");
    ScenarioSpec spec = o.spec.empty() ? preset_scenario(parse_structure_kind(o.preset))
                                       : parse_scenario_json(read_file(o.spec));
    if (o.seed) spec.seed = *o.seed;
    if (o.repetitions) {
        for (auto& s : spec.structures) s.repetitions = *o.repetitions;
    }
    if (o.background) spec.background.trades = *o.background;
    const GeneratedDataset d = generate(spec);
    const fs::path out(o.out);
    ensure_dir(out);
    write_file(out / "trades.csv", format_trades_csv(d.trades));
    write_file(out / "ground_truth.csv", format_ground_truth_csv(d.truth));
    std::cerr << "synth: " << d.trades.size() << " trades\n";
    return kExitOk;
}

int cmd_eval(const std::string& labels_path, const std::string& truth_path, const std::string& out) {
    const auto rows = parse_labels_csv(read_file(labels_path));
    const auto truth = parse_ground_truth_csv(read_file(truth_path));
    std::vector<LabeledId> labels;
    labels.reserve(rows.size());
    for (const auto& r : rows) labels.push_back({r.trade_id, r.label});
    const std::string json = format_eval_json(evaluate(labels, truth));
    if (out.empty()) {
        std::cout << json;
    } else {
        write_file(out, json);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wash-trade detection for limit-order-book DEX trade logs"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

    DetectOptions det;
    auto* detect = app.add_subcommand("detect", "Label wash trades and write the wash-set registry");
    add_dataset_options(detect, det.data, true);
    detect->add_option("--out", det.out, "Output directory")->required();
    detect->add_option("--scc-threshold", det.scc_threshold, "Minimum iterative SCC count of a candidate")
        ->capture_default_str();
    detect->add_option("--margin", det.margin, "Position tolerance as a fraction of the mean volume")
        ->capture_default_str();
    detect->add_option("--windows", det.windows, "Window ladder, e.g. 1h,1d,1w")->capture_default_str();
    detect->add_flag("--single-pass-per-window", det.single_pass, "Stop after the first wash set per window");
    detect->add_flag("--count-trivial-sccs", det.trivial_sccs, "Count loop-free single-vertex components");
    detect->add_flag("--float-fidelity", det.float_fidelity, "Match volumes in binary floating point");
    detect->add_option("--graph-dir", det.graph_dir, "Write per-market edge lists here");

    QuantifyOptionsCli qo;
    auto* quantify = app.add_subcommand("quantify", "Compute the reports from detect outputs");
    add_dataset_options(quantify, qo.data, false);
    quantify->add_option("--detect-dir", qo.detect_dir, "Directory written by detect")->required();
    quantify->add_option("--out", qo.out, "Output directory (default: the detect directory)");
    quantify->add_option("--volume-basis", qo.basis, "eth or usd")->capture_default_str();
    quantify->add_option("--fee-rate", qo.fee_rate, "Fee rate applied to wash USD volume")->capture_default_str();

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
    synth->add_option("--spec", so.spec, "Scenario JSON file");
    synth->add_option("--preset", so.preset, "loop, cycle, cycle_parallel_edges or cycle_with_subcycles");
    synth->add_option("--seed", so.seed, "Override the scenario seed");
    synth->add_option("--repetitions", so.repetitions, "Override every structure's repetition count");
    synth->add_option("--background", so.background, "Override the background trade count");
    synth->add_option("--out", so.out, "Output directory")->required();

    std::string labels_path, truth_path, eval_out;
    auto* eval = app.add_subcommand("eval", "Score labels against ground truth");
    eval->add_option("--labels", labels_path, "labels.csv from detect")->required();
    eval->add_option("--truth", truth_path, "ground_truth.csv from synth")->required();
    eval->add_option("--out", eval_out, "Metrics JSON file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (detect->parsed()) return cmd_detect(det);
        if (quantify->parsed()) return cmd_quantify(qo);
        if (synth->parsed()) return cmd_synth(so);
        if (eval->parsed()) return cmd_eval(labels_path, truth_path, eval_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
