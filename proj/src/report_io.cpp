#include "washtrade/report_io.hpp"

#include <cstdio>
#include <fstream>

#include <openssl/evp.h>

#include "csv_util.hpp"
#include "washtrade/calendar.hpp"
#include "washtrade/errors.hpp"

namespace washtrade {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void append_row(std::string& out, std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (std::string_view f : fields) {
        if (!first) out += ',';
        first = false;
        out += csv::escape(f);
    }
    out += '\n';
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string(what) + ": " + e.what());
    }
}

Decimal decimal_field(const json& j, const char* key) {
    const auto d = Decimal::parse(j.at(key).get<std::string>());
    if (!d) throw DataError(std::string("field ") + key + ": not a decimal");
    return *d;
}

std::string n(std::size_t v) { return std::to_string(v); }

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string format_labels_csv(std::span<const Trade> trades, const DetectionResult& result) {
    std::string out = "trade_id,label,wash_set_id\n";
    for (std::size_t i = 0; i < trades.size(); ++i) {
        const auto& id = result.wash_set[i];
        append_row(out, {trades[i].trade_id, to_string(result.labels[i]), id ? n(*id) : std::string()});
    }
    return out;
}

std::vector<LabelRow> parse_labels_csv(std::string_view text) {
    std::vector<LabelRow> out;
    std::vector<std::string> f;
    bool header = true;
    csv::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        const std::string where = "line " + std::to_string(line_no);
        if (!csv::split(line, f)) throw DataError(where + ": unbalanced quotes");
        if (header) {
            header = false;
            if (f.size() != 3 || f[0] != "trade_id" || f[1] != "label" || f[2] != "wash_set_id") {
                throw DataError(where + ": expected header trade_id,label,wash_set_id");
            }
            return;
        }
        if (f.size() != 3) throw DataError(where + ": expected 3 fields");
        LabelRow row;
        row.trade_id = f[0];
        const auto label = parse_label(f[1]);
        if (!label) throw DataError(where + ", field label: unknown label '" + f[1] + "'");
        row.label = *label;
        if (!f[2].empty()) {
            const auto id = csv::parse_int<std::size_t>(f[2]);
            if (!id) throw DataError(where + ", field wash_set_id: not an integer");
            row.wash_set_id = *id;
        }
        out.push_back(std::move(row));
    });
    if (header) throw DataError("labels file is empty");
    return out;
}

std::string format_wash_sets_json(std::span<const WashSet> wash_sets) {
    ordered_json arr = ordered_json::array();
    for (const WashSet& ws : wash_sets) {
        ordered_json j;
        j["id"] = ws.id;
        j["exchange_id"] = ws.market.exchange_id;
        j["token"] = ws.market.token;
        j["window"] = format_window(ws.window_seconds);
        j["window_seconds"] = ws.window_seconds;
        j["window_start"] = ws.window_start;
        j["trade_ids"] = ws.trade_ids;
        j["participants"] = ws.participants;
        j["mean_volume"] = ws.mean_volume.to_string();
        j["tolerance"] = ws.tolerance.to_string();
        j["candidate"] = ws.candidate;
        arr.push_back(std::move(j));
    }
    return dump(arr);
}

std::vector<WashSet> parse_wash_sets_json(std::string_view text) {
    const json arr = parse_json(text, "wash set registry");
    std::vector<WashSet> out;
    try {
        for (const json& j : arr) {
            WashSet ws;
            ws.id = j.at("id").get<std::size_t>();
            ws.market = {j.at("exchange_id").get<std::string>(), j.at("token").get<std::string>()};
            ws.window_seconds = j.at("window_seconds").get<std::int64_t>();
            ws.window_start = j.at("window_start").get<std::int64_t>();
            ws.trade_ids = j.at("trade_ids").get<std::vector<std::string>>();
            ws.participants = j.at("participants").get<std::vector<std::string>>();
            ws.mean_volume = decimal_field(j, "mean_volume");
            ws.tolerance = decimal_field(j, "tolerance");
            ws.candidate = j.at("candidate").get<std::vector<std::string>>();
            out.push_back(std::move(ws));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("wash set registry: ") + e.what());
    }
    return out;
}

std::string format_candidates_json(std::span<const CandidateSet> candidates) {
    ordered_json arr = ordered_json::array();
    for (const CandidateSet& c : candidates) {
        ordered_json j;
        j["exchange_id"] = c.key.market.exchange_id;
        j["token"] = c.key.market.token;
        j["vertex_set"] = c.key.vertex_set;
        j["count"] = c.count;
        j["member_trades"] = c.member_trades.size();
        arr.push_back(std::move(j));
    }
    return dump(arr);
}

std::vector<SccKey> parse_candidates_json(std::string_view text) {
    const json arr = parse_json(text, "candidates");
    std::vector<SccKey> out;
    try {
        for (const json& j : arr) {
            out.push_back({{j.at("exchange_id").get<std::string>(), j.at("token").get<std::string>()},
                           j.at("vertex_set").get<std::vector<std::string>>()});
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("candidates: ") + e.what());
    }
    return out;
}

std::string format_rejections_json(const RejectionReport& r, std::size_t input_records, std::size_t accepted,
                                   std::size_t missing_usd) {
    ordered_json j;
    j["input_records"] = input_records;
    j["accepted"] = accepted;
    j["missing_data"] = r.missing_data;
    j["failed_tx"] = r.failed_tx;
    j["token_token_trade"] = r.token_token_trade;
    j["zero_amount"] = r.zero_amount;
    j["duplicate"] = r.duplicate;
    j["out_of_range"] = r.out_of_range;
    j["trades_missing_usd"] = missing_usd;
    return dump(j);
}

std::string format_token_wash_stats_csv(const TokenShares& shares) {
    std::string out =
        "exchange_id,token,trades,wash_trades,self_trades,total_volume_eth,wash_volume_eth,total_volume_usd,"
        "wash_volume_usd,trades_missing_usd,wash_share,first_timestamp,last_timestamp\n";
    for (const TokenWashStats& s : shares.tokens) {
        append_row(out, {s.market.exchange_id, s.market.token, n(s.trades), n(s.wash_trades), n(s.self_trades),
                         s.total_eth.to_string(), s.wash_eth.to_string(), s.total_usd.to_string(),
                         s.wash_usd.to_string(), n(s.missing_usd), format_double(s.wash_share),
                         std::to_string(s.first_timestamp), std::to_string(s.last_timestamp)});
    }
    return out;
}

std::string format_share_ccdf_csv(const TokenShares& shares) {
    std::string out = "share,fraction\n";
    for (const auto& [share, fraction] : shares.ccdf) append_row(out, {format_double(share), format_double(fraction)});
    return out;
}

std::string format_structure_census_csv(std::span<const StructureClass> classes) {
    std::string out = "exchange_id,vertices,edges,canonical,instances\n";
    for (const StructureClass& c : classes) {
        append_row(out, {c.exchange_id, c.vertex_count == 0 ? "large" : n(c.vertex_count), n(c.edge_count),
                         c.canonical, n(c.instances)});
    }
    return out;
}

std::string format_time_series_csv(std::span<const TimeSeriesPoint> points) {
    std::string out =
        "exchange_id,period,period_start,trades,trades_missing_usd,wash_volume_usd,total_volume_usd,wash_share\n";
    for (const TimeSeriesPoint& p : points) {
        append_row(out, {p.exchange_id, p.period, format_iso_date(p.period_start), n(p.trades), n(p.missing_usd),
                         p.wash_usd.to_string(), p.total_usd.to_string(), format_double(p.wash_share)});
    }
    return out;
}

std::string format_lifespan_csv(const LifespanReport& report) {
    std::string out = "exchange_id,token,wash_trades,median_position\n";
    for (const LifespanMedian& m : report.tokens) {
        append_row(out, {m.market.exchange_id, m.market.token, n(m.wash_trades), format_double(m.median_position)});
    }
    return out;
}

std::string format_lifespan_histogram_csv(const LifespanReport& report) {
    std::string out = "bin_lower,bin_upper,tokens\n";
    const auto bins = static_cast<double>(report.histogram.size());
    for (std::size_t b = 0; b < report.histogram.size(); ++b) {
        append_row(out, {format_double(static_cast<double>(b) / bins), format_double(static_cast<double>(b + 1) / bins),
                         n(report.histogram[b])});
    }
    return out;
}

std::string format_summary_json(const SummaryReport& report) {
    ordered_json arr = ordered_json::array();
    for (const ExchangeSummary& s : report.exchanges) {
        ordered_json j;
        j["exchange_id"] = s.exchange_id;
        j["trades"] = s.trades;
        j["self_trades"] = s.self_trades;
        j["wash_trades"] = s.wash_trades;
        j["self_trade_share"] = s.self_trade_share;
        j["wash_trade_share"] = s.wash_trade_share;
        j["self_traded_volume_eth"] = s.self_traded_volume_eth.to_string();
        j["wash_volume_eth"] = s.wash_volume_eth.to_string();
        j["self_traded_volume_usd"] = s.self_traded_volume_usd.to_string();
        j["wash_volume_usd"] = s.wash_volume_usd.to_string();
        j["wash_fees_usd"] = s.wash_fees_usd.to_string();
        j["tokens"] = s.tokens;
        j["self_traded_tokens"] = s.self_traded_tokens;
        j["wash_tokens"] = s.wash_tokens;
        j["wash_token_share"] = s.wash_token_share;
        j["self_trader_accounts"] = s.self_trader_accounts;
        j["wash_trader_accounts"] = s.wash_trader_accounts;
        j["analyzed_sccs"] = s.analyzed_sccs;
        j["sccs_with_wash_trading"] = s.sccs_with_wash_trading;
        j["mean_tokens_washed_per_scc"] = s.mean_tokens_washed_per_scc;
        j["trades_missing_usd"] = s.trades_missing_usd;
        arr.push_back(std::move(j));
    }
    ordered_json root;
    root["exchanges"] = std::move(arr);
    return dump(root);
}

std::string format_account_activity_csv(const Diagnostics& d) {
    std::string out = "exchange_id,account,trades,partners,trades_per_partner\n";
    for (const AccountActivity& a : d.accounts) {
        append_row(out, {a.exchange_id, a.account, n(a.trades), n(a.partners), format_double(a.trades_per_partner)});
    }
    return out;
}

std::string format_size_histogram_csv(const Diagnostics& d) {
    std::string out = "exchange_id,bin,lower_eth,upper_eth,trades\n";
    for (const SizeBin& b : d.size_histogram) {
        append_row(out, {b.exchange_id, std::to_string(b.bin), format_double(b.lower_eth), format_double(b.upper_eth),
                         n(b.count)});
    }
    return out;
}

std::string format_diagnostics_json(const Diagnostics& d) {
    ordered_json j;
    j["accounts"] = d.accounts.size();
    j["trades_per_partner_median"] = d.ratio_median;
    j["trades_per_partner_p99"] = d.ratio_p99;
    return dump(j);
}

std::string format_eval_json(const EvalMetrics& m) {
    ordered_json j;
    j["true_positives"] = m.true_positives;
    j["false_positives"] = m.false_positives;
    j["false_negatives"] = m.false_negatives;
    j["true_negatives"] = m.true_negatives;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    ordered_json per = ordered_json::object();
    for (const auto& [name, r] : m.per_structure) {
        per[name] = {{"positives", r.positives}, {"detected", r.detected}, {"recall", r.recall}};
    }
    j["per_structure"] = std::move(per);
    return dump(j);
}

nlohmann::json config_to_json(const DetectionConfig& c) {
    std::vector<std::string> windows;
    for (std::int64_t w : c.windows) windows.push_back(format_window(w));
    return {{"scc_threshold", c.scc_threshold},
            {"margin", c.margin.to_string()},
            {"windows", windows},
            {"repeat_within_window", c.repeat_within_window},
            {"count_trivial_sccs", c.count_trivial_sccs},
            {"float_fidelity", c.float_fidelity}};
}

std::string format_manifest_json(const RunManifest& m) {
    ordered_json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["config"] = m.config;
    ordered_json inputs = ordered_json::array();
    for (const ManifestInput& in : m.inputs) inputs.push_back({{"role", in.role}, {"path", in.path}, {"sha256", in.sha256}});
    j["inputs"] = std::move(inputs);
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["outputs"] = m.outputs;
    j["stats"] = m.stats;
    return dump(j);
}

RunManifest parse_manifest_json(std::string_view text) {
    const json j = parse_json(text, "manifest");
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.version = j.value("version", "");
        m.config = j.value("config", json::object());
        for (const json& in : j.at("inputs")) {
            m.inputs.push_back({in.at("role").get<std::string>(), in.at("path").get<std::string>(),
                                in.value("sha256", "")});
        }
        m.started_at = j.value("started_at", "");
        m.finished_at = j.value("finished_at", "");
        m.outputs = j.value("outputs", std::vector<std::string>{});
        m.stats = j.value("stats", json::object());
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest: ") + e.what());
    }
    return m;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw DataError("write failed for " + path.string());
}

}  // namespace washtrade
