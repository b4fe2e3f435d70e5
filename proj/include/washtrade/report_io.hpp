#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "washtrade/candidates.hpp"
#include "washtrade/ingest.hpp"
#include "washtrade/matcher.hpp"
#include "washtrade/quantify.hpp"
#include "washtrade/synth.hpp"

namespace washtrade {

/// "%.10g"; every floating-point report column uses it.
std::string format_double(double v);

// -- detection outputs --------------------------------------------------------

/// `trade_id,label,wash_set_id` in order-key order; the id is empty for unmatched trades.
std::string format_labels_csv(std::span<const Trade> trades, const DetectionResult& result);

struct LabelRow {
    std::string trade_id;
    Label label = Label::legitimate;
    std::optional<std::size_t> wash_set_id;
};
std::vector<LabelRow> parse_labels_csv(std::string_view text);

std::string format_wash_sets_json(std::span<const WashSet> wash_sets);
/// Restores every field except the trade indices.
std::vector<WashSet> parse_wash_sets_json(std::string_view text);

std::string format_candidates_json(std::span<const CandidateSet> candidates);
std::vector<SccKey> parse_candidates_json(std::string_view text);

std::string format_rejections_json(const RejectionReport& rejected, std::size_t input_records, std::size_t accepted,
                                   std::size_t missing_usd);

// -- quantify outputs ---------------------------------------------------------

std::string format_token_wash_stats_csv(const TokenShares& shares);
std::string format_share_ccdf_csv(const TokenShares& shares);
std::string format_structure_census_csv(std::span<const StructureClass> classes);
std::string format_time_series_csv(std::span<const TimeSeriesPoint> points);
std::string format_lifespan_csv(const LifespanReport& report);
std::string format_lifespan_histogram_csv(const LifespanReport& report);
std::string format_summary_json(const SummaryReport& report);
std::string format_account_activity_csv(const Diagnostics& d);
std::string format_size_histogram_csv(const Diagnostics& d);
std::string format_diagnostics_json(const Diagnostics& d);

std::string format_eval_json(const EvalMetrics& m);

// -- run manifest -------------------------------------------------------------

struct ManifestInput {
    std::string role;
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    std::string version;
    nlohmann::json config = nlohmann::json::object();
    std::vector<ManifestInput> inputs;
    std::string started_at;   // ISO-8601 UTC
    std::string finished_at;
    std::vector<std::string> outputs;
    nlohmann::json stats = nlohmann::json::object();
};

std::string format_manifest_json(const RunManifest& m);
RunManifest parse_manifest_json(std::string_view text);

nlohmann::json config_to_json(const DetectionConfig& config);

std::string sha256_hex(std::string_view bytes);

/// Writes the whole file or throws DataError.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace washtrade
