#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "washtrade/candidates.hpp"
#include "washtrade/ingest.hpp"
#include "washtrade/matcher.hpp"
#include "washtrade/quantify.hpp"
#include "washtrade/trade.hpp"

namespace washtrade {

struct DatasetPaths {
    std::filesystem::path trades;
    InputFormat format = InputFormat::csv;
    std::optional<std::filesystem::path> rates;
    std::optional<std::filesystem::path> token_metadata;
};

struct Dataset {
    std::vector<Trade> trades;  // order-key order, USD attached when rates were given
    RejectionReport rejected;
    std::size_t input_records = 0;
    std::size_t missing_usd = 0;
};

/// load_trades -> preprocess -> join_usd.
Dataset load_dataset(const DatasetPaths& paths);

enum class Execution {
    parallel,   // batched SCC counting, incremental matcher, OpenMP over markets
    reference,  // one-iteration SCC loop, recompute matcher, serial
};

struct DetectionRun {
    SccCountMap scc_counts;
    std::vector<CandidateSet> candidates;
    DetectionResult result;
};

/// graph -> candidates -> matcher over trades in order-key order.
DetectionRun run_detection(std::span<const Trade> trades, const DetectionConfig& config,
                           Execution execution = Execution::parallel);

struct QuantifyOptions {
    VolumeBasis basis = VolumeBasis::eth;
    Decimal fee_rate = kDefaultFeeRate;
    std::size_t structure_cap = kDefaultStructureCap;
};

struct QuantifyReports {
    std::vector<StructureClass> structures;
    TokenShares shares;
    LifespanReport lifespan;
    std::vector<TimeSeriesPoint> monthly;
    std::vector<TimeSeriesPoint> weekly;
    SummaryReport summary;
    Diagnostics diagnostics;
};

QuantifyReports run_quantify(LabeledTrades data, std::span<const WashSet> wash_sets,
                             std::span<const SccKey> candidates, const QuantifyOptions& options = {});

}  // namespace washtrade
