#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "washtrade/decimal.hpp"
#include "washtrade/matcher.hpp"
#include "washtrade/trade.hpp"

namespace washtrade {

enum class StructureKind { loop, cycle, cycle_parallel_edges, cycle_with_subcycles, custom };
std::string_view to_string(StructureKind kind);
StructureKind parse_structure_kind(std::string_view s);

enum class Placement {
    single_window,          // every repetition inside one aligned window
    window_per_repetition,  // repetition r in the r-th aligned window
    uniform_span,           // trades scattered over repetitions * window seconds; no guarantee
};
std::string_view to_string(Placement placement);
Placement parse_placement(std::string_view s);

/// Edge of a custom structure. Volume is `weight * base_volume`; only wash
/// edges count as ground-truth positives.
struct CustomEdge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    Decimal weight = Decimal::from_int(1);
    bool wash = true;
};

struct StructureSpec {
    StructureKind kind = StructureKind::cycle;
    std::size_t participants = 3;  // ignored by loop, cycle_with_subcycles and custom
    Decimal base_volume = Decimal::from_int(100);
    /// Deviation added to one wash trade per repetition, as a fraction of the
    /// repetition's mean wash volume.
    Decimal jitter;
    std::size_t repetitions = 100;
    std::string token;  // generated when empty
    Placement placement = Placement::single_window;
    std::int64_t window_seconds = 3600;
    /// Appends a legitimate trade between two participants to each repetition
    /// (the five-trader preset: 30 tokens from trader 5 to 4, ordered last).
    bool hidden_legit_trade = false;
    std::vector<CustomEdge> custom_edges;
};

struct BackgroundSpec {
    std::size_t trades = 0;
    std::size_t tokens = 1;         // includes the structure tokens
    std::size_t seller_pool = 64;   // persistent sellers; buyers are always fresh
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    std::string exchange_id = "synth";
    std::int64_t start_time = 1514764800;  // 2018-01-01T00:00:00Z
    Decimal margin = Decimal::from_raw(Decimal::kOne / 100);
    std::vector<StructureSpec> structures;
    BackgroundSpec background;

    /// Throws ConfigError.
    void validate() const;
};

/// One structure scenario with the canonical shape for `kind`
/// (custom is not a preset). cycle_with_subcycles turns on the hidden trade
/// and places each repetition in its own window.
ScenarioSpec preset_scenario(StructureKind kind, std::size_t repetitions = 100, std::uint64_t seed = 1);

struct TruthEntry {
    std::string trade_id;
    Label label = Label::legitimate;
    std::string structure;  // "<index>:<kind>" for structure trades, empty for background
};

struct GeneratedDataset {
    std::vector<Trade> trades;       // order-key order
    std::vector<TruthEntry> truth;   // parallel to trades
};

GeneratedDataset generate(const ScenarioSpec& spec);

struct StructureRecall {
    std::size_t positives = 0;
    std::size_t detected = 0;
    double recall = 0.0;
};

struct EvalMetrics {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t true_negatives = 0;
    double precision = 0.0;  // 1 when nothing is predicted positive
    double recall = 0.0;     // 1 when the truth has no positives
    std::map<std::string, StructureRecall> per_structure;
};

struct LabeledId {
    std::string trade_id;
    Label label = Label::legitimate;
};

/// Self-trade and wash both count as positive. Throws ContractError when the
/// two id sets differ or contain duplicates.
EvalMetrics evaluate(std::span<const LabeledId> labels, std::span<const TruthEntry> truth);

/// `trade_id,label,structure`
std::string format_ground_truth_csv(std::span<const TruthEntry> truth);
std::vector<TruthEntry> parse_ground_truth_csv(std::string_view text);

/// JSON scenario file. Throws ConfigError on unknown keys or bad values.
ScenarioSpec parse_scenario_json(std::string_view text);

}  // namespace washtrade
