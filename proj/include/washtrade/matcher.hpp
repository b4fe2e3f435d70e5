#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "washtrade/candidates.hpp"
#include "washtrade/decimal.hpp"
#include "washtrade/trade.hpp"

namespace washtrade {

/// account -> signed token position (bought minus sold).
using PositionMap = std::map<std::string, Decimal, std::less<>>;

/// Throws ContractError when the trades span more than one market.
PositionMap sum_positions(std::span<const Trade> trades);

/// m * mean(token_amount). Throws ContractError on an empty set.
Decimal tolerance(std::span<const Trade> trades, Decimal margin);

enum class Arithmetic {
    exact,    // fixed-point amounts, cross-multiplied 256-bit comparison
    float64,  // binary doubles throughout
};

/// Compact view of one trade for the matching kernels. `seller`/`buyer` are
/// dense participant ids local to the call.
struct MatchTrade {
    std::uint32_t seller;
    std::uint32_t buyer;
    Decimal volume;
};

/// Length of the longest prefix (>= 2) in which every participant's
/// |position| <= margin * mean volume, found by dropping trades from the end
/// with incremental position updates. nullopt when no prefix qualifies.
std::optional<std::size_t> longest_balanced_prefix(std::span<const MatchTrade> trades, Decimal margin,
                                                   Arithmetic arithmetic = Arithmetic::exact);

/// Same contract; recomputes every prefix's positions from scratch.
std::optional<std::size_t> longest_balanced_prefix_reference(std::span<const MatchTrade> trades, Decimal margin,
                                                             Arithmetic arithmetic = Arithmetic::exact);

/// |p| <= margin * volume_sum / count, evaluated exactly.
bool within_margin(Decimal abs_position, const Wide& volume_sum, std::size_t count, Decimal margin);

struct WashSet {
    std::size_t id = 0;
    MarketKey market;
    std::vector<std::string> candidate;  // SCC vertex set the set was found in; empty if none
    std::int64_t window_seconds = 0;
    std::int64_t window_start = 0;
    std::vector<std::size_t> trades;  // indices into the analysed trade sequence, order-key order
    std::vector<std::string> trade_ids;
    std::vector<std::string> participants;  // sorted
    Decimal mean_volume;
    Decimal tolerance;
};

/// Volume matching over one ordered, single-market trade sequence.
std::optional<WashSet> volume_match(std::span<const Trade> trades, Decimal margin,
                                    Arithmetic arithmetic = Arithmetic::exact);

enum class Label : std::uint8_t { legitimate, self_trade, wash };
std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view s);

struct DetectionConfig {
    std::uint64_t scc_threshold = 100;
    Decimal margin = Decimal::from_raw(Decimal::kOne / 100);  // 1%
    std::vector<std::int64_t> windows = {3600, 86400, 604800};
    bool repeat_within_window = true;
    bool count_trivial_sccs = false;
    bool float_fidelity = false;

    /// Throws ConfigError.
    void validate() const;
    [[nodiscard]] Arithmetic arithmetic() const { return float_fidelity ? Arithmetic::float64 : Arithmetic::exact; }
};

/// "1h,1d,1w" -> seconds. Units: s, m, h, d, w. Throws ConfigError.
std::vector<std::int64_t> parse_window_ladder(std::string_view text);
std::string format_window(std::int64_t seconds);

struct DetectionResult {
    std::vector<Label> labels;                         // one per trade
    std::vector<std::optional<std::size_t>> wash_set;  // wash-set id per trade
    std::vector<WashSet> wash_sets;                    // ids are 1-based positions
};

/// Self-trade pre-pass, then one volume-matching pass per window size over
/// every candidate's still-unlabeled trades. Markets run in parallel.
DetectionResult detect(std::span<const Trade> trades, std::span<const CandidateSet> candidates,
                       const DetectionConfig& config);

/// Serial path using the recompute-from-scratch kernel. Same output as detect().
DetectionResult detect_reference(std::span<const Trade> trades, std::span<const CandidateSet> candidates,
                                 const DetectionConfig& config);

}  // namespace washtrade
