#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "washtrade/candidates.hpp"
#include "washtrade/decimal.hpp"
#include "washtrade/matcher.hpp"
#include "washtrade/trade.hpp"

namespace washtrade {

/// Trades with one label each. Self-trades count as wash activity in every report.
struct LabeledTrades {
    std::span<const Trade> trades;
    std::span<const Label> labels;

    [[nodiscard]] bool is_wash(std::size_t i) const { return labels[i] != Label::legitimate; }
};

// -- structure census ---------------------------------------------------------

inline constexpr std::size_t kDefaultStructureCap = 8;

struct StructureClass {
    std::string exchange_id;
    std::size_t vertex_count = 0;  // 0 for the "large" bucket
    std::size_t edge_count = 0;    // simple edges incl. loops; 0 for "large"
    std::string canonical;         // e.g. "0>1 1>0", or "large"
    std::size_t instances = 0;
};

/// Canonical form of a small simple digraph: edges of the lexicographically
/// largest adjacency matrix over all vertex relabelings, as "i>j" tokens.
std::string canonical_form(std::size_t vertex_count, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

/// Weakly connected components of each market's wash subgraph, classified
/// up to isomorphism and counted per exchange.
std::vector<StructureClass> structure_census(LabeledTrades data, std::size_t vertex_cap = kDefaultStructureCap);

// -- per-token shares ---------------------------------------------------------

enum class VolumeBasis { eth, usd };

struct TokenWashStats {
    MarketKey market;
    std::size_t trades = 0;
    std::size_t wash_trades = 0;  // includes self-trades
    std::size_t self_trades = 0;
    Decimal total_eth;
    Decimal wash_eth;
    Decimal total_usd;
    Decimal wash_usd;
    std::size_t missing_usd = 0;
    double wash_share = 0.0;  // wash / total on the chosen basis
    std::int64_t first_timestamp = 0;
    std::int64_t last_timestamp = 0;
};

struct TokenShares {
    std::vector<TokenWashStats> tokens;             // sorted by market
    std::vector<std::pair<double, double>> ccdf;    // (share, fraction of tokens with share >= it)
};

TokenShares token_wash_shares(LabeledTrades data, VolumeBasis basis = VolumeBasis::eth);

// -- lifespan -----------------------------------------------------------------

struct LifespanMedian {
    MarketKey market;
    std::size_t wash_trades = 0;
    double median_position = 0.0;
};

struct LifespanReport {
    std::vector<LifespanMedian> tokens;
    std::vector<std::size_t> histogram;  // equal-width bins over [0, 1]; 1.0 lands in the last bin
};

LifespanReport lifespan_positions(LabeledTrades data, std::size_t bins = 20);

// -- time series --------------------------------------------------------------

enum class Granularity { month, iso_week };

struct TimeSeriesPoint {
    std::string exchange_id;
    std::int64_t period_start = 0;  // days since epoch
    std::string period;             // "2018-01" or "2018-W05"
    std::size_t trades = 0;
    std::size_t missing_usd = 0;
    Decimal wash_usd;
    Decimal total_usd;
    double wash_share = 0.0;
};

/// Buckets are emitted only when they contain trades. Trades without a USD
/// value are left out of the sums and counted in `missing_usd`.
std::vector<TimeSeriesPoint> volume_time_series(LabeledTrades data, Granularity granularity);

// -- summary ------------------------------------------------------------------

inline const Decimal kDefaultFeeRate = Decimal::from_raw(Decimal::kOne * 3 / 1000);

struct ExchangeSummary {
    std::string exchange_id;
    std::size_t trades = 0;
    std::size_t self_trades = 0;
    std::size_t wash_trades = 0;  // includes self-trades
    double self_trade_share = 0.0;
    double wash_trade_share = 0.0;
    Decimal self_traded_volume_eth;
    Decimal wash_volume_eth;
    Decimal self_traded_volume_usd;
    Decimal wash_volume_usd;
    Decimal wash_fees_usd;
    std::size_t tokens = 0;
    std::size_t self_traded_tokens = 0;
    std::size_t wash_tokens = 0;
    double wash_token_share = 0.0;
    std::size_t self_trader_accounts = 0;
    std::size_t wash_trader_accounts = 0;
    std::size_t analyzed_sccs = 0;
    std::size_t sccs_with_wash_trading = 0;
    double mean_tokens_washed_per_scc = 0.0;
    std::size_t trades_missing_usd = 0;
};

struct SummaryReport {
    std::vector<ExchangeSummary> exchanges;  // sorted by exchange id
};

/// An SCC is identified by (exchange, vertex set) across tokens.
SummaryReport summary(LabeledTrades data, std::span<const WashSet> wash_sets, std::span<const SccKey> candidates,
                      Decimal fee_rate = kDefaultFeeRate);

// -- diagnostics --------------------------------------------------------------

struct AccountActivity {
    std::string exchange_id;
    std::string account;
    std::size_t trades = 0;
    std::size_t partners = 0;
    double trades_per_partner = 0.0;
};

struct SizeBin {
    std::string exchange_id;
    int bin = 0;  // covers [10^(bin/b), 10^((bin+1)/b)) ETH for b bins per decade
    double lower_eth = 0.0;
    double upper_eth = 0.0;
    std::size_t count = 0;
};

struct Diagnostics {
    std::vector<AccountActivity> accounts;  // sorted by (exchange, account)
    double ratio_median = 0.0;
    double ratio_p99 = 0.0;
    std::vector<SizeBin> size_histogram;
};

/// Linear-interpolation quantile of an unsorted sample (q in [0, 1]). Empty -> 0.
double quantile(std::vector<double> values, double q);

Diagnostics diagnostics(std::span<const Trade> trades, int bins_per_decade = 10);

}  // namespace washtrade
