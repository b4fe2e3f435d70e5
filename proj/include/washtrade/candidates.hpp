#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "washtrade/graph.hpp"
#include "washtrade/trade.hpp"

namespace washtrade {

/// A market plus a sorted, non-empty set of account addresses.
struct SccKey {
    MarketKey market;
    std::vector<std::string> vertex_set;

    friend auto operator<=>(const SccKey&, const SccKey&) = default;
    friend bool operator==(const SccKey&, const SccKey&) = default;
};

using SccCountMap = std::map<SccKey, std::uint64_t>;

struct SccCountOptions {
    /// Also count loop-free single-vertex components (every vertex stays in
    /// V for every iteration). Off by default: such components hold no cycle.
    bool count_trivial_sccs = false;
};

/// Iterative SCC counting. Components are counted once per iteration in
/// which they exist; iterations between edge removals are batched, which
/// gives the same map as the one-decrement-per-iteration loop.
SccCountMap iterative_scc_count(const SimplifiedGraph& graph, SccCountOptions options = {});

/// Literal one-iteration-at-a-time loop. Kept for differential testing.
SccCountMap iterative_scc_count_reference(const SimplifiedGraph& graph, SccCountOptions options = {});

/// Counts over all markets (parallel over markets); keys are disjoint per market.
SccCountMap count_sccs(std::span<const TokenTradeGraph> graphs, SccCountOptions options = {});
SccCountMap count_sccs_reference(std::span<const TokenTradeGraph> graphs, SccCountOptions options = {});

struct CandidateSet {
    SccKey key;
    std::uint64_t count = 0;
    std::vector<std::size_t> member_trades;  // indices into the trade sequence, order-key order
};

/// Keys with count >= threshold, each with every same-market trade whose
/// seller and buyer are both in the vertex set. Sorted by key.
std::vector<CandidateSet> select_candidates(const SccCountMap& counts, std::span<const Trade> trades,
                                            std::uint64_t threshold);

/// (count, fraction of keys with at least that count) for every distinct count, ascending.
std::vector<std::pair<std::uint64_t, double>> ccdf_scc_counts(const SccCountMap& counts);

std::string format_ccdf_csv(const std::vector<std::pair<std::uint64_t, double>>& ccdf);

}  // namespace washtrade
