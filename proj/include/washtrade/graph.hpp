#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "washtrade/trade.hpp"

namespace washtrade {

using VertexId = std::uint32_t;

/// One trade as a directed edge (token flow). `trade` indexes the trade
/// sequence the graph was built from.
struct TradeEdge {
    VertexId from;
    VertexId to;
    std::size_t trade;
};

/// Directed trade multigraph of one market. Vertex ids follow the
/// lexicographic order of the account addresses in `vertices`.
struct TokenTradeGraph {
    MarketKey market;
    std::vector<std::string> vertices;
    std::vector<TradeEdge> edges;  // in order-key order
};

struct WeightedEdge {
    VertexId from;
    VertexId to;
    std::uint64_t multiplicity;

    friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

/// Parallel edges collapsed into multiplicities; edges sorted by (from, to).
struct SimplifiedGraph {
    MarketKey market;
    std::vector<std::string> vertices;
    std::vector<WeightedEdge> edges;
};

/// Partitions `trades` (already in order-key order) into one graph per
/// market, sorted by market. Markets are built in parallel.
std::vector<TokenTradeGraph> build_graphs(std::span<const Trade> trades);

SimplifiedGraph simplify(const TokenTradeGraph& graph);

/// Edge list `from,to,multiplicity` using account addresses.
std::string format_edge_list_csv(const SimplifiedGraph& graph);

/// Strongly connected components of a digraph given as a CSR adjacency
/// (`offsets.size() == vertex_count + 1`). Components come out in reverse
/// topological order; members are unsorted.
std::vector<std::vector<VertexId>> strongly_connected_components(std::span<const std::uint32_t> offsets,
                                                                 std::span<const VertexId> targets);

}  // namespace washtrade
