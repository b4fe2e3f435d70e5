#include "washtrade/graph.hpp"

#include <algorithm>
#include <map>
#include <string_view>
#include <unordered_map>

namespace washtrade {

namespace {

TokenTradeGraph build_one(const MarketKey& market, std::span<const Trade> trades, const std::vector<std::size_t>& idx) {
    TokenTradeGraph g;
    g.market = market;

    std::vector<std::string_view> accounts;
    accounts.reserve(idx.size() * 2);
    for (std::size_t i : idx) {
        accounts.push_back(trades[i].seller);
        accounts.push_back(trades[i].buyer);
    }
    std::sort(accounts.begin(), accounts.end());
    accounts.erase(std::unique(accounts.begin(), accounts.end()), accounts.end());

    std::unordered_map<std::string_view, VertexId> id;
    id.reserve(accounts.size());
    g.vertices.reserve(accounts.size());
    for (std::size_t v = 0; v < accounts.size(); ++v) {
        id.emplace(accounts[v], static_cast<VertexId>(v));
        g.vertices.emplace_back(accounts[v]);
    }
    g.edges.reserve(idx.size());
    for (std::size_t i : idx) g.edges.push_back({id.at(trades[i].seller), id.at(trades[i].buyer), i});
    return g;
}

}  // namespace

std::vector<TokenTradeGraph> build_graphs(std::span<const Trade> trades) {
    std::map<MarketKey, std::vector<std::size_t>> groups;
    {
        // Resolve the market per trade through a view-keyed cache to avoid
        // building a MarketKey for every row.
        std::unordered_map<std::string_view, std::unordered_map<std::string_view, std::vector<std::size_t>*>> cache;
        for (std::size_t i = 0; i < trades.size(); ++i) {
            const Trade& t = trades[i];
            auto& slot = cache[t.exchange_id][t.token];
            if (slot == nullptr) slot = &groups[market_of(t)];
            slot->push_back(i);
        }
    }

    std::vector<const MarketKey*> keys;
    std::vector<const std::vector<std::size_t>*> members;
    for (const auto& [k, v] : groups) {
        keys.push_back(&k);
        members.push_back(&v);
    }
    std::vector<TokenTradeGraph> out(keys.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(keys.size()); ++m) {
        const auto mu = static_cast<std::size_t>(m);
        out[mu] = build_one(*keys[mu], trades, *members[mu]);
    }
    return out;
}

SimplifiedGraph simplify(const TokenTradeGraph& graph) {
    SimplifiedGraph s;
    s.market = graph.market;
    s.vertices = graph.vertices;
    std::vector<std::pair<VertexId, VertexId>> pairs;
    pairs.reserve(graph.edges.size());
    for (const TradeEdge& e : graph.edges) pairs.emplace_back(e.from, e.to);
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
        s.edges.push_back({pairs[i].first, pairs[i].second, static_cast<std::uint64_t>(j - i)});
        i = j;
    }
    return s;
}

std::string format_edge_list_csv(const SimplifiedGraph& graph) {
    std::string out = "from,to,multiplicity\n";
    for (const WeightedEdge& e : graph.edges) {
        out += graph.vertices[e.from];
        out += ',';
        out += graph.vertices[e.to];
        out += ',';
        out += std::to_string(e.multiplicity);
        out += '\n';
    }
    return out;
}

std::vector<std::vector<VertexId>> strongly_connected_components(std::span<const std::uint32_t> offsets,
                                                                 std::span<const VertexId> targets) {
    // Iterative Tarjan.
    const std::size_t n = offsets.empty() ? 0 : offsets.size() - 1;
    constexpr std::uint32_t kUnvisited = UINT32_MAX;
    std::vector<std::uint32_t> index(n, kUnvisited);
    std::vector<std::uint32_t> low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<VertexId> stack;
    std::vector<std::pair<VertexId, std::uint32_t>> call;  // (vertex, next edge position)
    std::vector<std::vector<VertexId>> out;
    std::uint32_t counter = 0;

    for (VertexId root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.emplace_back(root, offsets[root]);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < offsets[v + 1]) {
                const VertexId w = targets[pos++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, offsets[w]);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const VertexId done = v;
            call.pop_back();
            if (!call.empty()) {
                const VertexId parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                std::vector<VertexId> comp;
                VertexId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != done);
                out.push_back(std::move(comp));
            }
        }
    }
    return out;
}

}  // namespace washtrade
