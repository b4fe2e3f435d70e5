#include "washtrade/candidates.hpp"

#include <algorithm>
#include <cstdio>
#include <string_view>
#include <unordered_map>

namespace washtrade {

namespace {

using VertexSet = std::vector<VertexId>;
using LocalCounts = std::map<VertexSet, std::uint64_t>;

struct Csr {
    std::vector<std::uint32_t> offsets;
    std::vector<VertexId> targets;
};

/// CSR over `edges` for vertices [0, n). Edge endpoints must already be local ids.
Csr make_csr(std::size_t n, std::span<const WeightedEdge> edges) {
    Csr csr;
    csr.offsets.assign(n + 1, 0);
    for (const auto& e : edges) ++csr.offsets[e.from + 1];
    for (std::size_t i = 0; i < n; ++i) csr.offsets[i + 1] += csr.offsets[i];
    csr.targets.resize(edges.size());
    std::vector<std::uint32_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
    for (const auto& e : edges) csr.targets[fill[e.from]++] = e.to;
    return csr;
}

struct Item {
    VertexSet vertices;               // sorted global ids
    std::vector<WeightedEdge> edges;  // internal edges, global ids
};

/// Splits the subgraph (vertices, edges) into its SCCs, each with its internal edges.
void split_into_components(const VertexSet& vertices, const std::vector<WeightedEdge>& edges, std::vector<Item>& out) {
    auto local = [&](VertexId g) {
        return static_cast<VertexId>(std::lower_bound(vertices.begin(), vertices.end(), g) - vertices.begin());
    };
    std::vector<WeightedEdge> local_edges;
    local_edges.reserve(edges.size());
    for (const auto& e : edges) local_edges.push_back({local(e.from), local(e.to), e.multiplicity});
    const Csr csr = make_csr(vertices.size(), local_edges);
    auto comps = strongly_connected_components(csr.offsets, csr.targets);

    std::vector<std::uint32_t> comp_of(vertices.size());
    const std::size_t first = out.size();
    for (std::uint32_t c = 0; c < comps.size(); ++c) {
        Item item;
        for (VertexId lv : comps[c]) {
            comp_of[lv] = c;
            item.vertices.push_back(vertices[lv]);
        }
        std::sort(item.vertices.begin(), item.vertices.end());
        out.push_back(std::move(item));
    }
    for (std::size_t i = 0; i < local_edges.size(); ++i) {
        const auto& le = local_edges[i];
        if (comp_of[le.from] == comp_of[le.to]) out[first + comp_of[le.from]].edges.push_back(edges[i]);
    }
}

LocalCounts count_batched(const SimplifiedGraph& g, SccCountOptions options) {
    LocalCounts counts;
    const std::size_t n = g.vertices.size();
    std::vector<std::uint64_t> multi_iterations(n, 0);

    VertexSet all(n);
    for (std::size_t v = 0; v < n; ++v) all[v] = static_cast<VertexId>(v);
    std::vector<Item> work;
    split_into_components(all, g.edges, work);

    while (!work.empty()) {
        Item item = std::move(work.back());
        work.pop_back();
        if (item.edges.empty()) continue;

        // The component survives unchanged until its lightest internal edge is gone.
        std::uint64_t k = UINT64_MAX;
        for (const auto& e : item.edges) k = std::min(k, e.multiplicity);
        const bool singleton = item.vertices.size() == 1;
        if (!singleton) {
            for (VertexId v : item.vertices) multi_iterations[v] += k;
            counts[item.vertices] += k;
        } else if (!options.count_trivial_sccs) {
            counts[item.vertices] += k;  // loop alive for k more iterations
        }

        std::vector<WeightedEdge> rest;
        for (const auto& e : item.edges) {
            if (e.multiplicity > k) rest.push_back({e.from, e.to, e.multiplicity - k});
        }
        if (rest.empty() || singleton) continue;
        split_into_components(item.vertices, rest, work);
    }

    if (options.count_trivial_sccs) {
        std::uint64_t iterations = 0;
        for (const auto& e : g.edges) iterations = std::max(iterations, e.multiplicity);
        for (std::size_t v = 0; v < n; ++v) {
            if (iterations > multi_iterations[v]) counts[{static_cast<VertexId>(v)}] += iterations - multi_iterations[v];
        }
    }
    return counts;
}

LocalCounts count_reference(const SimplifiedGraph& g, SccCountOptions options) {
    LocalCounts counts;
    const std::size_t n = g.vertices.size();
    std::vector<WeightedEdge> edges = g.edges;
    while (!edges.empty()) {
        const Csr csr = make_csr(n, edges);
        std::vector<char> has_loop(n, 0);
        for (const auto& e : edges) {
            if (e.from == e.to) has_loop[e.from] = 1;
        }
        for (auto& comp : strongly_connected_components(csr.offsets, csr.targets)) {
            if (comp.size() == 1 && !options.count_trivial_sccs && !has_loop[comp[0]]) continue;
            std::sort(comp.begin(), comp.end());
            ++counts[comp];
        }
        for (auto& e : edges) --e.multiplicity;
        std::erase_if(edges, [](const WeightedEdge& e) { return e.multiplicity == 0; });
    }
    return counts;
}

SccCountMap to_keys(const SimplifiedGraph& g, const LocalCounts& local) {
    SccCountMap out;
    for (const auto& [set, count] : local) {
        SccKey key{g.market, {}};
        key.vertex_set.reserve(set.size());
        for (VertexId v : set) key.vertex_set.push_back(g.vertices[v]);
        out.emplace_hint(out.end(), std::move(key), count);
    }
    return out;
}

template <typename CountFn>
SccCountMap count_all(std::span<const TokenTradeGraph> graphs, bool parallel, CountFn&& fn) {
    std::vector<SccCountMap> per(graphs.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(graphs.size()); ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const SimplifiedGraph s = simplify(graphs[iu]);
        per[iu] = to_keys(s, fn(s));
    }
    SccCountMap out;
    for (auto& m : per) out.merge(m);
    return out;
}

}  // namespace

SccCountMap iterative_scc_count(const SimplifiedGraph& graph, SccCountOptions options) {
    return to_keys(graph, count_batched(graph, options));
}

SccCountMap iterative_scc_count_reference(const SimplifiedGraph& graph, SccCountOptions options) {
    return to_keys(graph, count_reference(graph, options));
}

SccCountMap count_sccs(std::span<const TokenTradeGraph> graphs, SccCountOptions options) {
    return count_all(graphs, true, [&](const SimplifiedGraph& s) { return count_batched(s, options); });
}

SccCountMap count_sccs_reference(std::span<const TokenTradeGraph> graphs, SccCountOptions options) {
    return count_all(graphs, false, [&](const SimplifiedGraph& s) { return count_reference(s, options); });
}

std::vector<CandidateSet> select_candidates(const SccCountMap& counts, std::span<const Trade> trades,
                                            std::uint64_t threshold) {
    std::vector<CandidateSet> out;
    std::map<MarketKey, std::vector<std::size_t>> by_market;
    for (const auto& [key, count] : counts) {
        if (count < threshold) continue;
        out.push_back({key, count, {}});
        by_market.try_emplace(key.market);
    }
    if (out.empty()) return out;

    std::vector<std::size_t> unused;
    std::unordered_map<std::string_view, std::unordered_map<std::string_view, std::vector<std::size_t>*>> cache;
    for (std::size_t i = 0; i < trades.size(); ++i) {
        const Trade& t = trades[i];
        auto& slot = cache[t.exchange_id][t.token];
        if (slot == nullptr) {
            auto it = by_market.find(market_of(t));
            slot = it == by_market.end() ? &unused : &it->second;
        }
        if (slot != &unused) slot->push_back(i);
    }

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(out.size()); ++c) {
        CandidateSet& cand = out[static_cast<std::size_t>(c)];
        const auto& vs = cand.key.vertex_set;
        const auto in_set = [&](const std::string& a) { return std::binary_search(vs.begin(), vs.end(), a); };
        for (std::size_t i : by_market.at(cand.key.market)) {
            if (in_set(trades[i].seller) && in_set(trades[i].buyer)) cand.member_trades.push_back(i);
        }
    }
    return out;
}

std::vector<std::pair<std::uint64_t, double>> ccdf_scc_counts(const SccCountMap& counts) {
    std::vector<std::uint64_t> values;
    values.reserve(counts.size());
    for (const auto& [key, count] : counts) values.push_back(count);
    std::sort(values.begin(), values.end());
    std::vector<std::pair<std::uint64_t, double>> out;
    const auto total = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] == values[i - 1]) continue;
        out.emplace_back(values[i], static_cast<double>(values.size() - i) / total);
    }
    return out;
}

std::string format_ccdf_csv(const std::vector<std::pair<std::uint64_t, double>>& ccdf) {
    std::string out = "count,fraction\n";
    char buf[64];
    for (const auto& [count, fraction] : ccdf) {
        std::snprintf(buf, sizeof buf, "%llu,%.10g\n", static_cast<unsigned long long>(count), fraction);
        out += buf;
    }
    return out;
}

}  // namespace washtrade
