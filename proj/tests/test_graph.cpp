#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "washtrade/graph.hpp"

using namespace washtrade;
using testing_support::trade;

TEST_CASE("build_graphs: one trade gives two vertices and one edge") {
    const std::vector<Trade> t = {trade("1", "A", "B", "5")};
    const auto g = build_graphs(t);
    REQUIRE(g.size() == 1);
    CHECK(g[0].vertices == std::vector<std::string>{"A", "B"});
    REQUIRE(g[0].edges.size() == 1);
    CHECK(g[0].edges[0].from == 0);
    CHECK(g[0].edges[0].to == 1);
    CHECK(g[0].edges[0].trade == 0);
}

TEST_CASE("build_graphs: a self-trade is a loop") {
    const std::vector<Trade> t = {trade("1", "A", "A", "5")};
    const auto g = build_graphs(t);
    REQUIRE(g.size() == 1);
    CHECK(g[0].vertices.size() == 1);
    CHECK(g[0].edges[0].from == g[0].edges[0].to);
    CHECK(simplify(g[0]).edges == std::vector<WeightedEdge>{{0, 0, 1}});
}

TEST_CASE("build_graphs: markets are separate graphs") {
    const std::vector<Trade> t = {trade("1", "A", "B", "1", 0, "T1"), trade("2", "B", "C", "1", 1, "T2"),
                                  trade("3", "C", "A", "1", 2, "T1"), trade("4", "A", "B", "1", 3, "T1", "other")};
    const auto g = build_graphs(t);
    REQUIRE(g.size() == 3);
    CHECK(g[0].market == MarketKey{"dex", "T1"});
    CHECK(g[0].edges.size() == 2);
    CHECK(g[1].market == MarketKey{"dex", "T2"});
    CHECK(g[1].edges.size() == 1);
    CHECK(g[2].market == MarketKey{"other", "T1"});
    CHECK(g[2].edges[0].trade == 3);
}

TEST_CASE("simplify") {
    SUBCASE("parallel edges collapse") {
        const std::vector<Trade> t = {trade("1", "A", "B", "1", 0), trade("2", "A", "B", "1", 1), trade("3", "A", "B", "1", 2)};
        CHECK(simplify(build_graphs(t)[0]).edges == std::vector<WeightedEdge>{{0, 1, 3}});
    }
    SUBCASE("direction is preserved") {
        const std::vector<Trade> t = {trade("1", "A", "B", "1", 0), trade("2", "B", "A", "1", 1)};
        CHECK(simplify(build_graphs(t)[0]).edges == std::vector<WeightedEdge>{{0, 1, 1}, {1, 0, 1}});
    }
    SUBCASE("empty graph") {
        TokenTradeGraph g;
        CHECK(simplify(g).edges.empty());
        CHECK(build_graphs({}).empty());
    }
}

TEST_CASE("format_edge_list_csv") {
    const std::vector<Trade> t = {trade("1", "A", "B", "1", 0), trade("2", "A", "B", "1", 1), trade("3", "B", "A", "1", 2)};
    CHECK(format_edge_list_csv(simplify(build_graphs(t)[0])) == "from,to,multiplicity\nA,B,2\nB,A,1\n");
}

TEST_CASE("property: graph invariants on random trades") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 100; ++round) {
        std::vector<Trade> trades;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            trades.push_back(trade("t" + std::to_string(1000 + i), "a" + std::to_string(rng() % 6),
                                   "a" + std::to_string(rng() % 6), "1", i, "T" + std::to_string(rng() % 3)));
        }
        const auto graphs = build_graphs(trades);
        std::size_t edges = 0;
        for (const auto& g : graphs) {
            edges += g.edges.size();
            CHECK(std::is_sorted(g.vertices.begin(), g.vertices.end()));
            std::vector<char> used(g.vertices.size(), 0);
            for (const auto& e : g.edges) {
                REQUIRE(e.from < g.vertices.size());
                REQUIRE(e.to < g.vertices.size());
                used[e.from] = used[e.to] = 1;
                const Trade& tr = trades[e.trade];
                CHECK(g.vertices[e.from] == tr.seller);
                CHECK(g.vertices[e.to] == tr.buyer);
                CHECK(market_of(tr) == g.market);
            }
            CHECK(std::all_of(used.begin(), used.end(), [](char c) { return c != 0; }));
            const auto s = simplify(g);
            std::uint64_t total = 0;
            for (const auto& e : s.edges) {
                CHECK(e.multiplicity > 0);
                total += e.multiplicity;
            }
            CHECK(total == g.edges.size());
        }
        CHECK(edges == trades.size());

        // Building two halves separately gives the same per-market edge multiset.
        const std::size_t cut = trades.size() / 2;
        const auto left = build_graphs(std::span(trades).first(cut));
        const auto right = build_graphs(std::span(trades).subspan(cut));
        std::map<std::tuple<MarketKey, std::string, std::string>, int> whole, parts;
        for (const auto& g : graphs)
            for (const auto& e : g.edges) ++whole[{g.market, g.vertices[e.from], g.vertices[e.to]}];
        for (const auto* side : {&left, &right})
            for (const auto& g : *side)
                for (const auto& e : g.edges) ++parts[{g.market, g.vertices[e.from], g.vertices[e.to]}];
        CHECK(whole == parts);
    }
}

TEST_CASE("strongly_connected_components matches a reachability oracle") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
        const int n = 1 + static_cast<int>(rng() % 9);
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        std::vector<std::pair<int, int>> edges;
        const int m = static_cast<int>(rng() % (2 * n + 1));
        for (int i = 0; i < m; ++i) edges.emplace_back(static_cast<int>(rng() % n), static_cast<int>(rng() % n));
        std::vector<std::uint32_t> offsets(n + 1, 0);
        for (auto [a, b] : edges) ++offsets[a + 1];
        for (int i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
        std::vector<VertexId> targets(edges.size());
        std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
        for (auto [a, b] : edges) targets[fill[a]++] = static_cast<VertexId>(b);

        for (int v = 0; v < n; ++v) reach[v][v] = 1;
        for (auto [a, b] : edges) reach[a][b] = 1;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = 1;

        const auto comps = strongly_connected_components(offsets, targets);
        std::vector<int> comp_of(n, -1);
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (VertexId v : comps[c]) {
                CHECK(comp_of[v] == -1);
                comp_of[v] = static_cast<int>(c);
            }
        for (int i = 0; i < n; ++i) {
            REQUIRE(comp_of[i] >= 0);
            for (int j = 0; j < n; ++j) CHECK((comp_of[i] == comp_of[j]) == (reach[i][j] && reach[j][i]));
        }
    }
}

TEST_CASE("strongly_connected_components handles a long path without recursion") {
    const std::uint32_t n = 200000;
    std::vector<std::uint32_t> offsets(n + 1);
    std::vector<VertexId> targets;
    for (std::uint32_t v = 0; v < n; ++v) {
        offsets[v] = v;
        targets.push_back((v + 1) % n);
    }
    offsets[n] = n;
    const auto comps = strongly_connected_components(offsets, targets);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].size() == n);
}
