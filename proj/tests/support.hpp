#pragma once

// Fixture builders and independent oracles shared by the test binaries.
// The oracles use exact rationals and dense reachability matrices so they
// share no code path with the library kernels they check.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "washtrade/decimal.hpp"
#include "washtrade/graph.hpp"
#include "washtrade/matcher.hpp"
#include "washtrade/trade.hpp"

namespace testing_support {

using washtrade::Decimal;
using washtrade::Trade;
using Rational = boost::multiprecision::cpp_rational;

inline Decimal dec(const char* s) { return *Decimal::parse(s); }

inline Trade trade(std::string id, std::string seller, std::string buyer, const char* amount, std::int64_t ts = 0,
                   std::string token = "0xtoken", std::string exchange = "dex") {
    Trade t;
    t.trade_id = std::move(id);
    t.exchange_id = std::move(exchange);
    t.timestamp = ts;
    t.block_number = static_cast<std::uint64_t>(ts / 15);
    t.seller = std::move(seller);
    t.buyer = std::move(buyer);
    t.token = std::move(token);
    t.token_amount = dec(amount);
    t.eth_amount = dec(amount);
    return t;
}

inline Rational rational(Decimal d) {
    // Exact value raw / 10^18 without touching the library's wide arithmetic.
    const __int128 r = d.raw();
    const bool neg = r < 0;
    unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(r) : static_cast<unsigned __int128>(r);
    boost::multiprecision::cpp_int num = static_cast<std::uint64_t>(mag >> 64);
    num <<= 64;
    num += static_cast<std::uint64_t>(mag);
    if (neg) num = -num;
    return Rational(num, boost::multiprecision::cpp_int("1000000000000000000"));
}

struct OracleTrade {
    int seller;
    int buyer;
    Decimal volume;
};

/// Balance condition evaluated in exact rationals: every |p_i| <= m * mean volume.
inline bool balanced(const std::vector<OracleTrade>& trades, Decimal margin) {
    if (trades.empty()) return false;
    std::map<int, Rational> pos;
    Rational sum = 0;
    for (const auto& t : trades) {
        const Rational v = rational(t.volume);
        pos[t.seller] -= v;
        pos[t.buyer] += v;
        sum += v;
    }
    const Rational bound = rational(margin) * sum / static_cast<int>(trades.size());
    for (const auto& [who, p] : pos) {
        if (abs(p) > bound) return false;
    }
    return true;
}

/// Brute force over all n-1 prefixes of length >= 2, longest first.
inline std::optional<std::size_t> prefix_oracle(const std::vector<OracleTrade>& trades, Decimal margin) {
    for (std::size_t len = trades.size(); len >= 2; --len) {
        if (balanced({trades.begin(), trades.begin() + static_cast<std::ptrdiff_t>(len)}, margin)) return len;
    }
    return std::nullopt;
}

/// Bitmasks of every subset of size >= 2 that is balanced.
inline std::set<std::uint32_t> powerset_family(const std::vector<OracleTrade>& trades, Decimal margin) {
    std::set<std::uint32_t> out;
    const std::uint32_t n = static_cast<std::uint32_t>(trades.size());
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) < 2) continue;
        std::vector<OracleTrade> sub;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) sub.push_back(trades[i]);
        }
        if (balanced(sub, margin)) out.insert(mask);
    }
    return out;
}

inline std::vector<washtrade::MatchTrade> to_match(const std::vector<OracleTrade>& trades) {
    std::vector<washtrade::MatchTrade> out;
    for (const auto& t : trades) {
        out.push_back({static_cast<std::uint32_t>(t.seller), static_cast<std::uint32_t>(t.buyer), t.volume});
    }
    return out;
}

/// Random trade run over a few participants with volumes near 100 so that
/// balanced prefixes actually occur.
inline std::vector<OracleTrade> random_run(std::mt19937_64& rng, std::size_t n, int participants) {
    std::vector<OracleTrade> out;
    std::uniform_int_distribution<int> who(0, participants - 1);
    std::uniform_int_distribution<int> vol(0, 6);
    static const char* kVolumes[] = {"100", "100", "100", "100.5", "99.5", "101", "50"};
    for (std::size_t i = 0; i < n; ++i) {
        const int s = who(rng);
        int b = who(rng);
        if (participants > 1 && b == s && rng() % 4 != 0) b = (s + 1) % participants;
        out.push_back({s, b, dec(kVolumes[vol(rng)])});
    }
    return out;
}

/// Iterative SCC counting simulated literally with a Floyd-Warshall reachability matrix
/// per iteration. Keys are sorted vertex-index sets.
inline std::map<std::vector<int>, std::uint64_t> scc_count_oracle(int n, std::map<std::pair<int, int>, std::uint64_t> edges,
                                                                  bool count_trivial) {
    std::map<std::vector<int>, std::uint64_t> counts;
    while (!edges.empty()) {
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        for (int v = 0; v < n; ++v) reach[v][v] = 1;
        std::vector<char> loop(n, 0);
        for (const auto& [e, m] : edges) {
            reach[e.first][e.second] = 1;
            if (e.first == e.second) loop[e.first] = 1;
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
        std::vector<char> done(n, 0);
        for (int v = 0; v < n; ++v) {
            if (done[v]) continue;
            std::vector<int> comp;
            for (int u = 0; u < n; ++u) {
                if (reach[v][u] && reach[u][v]) {
                    comp.push_back(u);
                    done[u] = 1;
                }
            }
            if (comp.size() == 1 && !loop[v] && !count_trivial) continue;
            ++counts[comp];
        }
        for (auto it = edges.begin(); it != edges.end();) {
            if (--it->second == 0) {
                it = edges.erase(it);
            } else {
                ++it;
            }
        }
    }
    return counts;
}

inline std::string vname(int v) { return "v" + std::to_string(v); }

/// Trades realizing a multigraph on vertices v0..v(n-1); every vertex appears
/// in at least one edge of `edges`.
inline std::vector<Trade> trades_for(const std::map<std::pair<int, int>, std::uint64_t>& edges) {
    std::vector<Trade> out;
    std::int64_t ts = 0;
    for (const auto& [e, m] : edges) {
        for (std::uint64_t k = 0; k < m; ++k) {
            out.push_back(trade("t" + std::to_string(out.size()), vname(e.first), vname(e.second), "1", ts++));
        }
    }
    std::sort(out.begin(), out.end(), washtrade::OrderKeyLess{});
    return out;
}

}  // namespace testing_support
