#include "washtrade/quantify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "washtrade/calendar.hpp"

namespace washtrade {

namespace {

struct MarketGroup {
    MarketKey market;
    std::vector<std::size_t> trades;  // order-key order
};

std::vector<MarketGroup> group_by_market(std::span<const Trade> trades) {
    std::map<MarketKey, std::vector<std::size_t>> groups;
    std::unordered_map<std::string_view, std::unordered_map<std::string_view, std::vector<std::size_t>*>> cache;
    for (std::size_t i = 0; i < trades.size(); ++i) {
        auto& slot = cache[trades[i].exchange_id][trades[i].token];
        if (slot == nullptr) slot = &groups[market_of(trades[i])];
        slot->push_back(i);
    }
    std::vector<MarketGroup> out;
    out.reserve(groups.size());
    for (auto& [k, v] : groups) out.push_back({k, std::move(v)});
    return out;
}

double ratio(Decimal part, Decimal whole) {
    if (whole.raw() <= 0) return 0.0;
    return part.to_double() / whole.to_double();
}

double ratio(std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

struct DisjointSets {
    std::vector<std::uint32_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

struct ComponentShape {
    std::size_t vertex_count;
    std::size_t edge_count;
    std::string canonical;
};

std::vector<ComponentShape> market_components(LabeledTrades data, const MarketGroup& group, std::size_t cap) {
    std::unordered_map<std::string_view, std::uint32_t> ids;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    auto id_of = [&](const std::string& a) {
        return ids.try_emplace(a, static_cast<std::uint32_t>(ids.size())).first->second;
    };
    for (std::size_t i : group.trades) {
        if (!data.is_wash(i)) continue;
        const std::uint32_t s = id_of(data.trades[i].seller);
        const std::uint32_t b = id_of(data.trades[i].buyer);
        edges.emplace_back(s, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    DisjointSets ds(ids.size());
    for (const auto& [s, b] : edges) ds.unite(s, b);
    std::map<std::uint32_t, std::vector<std::uint32_t>> members;
    for (std::uint32_t v = 0; v < ids.size(); ++v) members[ds.find(v)].push_back(v);

    std::vector<ComponentShape> out;
    for (const auto& [root, verts] : members) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> local;
        for (const auto& [s, b] : edges) {
            if (ds.find(s) != root) continue;
            const auto ls = static_cast<std::uint32_t>(std::lower_bound(verts.begin(), verts.end(), s) - verts.begin());
            const auto lb = static_cast<std::uint32_t>(std::lower_bound(verts.begin(), verts.end(), b) - verts.begin());
            local.emplace_back(ls, lb);
        }
        if (verts.size() > cap) {
            out.push_back({0, 0, "large"});
        } else {
            out.push_back({verts.size(), local.size(), canonical_form(verts.size(), local)});
        }
    }
    return out;
}

}  // namespace

std::string canonical_form(std::size_t n, std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
    // Adjacency as an n*n bit string, row-major, most significant bit first.
    // The canonical labeling maximizes that number; n <= 8 keeps it in 64 bits.
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::uint64_t best = 0;
    std::vector<std::uint32_t> best_perm = perm;
    const std::size_t bits = n * n;
    do {
        std::uint64_t code = 0;
        for (const auto& [u, v] : edges) code |= std::uint64_t{1} << (bits - 1 - (perm[u] * n + perm[v]));
        if (code > best) {
            best = code;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<std::pair<std::uint32_t, std::uint32_t>> relabeled;
    for (const auto& [u, v] : edges) relabeled.emplace_back(best_perm[u], best_perm[v]);
    std::sort(relabeled.begin(), relabeled.end());
    std::string out;
    for (const auto& [u, v] : relabeled) {
        if (!out.empty()) out += ' ';
        out += std::to_string(u) + '>' + std::to_string(v);
    }
    return out;
}

std::vector<StructureClass> structure_census(LabeledTrades data, std::size_t vertex_cap) {
    const auto groups = group_by_market(data.trades);
    std::vector<std::vector<ComponentShape>> per(groups.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(groups.size()); ++g) {
        const auto gu = static_cast<std::size_t>(g);
        per[gu] = market_components(data, groups[gu], vertex_cap);
    }

    // (exchange, size with "large" last, canonical) -> class
    std::map<std::tuple<std::string, std::size_t, std::string>, StructureClass> classes;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (const ComponentShape& c : per[g]) {
            const std::size_t order = c.vertex_count == 0 ? SIZE_MAX : c.vertex_count;
            auto [it, inserted] = classes.try_emplace({groups[g].market.exchange_id, order, c.canonical});
            if (inserted) it->second = {groups[g].market.exchange_id, c.vertex_count, c.edge_count, c.canonical, 0};
            ++it->second.instances;
        }
    }
    std::vector<StructureClass> out;
    out.reserve(classes.size());
    for (auto& [k, v] : classes) out.push_back(std::move(v));
    return out;
}

TokenShares token_wash_shares(LabeledTrades data, VolumeBasis basis) {
    TokenShares out;
    for (const MarketGroup& g : group_by_market(data.trades)) {
        TokenWashStats s;
        s.market = g.market;
        s.first_timestamp = data.trades[g.trades.front()].timestamp;
        s.last_timestamp = data.trades[g.trades.back()].timestamp;
        for (std::size_t i : g.trades) {
            const Trade& t = data.trades[i];
            const bool wash = data.is_wash(i);
            ++s.trades;
            s.total_eth += t.eth_amount;
            if (wash) {
                ++s.wash_trades;
                s.wash_eth += t.eth_amount;
            }
            if (data.labels[i] == Label::self_trade) ++s.self_trades;
            if (t.usd_value) {
                s.total_usd += *t.usd_value;
                if (wash) s.wash_usd += *t.usd_value;
            } else {
                ++s.missing_usd;
            }
        }
        s.wash_share = basis == VolumeBasis::eth ? ratio(s.wash_eth, s.total_eth) : ratio(s.wash_usd, s.total_usd);
        out.tokens.push_back(std::move(s));
    }

    std::vector<double> shares;
    for (const auto& s : out.tokens) shares.push_back(s.wash_share);
    std::sort(shares.begin(), shares.end());
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (i > 0 && shares[i] == shares[i - 1]) continue;
        out.ccdf.emplace_back(shares[i], ratio(shares.size() - i, shares.size()));
    }
    return out;
}

LifespanReport lifespan_positions(LabeledTrades data, std::size_t bins) {
    LifespanReport out;
    out.histogram.assign(std::max<std::size_t>(bins, 1), 0);
    for (const MarketGroup& g : group_by_market(data.trades)) {
        const std::int64_t first = data.trades[g.trades.front()].timestamp;
        const std::int64_t last = data.trades[g.trades.back()].timestamp;
        std::vector<double> positions;
        for (std::size_t i : g.trades) {
            if (!data.is_wash(i)) continue;
            const std::int64_t t = data.trades[i].timestamp;
            if (last == first) {
                positions.push_back(0.5);
            } else if (t == first) {
                positions.push_back(0.0);
            } else if (t == last) {
                positions.push_back(1.0);
            } else {
                positions.push_back(static_cast<double>(t - first) / static_cast<double>(last - first));
            }
        }
        if (positions.empty()) continue;
        const double median = quantile(positions, 0.5);
        out.tokens.push_back({g.market, positions.size(), median});
        const auto bin = std::min(out.histogram.size() - 1,
                                  static_cast<std::size_t>(median * static_cast<double>(out.histogram.size())));
        ++out.histogram[bin];
    }
    return out;
}

std::vector<TimeSeriesPoint> volume_time_series(LabeledTrades data, Granularity granularity) {
    std::map<std::pair<std::string_view, std::int64_t>, TimeSeriesPoint> buckets;
    for (std::size_t i = 0; i < data.trades.size(); ++i) {
        const Trade& t = data.trades[i];
        const std::int64_t day = utc_day(t.timestamp);
        const std::int64_t start = granularity == Granularity::month ? month_start(day) : iso_week_start(day);
        auto [it, inserted] = buckets.try_emplace({t.exchange_id, start});
        TimeSeriesPoint& p = it->second;
        if (inserted) {
            p.exchange_id = t.exchange_id;
            p.period_start = start;
            p.period = granularity == Granularity::month ? format_month(start) : format_iso_week(start);
        }
        ++p.trades;
        if (!t.usd_value) {
            ++p.missing_usd;
            continue;
        }
        p.total_usd += *t.usd_value;
        if (data.is_wash(i)) p.wash_usd += *t.usd_value;
    }
    std::vector<TimeSeriesPoint> out;
    out.reserve(buckets.size());
    for (auto& [k, p] : buckets) {
        p.wash_share = ratio(p.wash_usd, p.total_usd);
        out.push_back(std::move(p));
    }
    return out;
}

SummaryReport summary(LabeledTrades data, std::span<const WashSet> wash_sets, std::span<const SccKey> candidates,
                      Decimal fee_rate) {
    struct Acc {
        ExchangeSummary s;
        std::set<std::string_view> tokens, self_tokens, wash_tokens, self_accounts, wash_accounts;
        std::set<std::vector<std::string>> analyzed;
        std::map<std::vector<std::string>, std::set<std::string>> washed_tokens_per_scc;
    };
    std::map<std::string, Acc, std::less<>> acc;
    auto of = [&](std::string_view exchange) -> Acc& {
        auto it = acc.find(exchange);
        if (it == acc.end()) {
            it = acc.emplace(std::string(exchange), Acc{}).first;
            it->second.s.exchange_id = std::string(exchange);
        }
        return it->second;
    };

    for (std::size_t i = 0; i < data.trades.size(); ++i) {
        const Trade& t = data.trades[i];
        Acc& a = of(t.exchange_id);
        ++a.s.trades;
        a.tokens.insert(t.token);
        if (!t.usd_value) ++a.s.trades_missing_usd;
        if (!data.is_wash(i)) continue;
        ++a.s.wash_trades;
        a.s.wash_volume_eth += t.eth_amount;
        if (t.usd_value) a.s.wash_volume_usd += *t.usd_value;
        a.wash_tokens.insert(t.token);
        a.wash_accounts.insert(t.seller);
        a.wash_accounts.insert(t.buyer);
        if (data.labels[i] == Label::self_trade) {
            ++a.s.self_trades;
            a.s.self_traded_volume_eth += t.eth_amount;
            if (t.usd_value) a.s.self_traded_volume_usd += *t.usd_value;
            a.self_tokens.insert(t.token);
            a.self_accounts.insert(t.seller);
        }
    }
    for (const SccKey& k : candidates) of(k.market.exchange_id).analyzed.insert(k.vertex_set);
    for (const WashSet& ws : wash_sets) {
        if (ws.candidate.empty()) continue;
        of(ws.market.exchange_id).washed_tokens_per_scc[ws.candidate].insert(ws.market.token);
    }

    SummaryReport out;
    for (auto& [name, a] : acc) {
        ExchangeSummary& s = a.s;
        s.self_trade_share = ratio(s.self_trades, s.trades);
        s.wash_trade_share = ratio(s.wash_trades, s.trades);
        s.wash_fees_usd = fee_rate * s.wash_volume_usd;
        s.tokens = a.tokens.size();
        s.self_traded_tokens = a.self_tokens.size();
        s.wash_tokens = a.wash_tokens.size();
        s.wash_token_share = ratio(s.wash_tokens, s.tokens);
        s.self_trader_accounts = a.self_accounts.size();
        s.wash_trader_accounts = a.wash_accounts.size();
        s.analyzed_sccs = a.analyzed.size();
        s.sccs_with_wash_trading = a.washed_tokens_per_scc.size();
        std::size_t washed_tokens = 0;
        for (const auto& [scc, tokens] : a.washed_tokens_per_scc) washed_tokens += tokens.size();
        s.mean_tokens_washed_per_scc = ratio(washed_tokens, s.sccs_with_wash_trading);
        out.exchanges.push_back(std::move(s));
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

Diagnostics diagnostics(std::span<const Trade> trades, int bins_per_decade) {
    struct Activity {
        std::size_t trades = 0;
        std::unordered_set<std::string_view> partners;
    };
    std::map<std::pair<std::string_view, std::string_view>, Activity> activity;
    std::map<std::pair<std::string_view, int>, std::size_t> bins;
    const double b = bins_per_decade > 0 ? bins_per_decade : 10;

    for (const Trade& t : trades) {
        Activity& s = activity[{t.exchange_id, t.seller}];
        ++s.trades;
        s.partners.insert(t.buyer);
        if (!t.is_self_trade()) {
            Activity& r = activity[{t.exchange_id, t.buyer}];
            ++r.trades;
            r.partners.insert(t.seller);
        }
        const int bin = static_cast<int>(std::floor(std::log10(t.eth_amount.to_double()) * b));
        ++bins[{t.exchange_id, bin}];
    }

    Diagnostics out;
    std::vector<double> ratios;
    for (const auto& [key, a] : activity) {
        const double r = static_cast<double>(a.trades) / static_cast<double>(a.partners.size());
        out.accounts.push_back({std::string(key.first), std::string(key.second), a.trades, a.partners.size(), r});
        ratios.push_back(r);
    }
    out.ratio_median = quantile(ratios, 0.5);
    out.ratio_p99 = quantile(ratios, 0.99);
    for (const auto& [key, count] : bins) {
        out.size_histogram.push_back({std::string(key.first), key.second, std::pow(10.0, key.second / b),
                                      std::pow(10.0, (key.second + 1) / b), count});
    }
    return out;
}

}  // namespace washtrade
