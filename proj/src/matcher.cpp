#include "washtrade/matcher.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "washtrade/calendar.hpp"
#include "washtrade/errors.hpp"

namespace washtrade {

namespace {

const Wide kOneWide = Wide(static_cast<std::uint64_t>(Decimal::kOne));

Wide wide_abs(const Wide& w) { return w < 0 ? Wide(-w) : w; }

struct ExactOps {
    using Value = Wide;
    Wide margin;
    explicit ExactOps(Decimal m) : margin(to_wide(m)) {}
    static Value volume(Decimal d) { return to_wide(d); }
    static Value magnitude(const Value& v) { return wide_abs(v); }
    [[nodiscard]] bool ok(const Value& max_abs, const Value& sum, std::size_t count) const {
        // max|p| <= m * sum / count  <=>  max|p| * count * 10^18 <= m_raw * sum
        return max_abs * Wide(static_cast<std::uint64_t>(count)) * kOneWide <= margin * sum;
    }
};

struct FloatOps {
    using Value = double;
    double margin;
    explicit FloatOps(Decimal m) : margin(m.to_double()) {}
    static Value volume(Decimal d) { return d.to_double(); }
    static Value magnitude(Value v) { return std::fabs(v); }
    [[nodiscard]] bool ok(Value max_abs, Value sum, std::size_t count) const {
        return max_abs <= margin * (sum / static_cast<double>(count));
    }
};

std::uint32_t participant_count(std::span<const MatchTrade> trades) {
    std::uint32_t n = 0;
    for (const auto& t : trades) n = std::max({n, t.seller + 1, t.buyer + 1});
    return n;
}

template <typename Ops>
std::optional<std::size_t> incremental_prefix(std::span<const MatchTrade> trades, const Ops& ops) {
    using V = typename Ops::Value;
    if (trades.size() < 2) return std::nullopt;
    std::vector<V> pos(participant_count(trades), V(0));
    std::vector<V> vol;
    vol.reserve(trades.size());
    V sum = V(0);
    for (const auto& t : trades) {
        vol.push_back(Ops::volume(t.volume));
        pos[t.buyer] += vol.back();
        pos[t.seller] -= vol.back();
        sum += vol.back();
    }
    std::multiset<V> magnitudes;
    for (const V& p : pos) magnitudes.insert(Ops::magnitude(p));

    auto shift = [&](std::uint32_t who, const V& delta) {
        magnitudes.erase(magnitudes.find(Ops::magnitude(pos[who])));
        pos[who] += delta;
        magnitudes.insert(Ops::magnitude(pos[who]));
    };

    for (std::size_t len = trades.size(); len >= 2; --len) {
        if (ops.ok(*magnitudes.rbegin(), sum, len)) return len;
        const MatchTrade& last = trades[len - 1];
        const V& v = vol[len - 1];
        if (last.seller != last.buyer) {
            shift(last.buyer, V(-v));
            shift(last.seller, v);
        }
        sum -= v;
    }
    return std::nullopt;
}

template <typename Ops>
std::optional<std::size_t> recompute_prefix(std::span<const MatchTrade> trades, const Ops& ops) {
    using V = typename Ops::Value;
    for (std::size_t len = trades.size(); len >= 2; --len) {
        std::map<std::uint32_t, V> pos;
        V sum = V(0);
        for (std::size_t i = 0; i < len; ++i) {
            const V v = Ops::volume(trades[i].volume);
            pos[trades[i].buyer] += v;
            pos[trades[i].seller] -= v;
            sum += v;
        }
        bool all = true;
        for (const auto& [who, p] : pos) {
            if (!ops.ok(Ops::magnitude(p), sum, len)) {
                all = false;
                break;
            }
        }
        if (all) return len;
    }
    return std::nullopt;
}

using Kernel = std::optional<std::size_t> (*)(std::span<const MatchTrade>, Decimal, Arithmetic);

/// Dense participant ids for a run of trades (by index into `all`).
std::vector<MatchTrade> to_match_trades(std::span<const Trade> all, std::span<const std::size_t> idx) {
    std::unordered_map<std::string_view, std::uint32_t> ids;
    std::vector<MatchTrade> out;
    out.reserve(idx.size());
    auto id_of = [&](const std::string& a) {
        auto [it, inserted] = ids.try_emplace(a, static_cast<std::uint32_t>(ids.size()));
        return it->second;
    };
    for (std::size_t i : idx) {
        const Trade& t = all[i];
        const std::uint32_t s = id_of(t.seller);
        const std::uint32_t b = id_of(t.buyer);
        out.push_back({s, b, t.token_amount});
    }
    return out;
}

WashSet make_wash_set(std::span<const Trade> all, std::span<const std::size_t> idx, Decimal margin) {
    WashSet ws;
    ws.market = market_of(all[idx.front()]);
    Decimal sum;
    for (std::size_t i : idx) {
        const Trade& t = all[i];
        ws.trades.push_back(i);
        ws.trade_ids.push_back(t.trade_id);
        ws.participants.push_back(t.seller);
        ws.participants.push_back(t.buyer);
        sum += t.token_amount;
    }
    std::sort(ws.participants.begin(), ws.participants.end());
    ws.participants.erase(std::unique(ws.participants.begin(), ws.participants.end()), ws.participants.end());
    ws.mean_volume = sum.div(static_cast<std::int64_t>(idx.size()));
    ws.tolerance = margin * ws.mean_volume;
    return ws;
}

/// All passes for the candidates of one market. Writes labels of that market's trades only.
std::vector<WashSet> detect_market(std::span<const Trade> trades, std::span<const CandidateSet* const> cands,
                                   const DetectionConfig& config, Kernel kernel, std::vector<Label>& labels) {
    std::vector<WashSet> found;
    const Arithmetic arithmetic = config.arithmetic();
    std::vector<std::size_t> pending;
    for (const std::int64_t window : config.windows) {
        for (const CandidateSet* cand : cands) {
            pending.clear();
            for (std::size_t i : cand->member_trades) {
                if (labels[i] == Label::legitimate) pending.push_back(i);
            }
            for (std::size_t begin = 0; begin < pending.size();) {
                const std::int64_t bucket = floor_div(trades[pending[begin]].timestamp, window);
                std::size_t end = begin + 1;
                while (end < pending.size() && floor_div(trades[pending[end]].timestamp, window) == bucket) ++end;

                std::size_t offset = begin;
                while (end - offset >= 2) {
                    const std::span<const std::size_t> run(pending.data() + offset, end - offset);
                    const auto match = to_match_trades(trades, run);
                    const auto len = kernel(match, config.margin, arithmetic);
                    if (!len) break;
                    const std::span<const std::size_t> hit = run.first(*len);
                    WashSet ws = make_wash_set(trades, hit, config.margin);
                    ws.candidate = cand->key.vertex_set;
                    ws.window_seconds = window;
                    ws.window_start = bucket * window;
                    for (std::size_t i : hit) labels[i] = Label::wash;
                    found.push_back(std::move(ws));
                    offset += *len;
                    if (!config.repeat_within_window) break;
                }
                begin = end;
            }
        }
    }
    return found;
}

DetectionResult run_detection(std::span<const Trade> trades, std::span<const CandidateSet> candidates,
                              const DetectionConfig& config, Kernel kernel, bool parallel) {
    config.validate();
    DetectionResult result;
    result.labels.assign(trades.size(), Label::legitimate);
    result.wash_set.assign(trades.size(), std::nullopt);
    for (std::size_t i = 0; i < trades.size(); ++i) {
        if (trades[i].is_self_trade()) result.labels[i] = Label::self_trade;
    }

    // Candidates arrive sorted by key, so each market is a contiguous run.
    std::vector<std::vector<const CandidateSet*>> groups;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (c == 0 || candidates[c].key.market != candidates[c - 1].key.market) groups.emplace_back();
        groups.back().push_back(&candidates[c]);
    }
    for (std::size_t g = 1; g < groups.size(); ++g) {
        if (!(groups[g - 1].front()->key.market < groups[g].front()->key.market)) {
            throw ContractError("candidates must be sorted by (market, vertex set)");
        }
    }

    std::vector<std::vector<WashSet>> per(groups.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(groups.size()); ++g) {
        const auto gu = static_cast<std::size_t>(g);
        per[gu] = detect_market(trades, groups[gu], config, kernel, result.labels);
    }

    for (auto& sets : per) {
        for (WashSet& ws : sets) {
            ws.id = result.wash_sets.size() + 1;
            for (std::size_t i : ws.trades) result.wash_set[i] = ws.id;
            result.wash_sets.push_back(std::move(ws));
        }
    }
    return result;
}

}  // namespace

PositionMap sum_positions(std::span<const Trade> trades) {
    PositionMap pos;
    for (const Trade& t : trades) {
        if (t.token != trades.front().token || t.exchange_id != trades.front().exchange_id) {
            throw ContractError("sum_positions: trades span more than one market");
        }
        pos[t.buyer] += t.token_amount;
        pos[t.seller] -= t.token_amount;
    }
    return pos;
}

Decimal tolerance(std::span<const Trade> trades, Decimal margin) {
    if (trades.empty()) throw ContractError("tolerance: empty trade set");
    Decimal sum;
    for (const Trade& t : trades) sum += t.token_amount;
    return margin * sum.div(static_cast<std::int64_t>(trades.size()));
}

bool within_margin(Decimal abs_position, const Wide& volume_sum, std::size_t count, Decimal margin) {
    return ExactOps(margin).ok(wide_abs(to_wide(abs_position)), volume_sum, count);
}

std::optional<std::size_t> longest_balanced_prefix(std::span<const MatchTrade> trades, Decimal margin,
                                                   Arithmetic arithmetic) {
    if (arithmetic == Arithmetic::exact) return incremental_prefix(trades, ExactOps(margin));
    return incremental_prefix(trades, FloatOps(margin));
}

std::optional<std::size_t> longest_balanced_prefix_reference(std::span<const MatchTrade> trades, Decimal margin,
                                                             Arithmetic arithmetic) {
    if (arithmetic == Arithmetic::exact) return recompute_prefix(trades, ExactOps(margin));
    return recompute_prefix(trades, FloatOps(margin));
}

std::optional<WashSet> volume_match(std::span<const Trade> trades, Decimal margin, Arithmetic arithmetic) {
    if (trades.empty()) return std::nullopt;
    for (const Trade& t : trades) {
        if (t.token != trades.front().token || t.exchange_id != trades.front().exchange_id) {
            throw ContractError("volume_match: trades span more than one market");
        }
    }
    std::vector<std::size_t> idx(trades.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto len = longest_balanced_prefix(to_match_trades(trades, idx), margin, arithmetic);
    if (!len) return std::nullopt;
    return make_wash_set(trades, std::span<const std::size_t>(idx).first(*len), margin);
}

std::string_view to_string(Label label) {
    switch (label) {
        case Label::self_trade:
            return "self_trade";
        case Label::wash:
            return "wash";
        case Label::legitimate:
            break;
    }
    return "legitimate";
}

std::optional<Label> parse_label(std::string_view s) {
    if (s == "legitimate") return Label::legitimate;
    if (s == "self_trade") return Label::self_trade;
    if (s == "wash") return Label::wash;
    return std::nullopt;
}

void DetectionConfig::validate() const {
    if (scc_threshold < 1) throw ConfigError("scc threshold must be >= 1");
    if (margin.is_negative() || margin >= Decimal::from_int(1)) throw ConfigError("margin must lie in [0, 1)");
    if (windows.empty()) throw ConfigError("window ladder is empty");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i] <= 0) throw ConfigError("window sizes must be positive");
        if (i > 0 && windows[i] <= windows[i - 1]) throw ConfigError("window ladder must be strictly increasing");
    }
}

std::vector<std::int64_t> parse_window_ladder(std::string_view text) {
    std::vector<std::int64_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view item = text.substr(pos, end - pos);
        if (item.size() < 2) throw ConfigError("bad window `" + std::string(item) + "`");
        std::int64_t n = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size() - 1, n);
        if (ec != std::errc{} || p != item.data() + item.size() - 1 || n <= 0) {
            throw ConfigError("bad window `" + std::string(item) + "`");
        }
        std::int64_t unit = 0;
        switch (item.back()) {
            case 's': unit = 1; break;
            case 'm': unit = 60; break;
            case 'h': unit = 3600; break;
            case 'd': unit = 86400; break;
            case 'w': unit = 604800; break;
            default: throw ConfigError("bad window unit in `" + std::string(item) + "` (use s, m, h, d, w)");
        }
        out.push_back(n * unit);
        pos = end + 1;
    }
    return out;
}

std::string format_window(std::int64_t seconds) {
    constexpr std::pair<std::int64_t, char> units[] = {{604800, 'w'}, {86400, 'd'}, {3600, 'h'}, {60, 'm'}};
    for (const auto& [len, suffix] : units) {
        if (seconds % len == 0) return std::to_string(seconds / len) + suffix;
    }
    return std::to_string(seconds) + "s";
}

DetectionResult detect(std::span<const Trade> trades, std::span<const CandidateSet> candidates,
                       const DetectionConfig& config) {
    return run_detection(trades, candidates, config, &longest_balanced_prefix, true);
}

DetectionResult detect_reference(std::span<const Trade> trades, std::span<const CandidateSet> candidates,
                                 const DetectionConfig& config) {
    return run_detection(trades, candidates, config, &longest_balanced_prefix_reference, false);
}

}  // namespace washtrade
