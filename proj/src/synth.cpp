#include "washtrade/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <unordered_map>

#include "csv_util.hpp"
#include "json.hpp"
#include "washtrade/errors.hpp"

namespace washtrade {

namespace {

using Rng = std::mt19937_64;

// Portable draws: the standard distributions are implementation-defined.
std::uint64_t below(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

double unit_open(Rng& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

double standard_normal(Rng& rng) {
    const double u1 = unit_open(rng);
    const double u2 = unit_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string random_address(Rng& rng) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out = "0x";
    out.reserve(42);
    while (out.size() < 42) {
        std::uint64_t bits = rng();
        for (int i = 0; i < 16 && out.size() < 42; ++i, bits >>= 4) out += kHex[bits & 15];
    }
    return out;
}

Decimal round_to(double v, int places) {
    const double scale = std::pow(10.0, places);
    const auto d = Decimal::from_double(std::round(v * scale) / scale);
    return d.value_or(Decimal::from_int(1));
}

Decimal background_size(Rng& rng) {
    static constexpr double kRound[] = {0.1, 0.5, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 5000, 10000};
    if (below(rng, 10) < 4) return round_to(kRound[below(rng, std::size(kRound))], 1);
    const double v = std::exp(std::log(50.0) + 1.5 * standard_normal(rng));
    return std::max(round_to(v, 4), Decimal::from_raw(Decimal::kOne / 10000));
}

Decimal token_price(Rng& rng) { return round_to(0.00001 + unit_open(rng) * 0.01, 9); }

Decimal eth_value(Decimal tokens, Decimal price) {
    const Decimal eth = tokens * price;
    return eth.raw() > 0 ? eth : Decimal::from_raw(1000000000);
}

struct ShapeEdge {
    std::uint32_t from;
    std::uint32_t to;
    Decimal weight;
    bool wash;
};

Decimal frac(std::int64_t num, std::int64_t den) { return Decimal::from_raw(Decimal::kOne * num / den); }

std::size_t participant_count(const StructureSpec& s) {
    switch (s.kind) {
        case StructureKind::loop: return 1;
        case StructureKind::cycle_with_subcycles: return 5;
        case StructureKind::custom: {
            std::uint32_t n = 0;
            for (const auto& e : s.custom_edges) n = std::max({n, e.from + 1, e.to + 1});
            return n;
        }
        default: return s.participants;
    }
}

/// Trades of one repetition in order. Weights are multiples of the base volume.
std::vector<ShapeEdge> shape(const StructureSpec& s) {
    const Decimal one = Decimal::from_int(1);
    std::vector<ShapeEdge> edges;
    const auto n = static_cast<std::uint32_t>(s.participants);
    switch (s.kind) {
        case StructureKind::loop:
            edges.push_back({0, 0, one, true});
            break;
        case StructureKind::cycle:
            for (std::uint32_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, one, true});
            break;
        case StructureKind::cycle_parallel_edges:
            for (std::uint32_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, one, true});
            edges.push_back({n - 1, 0, frac(2, 5), true});
            edges.push_back({n - 1, 0, frac(3, 5), true});
            break;
        case StructureKind::cycle_with_subcycles: {
            // Traders 1..5 as ids 0..4. Each buys and sells two weight units;
            // the Hamiltonian cycle 1-2-3-4-5 and the sub-cycles {1,2,4,5},
            // {2,4,5}, {2,3,4,5} are all present.
            const Decimal two = Decimal::from_int(2);
            edges = {{0, 1, one, true}, {1, 3, one, true}, {3, 4, two, true}, {4, 0, one, true}, {4, 1, one, true},
                     {1, 2, one, true}, {2, 3, one, true}, {0, 2, one, true}, {2, 0, one, true}};
            break;
        }
        case StructureKind::custom:
            for (const auto& e : s.custom_edges) edges.push_back({e.from, e.to, e.weight, e.wash});
            break;
    }
    if (s.hidden_legit_trade) {
        if (s.kind == StructureKind::cycle_with_subcycles) {
            edges.push_back({4, 3, frac(1, 2), false});
        } else {
            edges.push_back({0, 1, frac(1, 2), false});
        }
    }
    return edges;
}

struct Pending {
    std::int64_t timestamp;
    std::size_t seq;
    std::string seller;
    std::string buyer;
    std::string token;
    Decimal token_amount;
    Decimal eth_amount;
    Label label;
    std::string structure;
};

std::int64_t align_up(std::int64_t t, std::int64_t w) { return ((t + w - 1) / w) * w; }

std::vector<std::int64_t> sorted_times(Rng& rng, std::size_t count, std::int64_t from, std::int64_t length) {
    std::vector<std::int64_t> out(count);
    for (auto& t : out) t = from + static_cast<std::int64_t>(below(rng, static_cast<std::uint64_t>(length)));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::string_view to_string(StructureKind kind) {
    switch (kind) {
        case StructureKind::loop: return "loop";
        case StructureKind::cycle: return "cycle";
        case StructureKind::cycle_parallel_edges: return "cycle_parallel_edges";
        case StructureKind::cycle_with_subcycles: return "cycle_with_subcycles";
        case StructureKind::custom: return "custom";
    }
    return "custom";
}

StructureKind parse_structure_kind(std::string_view s) {
    for (auto k : {StructureKind::loop, StructureKind::cycle, StructureKind::cycle_parallel_edges,
                   StructureKind::cycle_with_subcycles, StructureKind::custom}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown structure kind '" + std::string(s) + "'");
}

std::string_view to_string(Placement placement) {
    switch (placement) {
        case Placement::single_window: return "single_window";
        case Placement::window_per_repetition: return "window_per_repetition";
        case Placement::uniform_span: return "uniform_span";
    }
    return "single_window";
}

Placement parse_placement(std::string_view s) {
    for (auto p : {Placement::single_window, Placement::window_per_repetition, Placement::uniform_span}) {
        if (to_string(p) == s) return p;
    }
    throw ConfigError("unknown placement '" + std::string(s) + "'");
}

void ScenarioSpec::validate() const {
    if (margin.is_negative()) throw ConfigError("margin must be non-negative");
    if (background.tokens == 0 && background.trades > 0) throw ConfigError("background needs at least one token");
    if (background.seller_pool == 0 && background.trades > 0) throw ConfigError("background seller pool is empty");
    for (std::size_t i = 0; i < structures.size(); ++i) {
        const StructureSpec& s = structures[i];
        const std::string where = "structure " + std::to_string(i) + ": ";
        if (s.repetitions == 0) throw ConfigError(where + "repetitions must be positive");
        if (s.base_volume.raw() <= 0) throw ConfigError(where + "base_volume must be positive");
        if (s.window_seconds <= 0) throw ConfigError(where + "window must be positive");
        if (s.jitter.is_negative() || s.jitter >= Decimal::from_int(1)) throw ConfigError(where + "jitter must be in [0, 1)");
        if (s.placement != Placement::uniform_span && s.jitter > margin) {
            throw ConfigError(where + "jitter " + s.jitter.to_string() + " exceeds margin " + margin.to_string() +
                              " for a window-confined structure");
        }
        if ((s.kind == StructureKind::cycle || s.kind == StructureKind::cycle_parallel_edges) && s.participants < 2) {
            throw ConfigError(where + "a cycle needs at least 2 participants");
        }
        if (s.kind == StructureKind::loop && s.hidden_legit_trade) {
            throw ConfigError(where + "a loop has no second participant for a hidden trade");
        }
        if (s.kind == StructureKind::custom) {
            if (s.custom_edges.empty()) throw ConfigError(where + "custom structure without edges");
            std::map<std::uint32_t, Decimal> net;
            bool any_wash = false;
            for (const auto& e : s.custom_edges) {
                if (e.weight.raw() <= 0) throw ConfigError(where + "edge weights must be positive");
                if (!e.wash) continue;
                any_wash = true;
                net[e.from] -= e.weight;
                net[e.to] += e.weight;
            }
            if (!any_wash) throw ConfigError(where + "custom structure without wash edges");
            for (const auto& [v, p] : net) {
                if (!p.is_zero()) throw ConfigError(where + "wash edges leave participant " + std::to_string(v) + " unbalanced");
            }
            if (s.hidden_legit_trade && participant_count(s) < 2) {
                throw ConfigError(where + "a hidden trade needs two participants");
            }
        }
    }
}

ScenarioSpec preset_scenario(StructureKind kind, std::size_t repetitions, std::uint64_t seed) {
    if (kind == StructureKind::custom) throw ConfigError("custom structures have no preset");
    ScenarioSpec spec;
    spec.seed = seed;
    StructureSpec s;
    s.kind = kind;
    s.repetitions = repetitions;
    switch (kind) {
        case StructureKind::loop: s.participants = 1; break;
        case StructureKind::cycle: s.participants = 3; break;
        case StructureKind::cycle_parallel_edges: s.participants = 3; break;
        case StructureKind::cycle_with_subcycles:
            s.participants = 5;
            s.base_volume = Decimal::from_int(60);
            s.hidden_legit_trade = true;
            s.placement = Placement::window_per_repetition;
            break;
        case StructureKind::custom: break;
    }
    spec.structures.push_back(std::move(s));
    return spec;
}

GeneratedDataset generate(const ScenarioSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::vector<Pending> pending;
    std::size_t seq = 0;
    std::int64_t cursor = spec.start_time;

    std::vector<std::string> tokens;
    std::map<std::string, Decimal> prices;
    auto price_of = [&](const std::string& token) -> Decimal {
        auto it = prices.find(token);
        if (it == prices.end()) it = prices.emplace(token, token_price(rng)).first;
        return it->second;
    };

    for (std::size_t si = 0; si < spec.structures.size(); ++si) {
        const StructureSpec& s = spec.structures[si];
        const std::string token = s.token.empty() ? random_address(rng) : s.token;
        if (std::find(tokens.begin(), tokens.end(), token) == tokens.end()) tokens.push_back(token);
        const Decimal price = price_of(token);
        const std::string tag = std::to_string(si) + ":" + std::string(to_string(s.kind));

        std::vector<std::string> accounts(participant_count(s));
        for (auto& a : accounts) a = random_address(rng);
        const std::vector<ShapeEdge> edges = shape(s);

        Decimal wash_sum;
        std::size_t wash_count = 0, jitter_edge = 0;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!edges[e].wash) continue;
            wash_sum += edges[e].weight * s.base_volume;
            ++wash_count;
            jitter_edge = e;
        }
        const Decimal deviation = wash_sum.div(static_cast<std::int64_t>(wash_count)) * s.jitter;

        const std::int64_t w = s.window_seconds;
        const std::int64_t first = align_up(cursor, w);
        const std::size_t total = edges.size() * s.repetitions;
        std::vector<std::int64_t> times;
        switch (s.placement) {
            case Placement::single_window:
                times = sorted_times(rng, total, first, w);
                cursor = first + w;
                break;
            case Placement::window_per_repetition:
                for (std::size_t r = 0; r < s.repetitions; ++r) {
                    auto part = sorted_times(rng, edges.size(), first + static_cast<std::int64_t>(r) * w, w);
                    times.insert(times.end(), part.begin(), part.end());
                }
                cursor = first + static_cast<std::int64_t>(s.repetitions) * w;
                break;
            case Placement::uniform_span:
                times = sorted_times(rng, total, first, static_cast<std::int64_t>(s.repetitions) * w);
                cursor = first + static_cast<std::int64_t>(s.repetitions) * w;
                break;
        }

        std::size_t k = 0;
        for (std::size_t r = 0; r < s.repetitions; ++r) {
            // In a shared window alternating signs keep the running imbalance
            // within one deviation; separate windows each get a positive one.
            const bool negative = s.placement != Placement::window_per_repetition && r % 2 == 1;
            for (std::size_t e = 0; e < edges.size(); ++e, ++k) {
                const ShapeEdge& edge = edges[e];
                Decimal volume = edge.weight * s.base_volume;
                if (e == jitter_edge) volume = negative ? volume - deviation : volume + deviation;
                Label label = Label::legitimate;
                if (edge.wash) label = edge.from == edge.to ? Label::self_trade : Label::wash;
                pending.push_back({times[k], seq++, accounts[edge.from], accounts[edge.to], token, volume,
                                   eth_value(volume, price), label, tag});
            }
        }
    }

    if (spec.background.trades > 0) {
        while (tokens.size() < spec.background.tokens) tokens.push_back(random_address(rng));
        const std::size_t token_count = std::max(spec.background.tokens, std::size_t{1});
        std::vector<std::string> sellers(spec.background.seller_pool);
        for (auto& a : sellers) a = random_address(rng);
        const std::int64_t end = std::max(cursor, spec.start_time + 86400);
        for (std::size_t i = 0; i < spec.background.trades; ++i) {
            const std::string& token = tokens[below(rng, token_count)];
            const Decimal size = background_size(rng);
            const auto t = spec.start_time + static_cast<std::int64_t>(below(rng, static_cast<std::uint64_t>(end - spec.start_time)));
            const std::string& seller = sellers[below(rng, sellers.size())];
            pending.push_back({t, seq++, seller, random_address(rng), token, size, eth_value(size, price_of(token)),
                               Label::legitimate, ""});
        }
    }

    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
        return std::tie(a.timestamp, a.seq) < std::tie(b.timestamp, b.seq);
    });

    GeneratedDataset out;
    out.trades.reserve(pending.size());
    out.truth.reserve(pending.size());
    char id[32];
    for (std::size_t i = 0; i < pending.size(); ++i) {
        Pending& p = pending[i];
        std::snprintf(id, sizeof id, "t%010zu", i);
        Trade t;
        t.trade_id = id;
        t.exchange_id = spec.exchange_id;
        t.block_number = 4832686 + static_cast<std::uint64_t>((p.timestamp - spec.start_time) / 15);
        t.timestamp = p.timestamp;
        t.seller = std::move(p.seller);
        t.buyer = std::move(p.buyer);
        t.token = std::move(p.token);
        t.token_amount = p.token_amount;
        t.eth_amount = p.eth_amount;
        out.truth.push_back({t.trade_id, p.label, std::move(p.structure)});
        out.trades.push_back(std::move(t));
    }
    return out;
}

EvalMetrics evaluate(std::span<const LabeledId> labels, std::span<const TruthEntry> truth) {
    if (labels.size() != truth.size()) {
        throw ContractError("label and truth sets differ in size (" + std::to_string(labels.size()) + " vs " +
                            std::to_string(truth.size()) + ")");
    }
    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!index.emplace(truth[i].trade_id, i).second) throw ContractError("duplicate truth id " + truth[i].trade_id);
    }
    std::vector<char> seen(truth.size(), 0);
    EvalMetrics m;
    for (const LabeledId& l : labels) {
        auto it = index.find(l.trade_id);
        if (it == index.end()) throw ContractError("trade id " + l.trade_id + " missing from truth");
        if (seen[it->second]++) throw ContractError("duplicate label id " + l.trade_id);
        const TruthEntry& t = truth[it->second];
        const bool predicted = l.label != Label::legitimate;
        const bool actual = t.label != Label::legitimate;
        if (predicted && actual) ++m.true_positives;
        if (predicted && !actual) ++m.false_positives;
        if (!predicted && actual) ++m.false_negatives;
        if (!predicted && !actual) ++m.true_negatives;
        if (actual) {
            StructureRecall& r = m.per_structure[t.structure];
            ++r.positives;
            if (predicted) ++r.detected;
        }
    }
    const std::size_t predicted = m.true_positives + m.false_positives;
    const std::size_t actual = m.true_positives + m.false_negatives;
    m.precision = predicted == 0 ? 1.0 : static_cast<double>(m.true_positives) / static_cast<double>(predicted);
    m.recall = actual == 0 ? 1.0 : static_cast<double>(m.true_positives) / static_cast<double>(actual);
    for (auto& [name, r] : m.per_structure) r.recall = static_cast<double>(r.detected) / static_cast<double>(r.positives);
    return m;
}

std::string format_ground_truth_csv(std::span<const TruthEntry> truth) {
    std::string out = "trade_id,label,structure\n";
    for (const TruthEntry& t : truth) {
        out += csv::escape(t.trade_id);
        out += ',';
        out += to_string(t.label);
        out += ',';
        out += csv::escape(t.structure);
        out += '\n';
    }
    return out;
}

std::vector<TruthEntry> parse_ground_truth_csv(std::string_view text) {
    std::vector<TruthEntry> out;
    std::vector<std::string> fields;
    bool header = true;
    csv::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (!csv::split(line, fields)) throw DataError("line " + std::to_string(line_no) + ": unbalanced quotes");
        if (header) {
            header = false;
            if (fields.size() < 2 || fields[0] != "trade_id" || fields[1] != "label") {
                throw DataError("line 1: expected header trade_id,label[,structure]");
            }
            return;
        }
        if (fields.size() < 2 || fields.size() > 3) {
            throw DataError("line " + std::to_string(line_no) + ": expected 2 or 3 fields");
        }
        const auto label = parse_label(fields[1]);
        if (!label) throw DataError("line " + std::to_string(line_no) + ", field label: unknown label '" + fields[1] + "'");
        out.push_back({fields[0], *label, fields.size() == 3 ? fields[2] : std::string()});
    });
    return out;
}

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

Decimal json_decimal(const json& v, const std::string& what) {
    std::optional<Decimal> d;
    if (v.is_string()) d = Decimal::parse(v.get<std::string>());
    if (v.is_number()) d = Decimal::parse(v.dump());
    if (!d) throw ConfigError(what + ": expected a decimal number");
    return *d;
}

template <typename Int>
Int json_uint(const json& v, const std::string& what) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(what + ": expected a non-negative integer");
    return static_cast<Int>(v.get<std::uint64_t>());
}

std::int64_t json_window(const json& v, const std::string& what) {
    if (v.is_number_integer()) return json_uint<std::int64_t>(v, what);
    if (!v.is_string()) throw ConfigError(what + ": expected seconds or a duration like \"1h\"");
    const auto ladder = parse_window_ladder(v.get<std::string>());
    if (ladder.size() != 1) throw ConfigError(what + ": expected a single duration");
    return ladder.front();
}

}  // namespace

ScenarioSpec parse_scenario_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario JSON: ") + e.what());
    }
    check_keys(j, {"seed", "exchange_id", "start_time", "margin", "structures", "background"}, "scenario");
    ScenarioSpec spec;
    try {
        if (j.contains("seed")) spec.seed = json_uint<std::uint64_t>(j["seed"], "seed");
        if (j.contains("exchange_id")) spec.exchange_id = j["exchange_id"].get<std::string>();
        if (j.contains("start_time")) spec.start_time = json_uint<std::int64_t>(j["start_time"], "start_time");
        if (j.contains("margin")) spec.margin = json_decimal(j["margin"], "margin");
        if (j.contains("background")) {
            const json& b = j["background"];
            check_keys(b, {"trades", "tokens", "seller_pool"}, "background");
            if (b.contains("trades")) spec.background.trades = json_uint<std::size_t>(b["trades"], "background.trades");
            if (b.contains("tokens")) spec.background.tokens = json_uint<std::size_t>(b["tokens"], "background.tokens");
            if (b.contains("seller_pool")) {
                spec.background.seller_pool = json_uint<std::size_t>(b["seller_pool"], "background.seller_pool");
            }
        }
        if (j.contains("structures")) {
            if (!j["structures"].is_array()) throw ConfigError("structures must be an array");
            for (const json& sj : j["structures"]) {
                const std::string where = "structures[" + std::to_string(spec.structures.size()) + "]";
                check_keys(sj, {"kind", "participants", "base_volume", "jitter", "repetitions", "token", "placement",
                                "window", "hidden_legit_trade", "edges"},
                           where);
                StructureSpec s;
                if (sj.contains("kind")) s.kind = parse_structure_kind(sj["kind"].get<std::string>());
                if (s.kind == StructureKind::cycle_with_subcycles) s.base_volume = Decimal::from_int(60);
                if (sj.contains("participants")) s.participants = json_uint<std::size_t>(sj["participants"], where + ".participants");
                if (sj.contains("base_volume")) s.base_volume = json_decimal(sj["base_volume"], where + ".base_volume");
                if (sj.contains("jitter")) s.jitter = json_decimal(sj["jitter"], where + ".jitter");
                if (sj.contains("repetitions")) s.repetitions = json_uint<std::size_t>(sj["repetitions"], where + ".repetitions");
                if (sj.contains("token")) s.token = sj["token"].get<std::string>();
                if (sj.contains("placement")) s.placement = parse_placement(sj["placement"].get<std::string>());
                if (sj.contains("window")) s.window_seconds = json_window(sj["window"], where + ".window");
                if (sj.contains("hidden_legit_trade")) s.hidden_legit_trade = sj["hidden_legit_trade"].get<bool>();
                if (sj.contains("edges")) {
                    for (const json& ej : sj["edges"]) {
                        check_keys(ej, {"from", "to", "weight", "wash"}, where + ".edges");
                        CustomEdge e;
                        e.from = json_uint<std::uint32_t>(ej.at("from"), where + ".edges.from");
                        e.to = json_uint<std::uint32_t>(ej.at("to"), where + ".edges.to");
                        if (ej.contains("weight")) e.weight = json_decimal(ej["weight"], where + ".edges.weight");
                        if (ej.contains("wash")) e.wash = ej["wash"].get<bool>();
                        s.custom_edges.push_back(e);
                    }
                }
                spec.structures.push_back(std::move(s));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario JSON: ") + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace washtrade
