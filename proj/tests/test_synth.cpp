#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "washtrade/errors.hpp"
#include "washtrade/ingest.hpp"
#include "washtrade/pipeline.hpp"
#include "washtrade/synth.hpp"

using namespace washtrade;
using namespace testing_support;

namespace {

std::vector<LabeledId> as_labels(const GeneratedDataset& d, std::span<const Label> labels) {
    std::vector<LabeledId> out;
    for (std::size_t i = 0; i < d.trades.size(); ++i) out.push_back({d.trades[i].trade_id, labels[i]});
    return out;
}

EvalMetrics detect_and_score(const ScenarioSpec& spec, std::uint64_t threshold) {
    const auto data = generate(spec);
    DetectionConfig config;
    config.scc_threshold = threshold;
    config.margin = spec.margin;
    const auto run = run_detection(data.trades, config);
    return evaluate(as_labels(data, run.result.labels), data.truth);
}

std::size_t count_label(const GeneratedDataset& d, Label l) {
    return static_cast<std::size_t>(
        std::count_if(d.truth.begin(), d.truth.end(), [&](const TruthEntry& t) { return t.label == l; }));
}

}  // namespace

TEST_CASE("a loop with one repetition is one self-trade") {
    auto spec = preset_scenario(StructureKind::loop, 1);
    const auto d = generate(spec);
    REQUIRE(d.trades.size() == 1);
    CHECK(d.trades[0].is_self_trade());
    CHECK(d.truth[0].label == Label::self_trade);
    CHECK(d.truth[0].structure == "0:loop");
    CHECK(d.trades[0].exchange_id == "synth");
    CHECK(d.trades[0].timestamp >= spec.start_time);
}

TEST_CASE("shape sizes of the presets") {
    CHECK(generate(preset_scenario(StructureKind::cycle, 1)).trades.size() == 3);
    CHECK(generate(preset_scenario(StructureKind::cycle, 7)).trades.size() == 21);
    const auto parallel = generate(preset_scenario(StructureKind::cycle_parallel_edges, 1));
    CHECK(count_label(parallel, Label::wash) == parallel.trades.size());
    CHECK(parallel.trades.size() > 3);
}

TEST_CASE("the five-trader structure: nine wash trades, one hidden legitimate trade, each trader nets zero") {
    const auto d = generate(preset_scenario(StructureKind::cycle_with_subcycles, 1));
    REQUIRE(d.trades.size() == 10);
    CHECK(count_label(d, Label::wash) == 9);
    CHECK(count_label(d, Label::legitimate) == 1);
    std::map<std::string, Decimal> sold, bought;
    std::vector<OracleTrade> wash;
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < d.trades.size(); ++i) {
        const Trade& t = d.trades[i];
        if (d.truth[i].label != Label::wash) {
            CHECK(t.token_amount == dec("30"));
            CHECK(i + 1 == d.trades.size());
            continue;
        }
        sold[t.seller] += t.token_amount;
        bought[t.buyer] += t.token_amount;
        const int s = ids.emplace(t.seller, static_cast<int>(ids.size())).first->second;
        const int b = ids.emplace(t.buyer, static_cast<int>(ids.size())).first->second;
        wash.push_back({s, b, t.token_amount});
    }
    CHECK(ids.size() == 5);
    for (const auto& [who, v] : sold) {
        CHECK(v == dec("120"));
        CHECK(bought[who] == dec("120"));
    }
    CHECK(balanced(wash, Decimal{}));
}

TEST_CASE("background-only scenarios are all legitimate") {
    ScenarioSpec spec;
    spec.background.trades = 2000;
    spec.background.tokens = 5;
    const auto d = generate(spec);
    REQUIRE(d.trades.size() == 2000);
    CHECK(count_label(d, Label::legitimate) == 2000);
    std::set<std::string> tokens, buyers;
    for (const auto& t : d.trades) {
        tokens.insert(t.token);
        buyers.insert(t.buyer);
        CHECK(!t.is_self_trade());
        CHECK(t.token_amount.raw() > 0);
    }
    CHECK(tokens.size() == 5);
    CHECK(buyers.size() == 2000);
    CHECK(std::is_sorted(d.trades.begin(), d.trades.end(), OrderKeyLess{}));
}

TEST_CASE("generation is deterministic per seed") {
    auto spec = preset_scenario(StructureKind::cycle, 50, 9);
    spec.background.trades = 300;
    spec.background.tokens = 3;
    const auto a = generate(spec), b = generate(spec);
    CHECK(format_trades_csv(a.trades) == format_trades_csv(b.trades));
    CHECK(format_ground_truth_csv(a.truth) == format_ground_truth_csv(b.truth));
    spec.seed = 10;
    CHECK(format_trades_csv(generate(spec).trades) != format_trades_csv(a.trades));
}

TEST_CASE("evaluate") {
    const std::vector<TruthEntry> truth = {{"1", Label::wash, "0:cycle"},
                                           {"2", Label::self_trade, "1:loop"},
                                           {"3", Label::legitimate, ""},
                                           {"4", Label::wash, "0:cycle"}};
    SUBCASE("perfect") {
        const std::vector<LabeledId> l = {
            {"1", Label::wash}, {"2", Label::self_trade}, {"3", Label::legitimate}, {"4", Label::wash}};
        const auto m = evaluate(l, truth);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.true_negatives == 1);
        CHECK(m.per_structure.at("0:cycle").recall == 1.0);
    }
    SUBCASE("one miss and one false alarm, order independent") {
        const std::vector<LabeledId> l = {
            {"4", Label::legitimate}, {"3", Label::wash}, {"2", Label::wash}, {"1", Label::wash}};
        const auto m = evaluate(l, truth);
        CHECK(m.true_positives == 2);
        CHECK(m.false_positives == 1);
        CHECK(m.false_negatives == 1);
        CHECK(m.precision == doctest::Approx(2.0 / 3));
        CHECK(m.recall == doctest::Approx(2.0 / 3));
        CHECK(m.per_structure.at("0:cycle").detected == 1);
        CHECK(m.per_structure.at("0:cycle").recall == 0.5);
        CHECK(m.per_structure.at("1:loop").recall == 1.0);
    }
    SUBCASE("nothing predicted") {
        std::vector<LabeledId> l;
        for (const auto& t : truth) l.push_back({t.trade_id, Label::legitimate});
        const auto m = evaluate(l, truth);
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 0.0);
    }
    SUBCASE("id mismatches are contract errors") {
        const std::vector<LabeledId> missing = {{"1", Label::wash}, {"2", Label::wash}, {"3", Label::wash}};
        CHECK_THROWS_AS(evaluate(missing, truth), ContractError);
        const std::vector<LabeledId> other = {
            {"1", Label::wash}, {"2", Label::wash}, {"3", Label::wash}, {"9", Label::wash}};
        CHECK_THROWS_AS(evaluate(other, truth), ContractError);
        const std::vector<LabeledId> dup = {{"1", Label::wash}, {"1", Label::wash}, {"3", Label::wash}, {"4", Label::wash}};
        CHECK_THROWS_AS(evaluate(dup, truth), ContractError);
    }
}

TEST_CASE("ground truth CSV round-trips") {
    auto spec = preset_scenario(StructureKind::cycle, 3);
    spec.background.trades = 20;
    const auto d = generate(spec);
    const auto text = format_ground_truth_csv(d.truth);
    CHECK(text.rfind("trade_id,label,structure\n", 0) == 0);
    const auto back = parse_ground_truth_csv(text);
    REQUIRE(back.size() == d.truth.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].trade_id == d.truth[i].trade_id);
        CHECK(back[i].label == d.truth[i].label);
        CHECK(back[i].structure == d.truth[i].structure);
    }
    const auto two = parse_ground_truth_csv("trade_id,label\nx,wash\ny,legitimate\n");
    REQUIRE(two.size() == 2);
    CHECK(two[0].label == Label::wash);
}

TEST_CASE("config errors") {
    auto bad = [](auto mutate) {
        auto spec = preset_scenario(StructureKind::cycle, 5);
        mutate(spec);
        CHECK_THROWS_AS(generate(spec), ConfigError);
    };
    bad([](ScenarioSpec& s) { s.structures[0].jitter = dec("0.02"); });
    bad([](ScenarioSpec& s) { s.structures[0].jitter = dec("1"); });
    bad([](ScenarioSpec& s) { s.structures[0].repetitions = 0; });
    bad([](ScenarioSpec& s) { s.structures[0].participants = 1; });
    bad([](ScenarioSpec& s) { s.structures[0].window_seconds = 0; });
    bad([](ScenarioSpec& s) { s.structures[0].base_volume = Decimal{}; });
    bad([](ScenarioSpec& s) {
        s.structures[0].kind = StructureKind::loop;
        s.structures[0].hidden_legit_trade = true;
    });
    bad([](ScenarioSpec& s) {
        s.structures[0].kind = StructureKind::custom;
        s.structures[0].custom_edges = {{0, 1, Decimal::from_int(1), true}, {1, 0, Decimal::from_int(2), true}};
    });
    bad([](ScenarioSpec& s) { s.margin = dec("-0.01"); });

    auto ok = preset_scenario(StructureKind::cycle, 5);
    ok.structures[0].jitter = dec("0.5");
    ok.structures[0].placement = Placement::uniform_span;
    CHECK_NOTHROW(generate(ok));
    CHECK_THROWS_AS(preset_scenario(StructureKind::custom), ConfigError);
    CHECK_THROWS_AS(parse_structure_kind("hexagon"), ConfigError);
    CHECK_THROWS_AS(parse_placement("everywhere"), ConfigError);
}

TEST_CASE("scenario JSON") {
    const auto spec = parse_scenario_json(R"({
        "seed": 7, "exchange_id": "ex", "margin": "0.02",
        "structures": [
            {"kind": "cycle", "participants": 4, "repetitions": 10, "window": "1d", "jitter": 0.01},
            {"kind": "custom", "edges": [{"from": 0, "to": 1, "weight": 2}, {"from": 1, "to": 0, "weight": 2},
                                         {"from": 1, "to": 2, "weight": 1, "wash": false}]}
        ],
        "background": {"trades": 50, "tokens": 2}
    })");
    CHECK(spec.seed == 7);
    CHECK(spec.exchange_id == "ex");
    CHECK(spec.margin == dec("0.02"));
    REQUIRE(spec.structures.size() == 2);
    CHECK(spec.structures[0].participants == 4);
    CHECK(spec.structures[0].window_seconds == 86400);
    CHECK(spec.structures[0].jitter == dec("0.01"));
    CHECK(spec.structures[1].custom_edges.size() == 3);
    CHECK_FALSE(spec.structures[1].custom_edges[2].wash);
    CHECK(spec.background.trades == 50);

    const auto d = generate(spec);
    CHECK(count_label(d, Label::wash) == 40 + 200);

    CHECK_THROWS_AS(parse_scenario_json(R"({"sede": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_json(R"({"structures": [{"kind": "cycle", "colour": 1}]})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_json("{"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_json(R"({"structures": [{"window": "1h,1d"}]})"), ConfigError);
}

TEST_CASE("detection recovers every preset with jitter at the margin") {
    for (auto kind : {StructureKind::loop, StructureKind::cycle, StructureKind::cycle_parallel_edges,
                      StructureKind::cycle_with_subcycles}) {
        CAPTURE(to_string(kind));
        auto spec = preset_scenario(kind, 100, 3);
        spec.structures[0].jitter = spec.margin;
        spec.background.trades = 1000;
        spec.background.tokens = 4;
        const auto m = detect_and_score(spec, 100);
        CHECK(m.recall == 1.0);
        CHECK(m.precision == 1.0);
    }
}

TEST_CASE("jitter beyond the detection margin is missed") {
    auto spec = preset_scenario(StructureKind::cycle, 100, 4);
    spec.structures[0].jitter = dec("0.05");
    spec.structures[0].placement = Placement::window_per_repetition;
    spec.margin = dec("0.05");
    const auto data = generate(spec);
    DetectionConfig config;
    config.margin = dec("0.01");
    const auto run = run_detection(data.trades, config);
    const auto m = evaluate(as_labels(data, run.result.labels), data.truth);
    CHECK(m.recall < 1.0);
    CHECK(m.precision == 1.0);
}
