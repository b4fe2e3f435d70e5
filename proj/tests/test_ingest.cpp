#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "washtrade/errors.hpp"
#include "washtrade/ingest.hpp"

using namespace washtrade;
using testing_support::dec;

namespace {

const std::string kHeader = "exchange_id,trade_id,block_number,timestamp,seller,buyer,token,token_amount,eth_amount,status\n";
const std::string kEth(kEthAddress);

std::string row(const std::string& id, const std::string& seller, const std::string& buyer, const std::string& amount,
                const std::string& eth, const std::string& status = "success", std::int64_t ts = 1514764800) {
    return "idex," + id + ",5000000," + std::to_string(ts) + "," + seller + "," + buyer + ",0xtok," + amount + "," +
           eth + "," + status + "\n";
}

RawTradeRecord give_get(const std::string& id, const std::string& give, const std::string& get,
                        const std::string& amount_give, const std::string& amount_get,
                        TxStatus status = TxStatus::success) {
    RawTradeRecord r;
    r.exchange_id = "etherdelta";
    r.trade_id = id;
    r.block_number = 10;
    r.timestamp = 100;
    r.seller = "0xmaker";
    r.buyer = "0xtaker";
    r.token_give = give;
    r.token_get = get;
    r.amount_give = amount_give;
    r.amount_get = amount_get;
    r.status = status;
    r.unit = AmountUnit::base;
    return r;
}

}  // namespace

TEST_CASE("load_trades: header only yields no records") {
    CHECK(parse_trades_csv(kHeader).empty());
    CHECK(parse_trades_jsonl("").empty());
}

TEST_CASE("load_trades: rows come back in file order") {
    const auto recs = parse_trades_csv(kHeader + row("c", "0xa", "0xb", "1", "0.1") + row("a", "0xb", "0xa", "2", "0.2") +
                                       row("b", "0xa", "0xc", "3", "0.3"));
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].trade_id == "c");
    CHECK(recs[1].trade_id == "a");
    CHECK(recs[2].trade_id == "b");
    CHECK(recs[1].amount_give == "2");
    CHECK(recs[1].token_get == kEth);
    CHECK(recs[1].unit == AmountUnit::whole);
}

TEST_CASE("load_trades: malformed rows name the line and field") {
    const std::string text = kHeader + row("a", "0xa", "0xb", "1", "0.1") + row("b", "0xa", "0xb", "ten", "0.1");
    try {
        parse_trades_csv(text);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("token_amount") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_trades_csv(kHeader + "idex,a,1,2,0xa\n"), DataError);
    CHECK_THROWS_AS(parse_trades_csv(kHeader + row("a", "0xa", "0xb", "1", "0.1", "pending")), DataError);
    CHECK_THROWS_AS(parse_trades_csv("foo,bar\n"), DataError);
    CHECK_THROWS_AS(parse_trades_csv(kHeader + row("a", "0xa", "0xb", "-1", "0.1")), DataError);
}

TEST_CASE("load_trades: unknown format is a configuration error") {
    CHECK_THROWS_AS(parse_input_format("parquet"), ConfigError);
    CHECK(parse_input_format("jsonl") == InputFormat::jsonl);
}

TEST_CASE("load_trades: missing file is a data error") {
    CHECK_THROWS_AS(load_trades("/nonexistent/trades.csv", InputFormat::csv), DataError);
}

TEST_CASE("large CSV bodies parse in chunks with correct line numbers") {
    std::string text = kHeader;
    for (int i = 0; i < 30000; ++i) text += row("id" + std::to_string(i), "0xa", "0xb", "1.5", "0.01");
    const auto recs = parse_trades_csv(text);
    REQUIRE(recs.size() == 30000);
    CHECK(recs[29999].trade_id == "id29999");
    text += row("bad", "0xa", "0xb", "x", "0.01");
    try {
        parse_trades_csv(text);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 30002") != std::string::npos);
    }
}

TEST_CASE("JSONL mirrors the CSV field names") {
    const auto recs = parse_trades_jsonl(
        R"({"exchange_id":"idex","trade_id":"a","block_number":1,"timestamp":5,"seller":"0xa","buyer":"0xb","token":"0xt","token_amount":"2.5","eth_amount":0.5,"status":"success"})"
        "\n");
    REQUIRE(recs.size() == 1);
    const auto pre = preprocess(recs);
    REQUIRE(pre.trades.size() == 1);
    CHECK(pre.trades[0].token_amount == dec("2.5"));
    CHECK(pre.trades[0].eth_amount == dec("0.5"));
    CHECK_THROWS_AS(parse_trades_jsonl("{not json}\n"), DataError);
    CHECK_THROWS_AS(parse_trades_jsonl(R"({"trade_id":"a"})"
                                       "\n"),
                    DataError);
}

TEST_CASE("preprocess: failed transactions are rejected") {
    const auto recs = parse_trades_csv(kHeader + row("a", "0xa", "0xb", "1", "0.1", "failed"));
    const auto pre = preprocess(recs);
    CHECK(pre.trades.empty());
    CHECK(pre.rejected.failed_tx == 1);
}

TEST_CASE("preprocess: token-for-token trades are rejected") {
    const RawTradeRecord r = give_get("x", "0xtokA", "0xtokB", "1", "2");
    const auto pre = preprocess(std::span(&r, 1));
    CHECK(pre.trades.empty());
    CHECK(pre.rejected.token_token_trade == 1);
    const RawTradeRecord both_eth = give_get("y", kEth, kEth, "1", "2");
    CHECK(preprocess(std::span(&both_eth, 1)).rejected.token_token_trade == 1);
}

TEST_CASE("preprocess: roles follow token flow") {
    // Maker gives tokens for ETH: the maker is the token seller.
    const RawTradeRecord sell = give_get("s", "0xtok", kEth, "2000000000000000000", "500000000000000000");
    // Maker gives ETH for tokens: the taker is the token seller.
    const RawTradeRecord buy = give_get("b", kEth, "0xtok", "500000000000000000", "2000000000000000000");
    const std::vector<RawTradeRecord> recs{sell, buy};
    const auto pre = preprocess(recs);
    REQUIRE(pre.trades.size() == 2);
    const Trade& b = pre.trades[0];  // "b" < "s" at equal timestamp and block
    const Trade& s = pre.trades[1];
    CHECK(s.seller == "0xmaker");
    CHECK(s.buyer == "0xtaker");
    CHECK(b.seller == "0xtaker");
    CHECK(b.buyer == "0xmaker");
    CHECK(s.token == "0xtok");
    CHECK(s.token_amount == dec("2"));
    CHECK(s.eth_amount == dec("0.5"));
    CHECK(b.token_amount == dec("2"));
}

TEST_CASE("preprocess: token decimals come from metadata, default 18") {
    const RawTradeRecord r = give_get("s", "0xusdc", kEth, "2500000", "1000000000000000000");
    TokenDecimals meta{{"0xusdc", 6}};
    CHECK(preprocess(std::span(&r, 1), meta).trades[0].token_amount == dec("2.5"));
    CHECK(preprocess(std::span(&r, 1)).trades[0].token_amount == dec("0.0000000000025"));
}

TEST_CASE("preprocess: missing, duplicate, zero and out-of-range records") {
    std::vector<RawTradeRecord> recs = {give_get("a", "0xtok", kEth, "1", "1"), give_get("a", "0xtok", kEth, "2", "2"),
                                        give_get("z", "0xtok", kEth, "0", "1"), give_get("m", "0xtok", kEth, "", "1"),
                                        give_get("o", "0xtok", kEth, "1" + std::string(70, '0'), "1")};
    recs.push_back(give_get("n", "0xtok", kEth, "1", "1"));
    recs.back().timestamp.reset();
    const auto pre = preprocess(recs);
    CHECK(pre.trades.size() == 1);
    CHECK(pre.rejected.duplicate == 1);
    CHECK(pre.rejected.zero_amount == 1);
    CHECK(pre.rejected.missing_data == 2);
    CHECK(pre.rejected.out_of_range == 1);
    CHECK(pre.rejected.total() + pre.trades.size() == recs.size());
}

TEST_CASE("preprocess: unknown status is accepted") {
    const RawTradeRecord r = give_get("u", "0xtok", kEth, "1", "1", TxStatus::unknown);
    CHECK(preprocess(std::span(&r, 1)).trades.size() == 1);
}

TEST_CASE("preprocess: output is ordered by (timestamp, block, trade id)") {
    const auto recs = parse_trades_csv(kHeader + row("b", "0xa", "0xb", "1", "1", "success", 20) +
                                       row("a", "0xa", "0xb", "1", "1", "success", 20) +
                                       row("c", "0xa", "0xb", "1", "1", "success", 10));
    const auto pre = preprocess(recs);
    REQUIRE(pre.trades.size() == 3);
    CHECK(pre.trades[0].trade_id == "c");
    CHECK(pre.trades[1].trade_id == "a");
    CHECK(pre.trades[2].trade_id == "b");
}

TEST_CASE("property: preprocess invariants on random records") {
    std::mt19937_64 rng(7);
    const char* amounts[] = {"0", "1", "2.5", "1e2", ""};
    const char* assets[] = {"0xtok", "0xother", kEthAddress.data()};
    for (int round = 0; round < 50; ++round) {
        std::vector<RawTradeRecord> recs;
        for (int i = 0; i < 40; ++i) {
            RawTradeRecord r = give_get("id" + std::to_string(rng() % 30), assets[rng() % 3], assets[rng() % 3],
                                        amounts[rng() % 5], amounts[rng() % 5],
                                        static_cast<TxStatus>(rng() % 3));
            r.unit = AmountUnit::whole;
            r.timestamp = static_cast<std::int64_t>(rng() % 5);
            recs.push_back(r);
        }
        const auto pre = preprocess(recs);
        CHECK(pre.rejected.total() + pre.trades.size() == recs.size());
        for (const Trade& t : pre.trades) {
            CHECK(t.token_amount.raw() > 0);
            CHECK(t.eth_amount.raw() > 0);
            CHECK_FALSE(is_eth(t.token));
        }
        CHECK(std::is_sorted(pre.trades.begin(), pre.trades.end(), OrderKeyLess{}));

        std::vector<RawTradeRecord> again;
        for (const Trade& t : pre.trades) again.push_back(to_record(t));
        const auto pre2 = preprocess(again);
        REQUIRE(pre2.trades.size() == pre.trades.size());
        CHECK(pre2.rejected.total() == 0);
        for (std::size_t i = 0; i < pre.trades.size(); ++i) {
            CHECK(pre2.trades[i].trade_id == pre.trades[i].trade_id);
            CHECK(pre2.trades[i].seller == pre.trades[i].seller);
            CHECK(pre2.trades[i].buyer == pre.trades[i].buyer);
            CHECK(pre2.trades[i].token_amount == pre.trades[i].token_amount);
            CHECK(pre2.trades[i].eth_amount == pre.trades[i].eth_amount);
        }
    }
}

TEST_CASE("format_trades_csv round-trips through the reader") {
    const auto pre = preprocess(parse_trades_csv(kHeader + row("a", "0xa", "0xb", "1.25", "0.5") +
                                                 row("b", "0xb", "0xa", "3", "0.75")));
    const auto back = preprocess(parse_trades_csv(format_trades_csv(pre.trades)));
    REQUIRE(back.trades.size() == 2);
    CHECK(back.trades[0].token_amount == dec("1.25"));
    CHECK(back.trades[1].eth_amount == dec("0.75"));
}

TEST_CASE("join_usd") {
    const auto rates = parse_rates_csv("date,usd_per_eth\n2018-01-02,310\n2018-01-01,300\n");
    REQUIRE(rates.size() == 2);
    CHECK(rates[0].usd_per_eth == dec("300"));

    std::vector<Trade> trades = {testing_support::trade("a", "x", "y", "2", 1514764800),
                                 testing_support::trade("b", "x", "y", "1", 1514764800 + 2 * 86400)};
    trades[0].eth_amount = dec("2");
    SUBCASE("trade of 2 ETH on a day with rate 300 gets 600 USD; a day without a rate stays unset") {
        const auto joined = join_usd(trades, rates);
        REQUIRE(joined.trades[0].usd_value);
        CHECK(*joined.trades[0].usd_value == dec("600"));
        CHECK_FALSE(joined.trades[1].usd_value);
        CHECK(joined.missing_rate == 1);
    }
    SUBCASE("empty rates leave every value unset") {
        const auto joined = join_usd(trades, {});
        CHECK(joined.missing_rate == 2);
        CHECK_FALSE(joined.trades[0].usd_value);
    }
}

TEST_CASE("rates and token metadata errors") {
    CHECK_THROWS_AS(parse_rates_csv("date,usd_per_eth\n2018-01-01,300\n2018-01-01,301\n"), DataError);
    CHECK_THROWS_AS(parse_rates_csv("date,usd_per_eth\n2018-01-01,0\n"), DataError);
    CHECK_THROWS_AS(parse_rates_csv("date,usd_per_eth\n01/01/2018,300\n"), DataError);
    CHECK_THROWS_AS(parse_rates_csv("day,rate\n"), DataError);
    CHECK(parse_token_metadata_csv("token,decimals\n0xa,6\n").at("0xa") == 6);
    CHECK_THROWS_AS(parse_token_metadata_csv("token,decimals\n0xa,x\n"), DataError);
}
