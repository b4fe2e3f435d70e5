#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "washtrade/decimal.hpp"

namespace washtrade {

/// Asset address used for the base currency. Both DEXes encode ETH as the zero address.
inline constexpr std::string_view kEthAddress = "0x0000000000000000000000000000000000000000";

inline bool is_eth(std::string_view asset) {
    return asset == kEthAddress || asset == "eth" || asset == "ETH";
}

/// One settled ETH/token trade. The token moves from `seller` to `buyer`.
struct Trade {
    std::string trade_id;
    std::string exchange_id;
    std::uint64_t block_number = 0;
    std::int64_t timestamp = 0;  // UTC seconds
    std::string seller;
    std::string buyer;
    std::string token;
    Decimal token_amount;  // whole tokens
    Decimal eth_amount;    // ETH
    std::optional<Decimal> usd_value;

    [[nodiscard]] bool is_self_trade() const { return seller == buyer; }
};

/// Total order over trades: (timestamp, block_number, trade_id).
struct OrderKey {
    std::int64_t timestamp;
    std::uint64_t block_number;
    std::string_view trade_id;

    friend auto operator<=>(const OrderKey&, const OrderKey&) = default;
    friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

inline OrderKey order_key(const Trade& t) { return {t.timestamp, t.block_number, t.trade_id}; }

struct OrderKeyLess {
    bool operator()(const Trade& a, const Trade& b) const { return order_key(a) < order_key(b); }
};

/// Trades are analysed per (exchange, token) market so that separate venues never share a graph.
struct MarketKey {
    std::string exchange_id;
    std::string token;

    friend auto operator<=>(const MarketKey&, const MarketKey&) = default;
    friend bool operator==(const MarketKey&, const MarketKey&) = default;
};

inline MarketKey market_of(const Trade& t) { return {t.exchange_id, t.token}; }

}  // namespace washtrade
