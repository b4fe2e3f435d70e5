#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "washtrade/decimal.hpp"
#include "washtrade/trade.hpp"

namespace washtrade {

enum class TxStatus { success, failed, unknown };
enum class InputFormat { csv, jsonl };

/// Units of the amount columns. The normalized layout (`token,token_amount,eth_amount`)
/// carries whole tokens / ETH; the give/get layout carries integer base units.
enum class AmountUnit { whole, base };

/// One input row before filtering. In give/get terms `seller` hands over
/// `amount_give` of `token_give` and `buyer` hands over `amount_get` of `token_get`;
/// preprocess reassigns the roles by token flow. Empty strings mean "missing".
struct RawTradeRecord {
    std::string exchange_id;
    std::string trade_id;
    std::optional<std::uint64_t> block_number;
    std::optional<std::int64_t> timestamp;
    std::string seller;
    std::string buyer;
    std::string token_give;
    std::string token_get;
    std::string amount_give;
    std::string amount_get;
    TxStatus status = TxStatus::unknown;
    AmountUnit unit = AmountUnit::whole;
};

struct RejectionReport {
    std::size_t missing_data = 0;
    std::size_t failed_tx = 0;
    std::size_t token_token_trade = 0;
    std::size_t zero_amount = 0;
    std::size_t duplicate = 0;
    std::size_t out_of_range = 0;  // amount does not fit the fixed-point range

    [[nodiscard]] std::size_t total() const {
        return missing_data + failed_tx + token_token_trade + zero_amount + duplicate + out_of_range;
    }
    friend bool operator==(const RejectionReport&, const RejectionReport&) = default;
};

struct PreprocessResult {
    std::vector<Trade> trades;  // sorted by order key
    RejectionReport rejected;
};

/// token address -> ERC-20 decimals. Absent tokens use 18.
using TokenDecimals = std::map<std::string, int, std::less<>>;
inline constexpr int kDefaultTokenDecimals = 18;

struct EthUsdRate {
    std::int64_t day = 0;  // days since 1970-01-01
    Decimal usd_per_eth;
};

struct UsdJoin {
    std::vector<Trade> trades;
    std::size_t missing_rate = 0;
};

InputFormat parse_input_format(std::string_view name);
TxStatus parse_status(std::string_view s);
std::string_view to_string(TxStatus s);

/// Throws DataError naming the 1-based data row and the offending field.
std::vector<RawTradeRecord> parse_trades_csv(std::string_view text);
std::vector<RawTradeRecord> parse_trades_jsonl(std::string_view text);
std::vector<RawTradeRecord> load_trades(const std::filesystem::path& path, InputFormat format);

PreprocessResult preprocess(std::span<const RawTradeRecord> records, const TokenDecimals& decimals = {});

/// Inverse of preprocess for accepted trades (whole units, status success).
RawTradeRecord to_record(const Trade& t);

TokenDecimals parse_token_metadata_csv(std::string_view text);
TokenDecimals load_token_metadata(const std::filesystem::path& path);

std::vector<EthUsdRate> parse_rates_csv(std::string_view text);
std::vector<EthUsdRate> load_rates(const std::filesystem::path& path);

UsdJoin join_usd(std::vector<Trade> trades, std::span<const EthUsdRate> rates);

/// Writes trades in the normalized CSV layout, one row per trade, in the given order.
std::string format_trades_csv(std::span<const Trade> trades);

std::string read_file(const std::filesystem::path& path);

}  // namespace washtrade
