#include "washtrade/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"

#include "csv_util.hpp"
#include "washtrade/calendar.hpp"
#include "washtrade/errors.hpp"

namespace washtrade {

namespace {

constexpr std::string_view kNormalizedHeader =
    "exchange_id,trade_id,block_number,timestamp,seller,buyer,token,token_amount,eth_amount,status";

enum Column : int {
    kExchange,
    kTradeId,
    kBlock,
    kTimestamp,
    kSeller,
    kBuyer,
    kToken,
    kTokenAmount,
    kEthAmount,
    kTokenGive,
    kTokenGet,
    kAmountGive,
    kAmountGet,
    kStatus,
    kColumnCount
};

constexpr std::string_view kColumnNames[kColumnCount] = {
    "exchange_id", "trade_id", "block_number", "timestamp",   "seller",    "buyer",      "token",
    "token_amount", "eth_amount", "token_give", "token_get", "amount_give", "amount_get", "status"};

struct Layout {
    AmountUnit unit = AmountUnit::whole;
    int index[kColumnCount];
    std::size_t width = 0;
};

[[noreturn]] void fail_field(std::size_t line, std::string_view field, std::string_view why) {
    std::ostringstream os;
    os << "line " << line << ", field " << field << ": " << why;
    throw DataError(os.str());
}

/// Plain decimal literal check (sign not allowed: amounts are non-negative).
bool is_amount_literal(std::string_view s, AmountUnit unit) {
    if (s.empty()) return false;
    if (unit == AmountUnit::base) return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    bool digit = false, dot = false;
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c >= '0' && c <= '9') {
            digit = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!digit) return false;
    if (i == s.size()) return true;
    if (s[i] != 'e' && s[i] != 'E') return false;
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Layout detect_layout(const std::vector<std::string>& header) {
    Layout layout;
    std::fill(std::begin(layout.index), std::end(layout.index), -1);
    for (std::size_t i = 0; i < header.size(); ++i) {
        for (int c = 0; c < kColumnCount; ++c) {
            if (header[i] == kColumnNames[c]) layout.index[c] = static_cast<int>(i);
        }
    }
    layout.width = header.size();
    const bool normalized = layout.index[kToken] >= 0;
    const bool give_get = layout.index[kTokenGive] >= 0;
    if (normalized == give_get) {
        throw DataError("header must contain either `token,token_amount,eth_amount` or "
                        "`token_give,token_get,amount_give,amount_get`");
    }
    layout.unit = normalized ? AmountUnit::whole : AmountUnit::base;
    std::vector<Column> required = {kExchange, kTradeId, kBlock, kTimestamp, kSeller, kBuyer, kStatus};
    if (normalized) {
        required.insert(required.end(), {kToken, kTokenAmount, kEthAmount});
    } else {
        required.insert(required.end(), {kTokenGive, kTokenGet, kAmountGive, kAmountGet});
    }
    for (Column c : required) {
        if (layout.index[c] < 0) throw DataError("header is missing column `" + std::string(kColumnNames[c]) + "`");
    }
    return layout;
}

/// Field accessor shared by the CSV and JSONL readers.
struct FieldSource {
    virtual ~FieldSource() = default;
    virtual std::string get(Column c) const = 0;
};

RawTradeRecord build_record(const FieldSource& src, AmountUnit unit, std::size_t line) {
    RawTradeRecord r;
    r.unit = unit;
    r.exchange_id = src.get(kExchange);
    r.trade_id = src.get(kTradeId);
    r.seller = src.get(kSeller);
    r.buyer = src.get(kBuyer);

    if (auto s = src.get(kBlock); !s.empty()) {
        auto v = csv::parse_int<std::uint64_t>(s);
        if (!v) fail_field(line, "block_number", "not a non-negative integer: `" + s + "`");
        r.block_number = *v;
    }
    if (auto s = src.get(kTimestamp); !s.empty()) {
        auto v = csv::parse_int<std::int64_t>(s);
        if (!v) fail_field(line, "timestamp", "not an integer: `" + s + "`");
        r.timestamp = *v;
    }

    auto amount = [&](Column c, std::string& out) {
        out = src.get(c);
        if (!out.empty() && !is_amount_literal(out, unit)) {
            fail_field(line, kColumnNames[c], "not a non-negative number: `" + out + "`");
        }
    };
    if (unit == AmountUnit::whole) {
        r.token_give = src.get(kToken);
        r.token_get = std::string(kEthAddress);
        amount(kTokenAmount, r.amount_give);
        amount(kEthAmount, r.amount_get);
    } else {
        r.token_give = src.get(kTokenGive);
        r.token_get = src.get(kTokenGet);
        amount(kAmountGive, r.amount_give);
        amount(kAmountGet, r.amount_get);
    }

    const std::string status = src.get(kStatus);
    if (status.empty() || status == "unknown") {
        r.status = TxStatus::unknown;
    } else if (status == "success") {
        r.status = TxStatus::success;
    } else if (status == "failed") {
        r.status = TxStatus::failed;
    } else {
        fail_field(line, "status", "expected success|failed|unknown, got `" + status + "`");
    }
    return r;
}

struct CsvRow final : FieldSource {
    const Layout& layout;
    const std::vector<std::string>& fields;
    CsvRow(const Layout& l, const std::vector<std::string>& f) : layout(l), fields(f) {}
    std::string get(Column c) const override {
        const int i = layout.index[c];
        return i < 0 ? std::string() : fields[static_cast<std::size_t>(i)];
    }
};

struct JsonRow final : FieldSource {
    const nlohmann::json& obj;
    explicit JsonRow(const nlohmann::json& o) : obj(o) {}
    std::string get(Column c) const override {
        auto it = obj.find(kColumnNames[c]);
        if (it == obj.end() || it->is_null()) return {};
        if (it->is_string()) return it->get<std::string>();
        if (it->is_number_integer() || it->is_number_unsigned()) return it->dump();
        if (it->is_number_float()) return it->dump();
        return it->dump();
    }
};

struct ChunkResult {
    std::vector<RawTradeRecord> records;
    std::string error;
};

void parse_chunk(std::string_view text, std::size_t first_line, const Layout& layout, ChunkResult& out) {
    std::vector<std::string> fields;
    try {
        csv::for_each_line(text, [&](std::string_view line, std::size_t n) {
            const std::size_t line_no = first_line + n - 1;
            if (!csv::split(line, fields)) fail_field(line_no, "(row)", "unterminated quote");
            if (fields.size() != layout.width) {
                std::ostringstream os;
                os << "line " << line_no << ": expected " << layout.width << " fields, got " << fields.size();
                throw DataError(os.str());
            }
            out.records.push_back(build_record(CsvRow(layout, fields), layout.unit, line_no));
        });
    } catch (const DataError& e) {
        out.error = e.what();
    }
}

}  // namespace

InputFormat parse_input_format(std::string_view name) {
    if (name == "csv") return InputFormat::csv;
    if (name == "jsonl") return InputFormat::jsonl;
    throw ConfigError("unknown input format `" + std::string(name) + "` (expected csv or jsonl)");
}

TxStatus parse_status(std::string_view s) {
    if (s == "success") return TxStatus::success;
    if (s == "failed") return TxStatus::failed;
    return TxStatus::unknown;
}

std::string_view to_string(TxStatus s) {
    switch (s) {
        case TxStatus::success:
            return "success";
        case TxStatus::failed:
            return "failed";
        case TxStatus::unknown:
            break;
    }
    return "unknown";
}

std::vector<RawTradeRecord> parse_trades_csv(std::string_view text) {
    const std::size_t header_end = text.find('\n');
    const std::string_view header_line = csv::trim_cr(text.substr(0, header_end));
    if (header_line.empty()) throw DataError("trade CSV has no header");
    std::vector<std::string> header;
    if (!csv::split(header_line, header)) throw DataError("line 1: malformed header");
    const Layout layout = detect_layout(header);
    if (header_end == std::string_view::npos) return {};
    const std::string_view body = text.substr(header_end + 1);

    // Chunk boundaries fall on newlines so every chunk holds whole rows.
    int chunks = 1;
#ifdef _OPENMP
    if (body.size() > (1u << 20)) chunks = std::max(1, omp_get_max_threads()) * 4;
#endif
    std::vector<std::size_t> starts{0};
    for (int c = 1; c < chunks; ++c) {
        std::size_t guess = body.size() * static_cast<std::size_t>(c) / static_cast<std::size_t>(chunks);
        if (guess <= starts.back()) continue;
        const std::size_t nl = body.find('\n', guess);
        if (nl == std::string_view::npos) break;
        if (nl + 1 > starts.back()) starts.push_back(nl + 1);
    }
    starts.push_back(body.size());
    const std::size_t n = starts.size() - 1;

    std::vector<std::size_t> first_line(n, 0);
    std::size_t line = 2;  // first body line in file numbering
    for (std::size_t c = 0; c < n; ++c) {
        first_line[c] = line;
        const std::string_view piece = body.substr(starts[c], starts[c + 1] - starts[c]);
        line += static_cast<std::size_t>(std::count(piece.begin(), piece.end(), '\n'));
    }

    std::vector<ChunkResult> results(n);
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n); ++c) {
        const auto cu = static_cast<std::size_t>(c);
        parse_chunk(body.substr(starts[cu], starts[cu + 1] - starts[cu]), first_line[cu], layout, results[cu]);
    }

    std::size_t total = 0;
    for (const auto& r : results) {
        if (!r.error.empty()) throw DataError(r.error);
        total += r.records.size();
    }
    std::vector<RawTradeRecord> out;
    out.reserve(total);
    for (auto& r : results) std::move(r.records.begin(), r.records.end(), std::back_inserter(out));
    return out;
}

std::vector<RawTradeRecord> parse_trades_jsonl(std::string_view text) {
    std::vector<RawTradeRecord> out;
    csv::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail_field(line_no, "(row)", std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) fail_field(line_no, "(row)", "expected a JSON object");
        const AmountUnit unit = obj.contains("token") ? AmountUnit::whole : AmountUnit::base;
        if (unit == AmountUnit::base && !obj.contains("token_give")) {
            fail_field(line_no, "token", "object has neither `token` nor `token_give`");
        }
        out.push_back(build_record(JsonRow(obj), unit, line_no));
    });
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open `" + path.string() + "`");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::vector<RawTradeRecord> load_trades(const std::filesystem::path& path, InputFormat format) {
    const std::string text = read_file(path);
    return format == InputFormat::csv ? parse_trades_csv(text) : parse_trades_jsonl(text);
}

PreprocessResult preprocess(std::span<const RawTradeRecord> records, const TokenDecimals& decimals) {
    PreprocessResult out;
    out.trades.reserve(records.size());
    std::unordered_set<std::string_view> seen;
    seen.reserve(records.size());

    auto to_amount = [&](const std::string& s, AmountUnit unit, const std::string& asset) -> std::optional<Decimal> {
        if (unit == AmountUnit::whole) return Decimal::parse(s);
        int d = kDefaultTokenDecimals;
        if (!is_eth(asset)) {
            if (auto it = decimals.find(asset); it != decimals.end()) d = it->second;
        }
        return Decimal::from_base_units(s, d);
    };

    for (const RawTradeRecord& r : records) {
        if (r.trade_id.empty() || r.exchange_id.empty() || !r.block_number || !r.timestamp || r.seller.empty() ||
            r.buyer.empty() || r.token_give.empty() || r.token_get.empty() || r.amount_give.empty() ||
            r.amount_get.empty()) {
            ++out.rejected.missing_data;
            continue;
        }
        if (!seen.insert(r.trade_id).second) {
            ++out.rejected.duplicate;
            continue;
        }
        if (r.status == TxStatus::failed) {
            ++out.rejected.failed_tx;
            continue;
        }
        const bool give_eth = is_eth(r.token_give);
        const bool get_eth = is_eth(r.token_get);
        if (give_eth == get_eth) {
            ++out.rejected.token_token_trade;
            continue;
        }
        auto give = to_amount(r.amount_give, r.unit, r.token_give);
        auto get = to_amount(r.amount_get, r.unit, r.token_get);
        if (!give || !get) {
            ++out.rejected.out_of_range;
            continue;
        }
        if (give->raw() <= 0 || get->raw() <= 0) {
            ++out.rejected.zero_amount;
            continue;
        }

        Trade t;
        t.trade_id = r.trade_id;
        t.exchange_id = r.exchange_id;
        t.block_number = *r.block_number;
        t.timestamp = *r.timestamp;
        if (!give_eth) {
            // seller side hands over the token
            t.seller = r.seller;
            t.buyer = r.buyer;
            t.token = r.token_give;
            t.token_amount = *give;
            t.eth_amount = *get;
        } else {
            t.seller = r.buyer;
            t.buyer = r.seller;
            t.token = r.token_get;
            t.token_amount = *get;
            t.eth_amount = *give;
        }
        out.trades.push_back(std::move(t));
    }
    std::sort(out.trades.begin(), out.trades.end(), OrderKeyLess{});
    return out;
}

RawTradeRecord to_record(const Trade& t) {
    RawTradeRecord r;
    r.exchange_id = t.exchange_id;
    r.trade_id = t.trade_id;
    r.block_number = t.block_number;
    r.timestamp = t.timestamp;
    r.seller = t.seller;
    r.buyer = t.buyer;
    r.token_give = t.token;
    r.token_get = std::string(kEthAddress);
    r.amount_give = t.token_amount.to_string();
    r.amount_get = t.eth_amount.to_string();
    r.status = TxStatus::success;
    r.unit = AmountUnit::whole;
    return r;
}

TokenDecimals parse_token_metadata_csv(std::string_view text) {
    TokenDecimals out;
    std::vector<std::string> fields;
    bool header = true;
    csv::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (!csv::split(line, fields) || fields.size() != 2) fail_field(line_no, "(row)", "expected `token,decimals`");
        if (header) {
            header = false;
            if (fields[0] != "token" || fields[1] != "decimals") throw DataError("token metadata header must be `token,decimals`");
            return;
        }
        auto d = csv::parse_int<int>(fields[1]);
        if (!d || *d < 0 || *d > 76) fail_field(line_no, "decimals", "expected an integer in [0, 76]");
        out[fields[0]] = *d;
    });
    return out;
}

TokenDecimals load_token_metadata(const std::filesystem::path& path) { return parse_token_metadata_csv(read_file(path)); }

std::vector<EthUsdRate> parse_rates_csv(std::string_view text) {
    std::vector<EthUsdRate> out;
    std::vector<std::string> fields;
    bool header = true;
    csv::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (!csv::split(line, fields) || fields.size() != 2) fail_field(line_no, "(row)", "expected `date,usd_per_eth`");
        if (header) {
            header = false;
            if (fields[0] != "date" || fields[1] != "usd_per_eth") throw DataError("rates header must be `date,usd_per_eth`");
            return;
        }
        auto day = parse_iso_date(fields[0]);
        if (!day) fail_field(line_no, "date", "not an ISO-8601 date: `" + fields[0] + "`");
        auto rate = Decimal::parse(fields[1]);
        if (!rate || rate->raw() <= 0) fail_field(line_no, "usd_per_eth", "expected a positive decimal");
        out.push_back({*day, *rate});
    });
    std::sort(out.begin(), out.end(), [](const EthUsdRate& a, const EthUsdRate& b) { return a.day < b.day; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].day == out[i - 1].day) throw DataError("duplicate rate for " + format_iso_date(out[i].day));
    }
    return out;
}

std::vector<EthUsdRate> load_rates(const std::filesystem::path& path) { return parse_rates_csv(read_file(path)); }

UsdJoin join_usd(std::vector<Trade> trades, std::span<const EthUsdRate> rates) {
    UsdJoin out;
    for (Trade& t : trades) {
        const std::int64_t day = utc_day(t.timestamp);
        auto it = std::lower_bound(rates.begin(), rates.end(), day,
                                   [](const EthUsdRate& r, std::int64_t d) { return r.day < d; });
        if (it != rates.end() && it->day == day) {
            t.usd_value = t.eth_amount * it->usd_per_eth;
        } else {
            t.usd_value.reset();
            ++out.missing_rate;
        }
    }
    out.trades = std::move(trades);
    return out;
}

std::string format_trades_csv(std::span<const Trade> trades) {
    std::string out(kNormalizedHeader);
    out += '\n';
    for (const Trade& t : trades) {
        out += csv::escape(t.exchange_id);
        out += ',';
        out += csv::escape(t.trade_id);
        out += ',';
        out += std::to_string(t.block_number);
        out += ',';
        out += std::to_string(t.timestamp);
        out += ',';
        out += csv::escape(t.seller);
        out += ',';
        out += csv::escape(t.buyer);
        out += ',';
        out += csv::escape(t.token);
        out += ',';
        out += t.token_amount.to_string();
        out += ',';
        out += t.eth_amount.to_string();
        out += ",success\n";
    }
    return out;
}

}  // namespace washtrade
