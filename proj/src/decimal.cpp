#include "washtrade/decimal.hpp"

#include <cstdio>
#include <limits>
#include <stdexcept>

namespace washtrade {

namespace {

const Wide kMaxRaw = [] {
    Wide w = 1;
    w <<= 127;
    return Wide(w - 1);
}();

Wide pow10_wide(int n) {
    Wide w = 1;
    for (int i = 0; i < n; ++i) w *= 10;
    return w;
}

std::optional<__int128> narrow(const Wide& w) {
    if (w > kMaxRaw || w < -kMaxRaw) return std::nullopt;
    const bool neg = w < 0;
    Wide mag = neg ? Wide(-w) : w;
    const auto hi = static_cast<std::uint64_t>(mag >> 64);
    const auto lo = static_cast<std::uint64_t>(mag & Wide(std::numeric_limits<std::uint64_t>::max()));
    const auto u = (static_cast<unsigned __int128>(hi) << 64) | lo;
    const auto r = static_cast<__int128>(u);
    return neg ? -r : r;
}

// Mantissa digits are capped so the accumulator never leaves int256 range.
constexpr std::size_t kMaxDigits = 60;

}  // namespace

std::optional<Decimal> Decimal::parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = s[i] == '-';
        ++i;
    }
    Wide mantissa = 0;
    int frac_digits = 0;
    std::size_t digits = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c >= '0' && c <= '9') {
            any_digit = true;
            if (mantissa != 0 || c != '0') ++digits;
            if (digits > kMaxDigits) return std::nullopt;
            mantissa = mantissa * 10 + (c - '0');
            if (seen_dot) ++frac_digits;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!any_digit) return std::nullopt;
    int exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') return std::nullopt;
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            eneg = s[i] == '-';
            ++i;
        }
        if (i == s.size()) return std::nullopt;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            exponent = exponent * 10 + (s[i] - '0');
            if (exponent > 400) return std::nullopt;
        }
        if (eneg) exponent = -exponent;
    }
    const int shift = kScale - frac_digits + exponent;
    Wide raw;
    if (shift >= 0) {
        if (mantissa != 0 && static_cast<int>(digits) + shift > 40) return std::nullopt;
        raw = mantissa * pow10_wide(shift);
    } else {
        if (-shift > 76) {
            if (mantissa != 0) return std::nullopt;
            raw = 0;
        } else {
            const Wide div = pow10_wide(-shift);
            if (mantissa % div != 0) return std::nullopt;
            raw = mantissa / div;
        }
    }
    if (neg) raw = -raw;
    auto r = narrow(raw);
    if (!r) return std::nullopt;
    return from_raw(*r);
}

std::optional<Decimal> Decimal::from_base_units(std::string_view digits, int decimals) {
    if (digits.empty() || decimals < 0 || decimals > 76) return std::nullopt;
    Wide v = 0;
    std::size_t significant = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        if (v != 0 || c != '0') ++significant;
        if (significant > kMaxDigits) return std::nullopt;
        v = v * 10 + (c - '0');
    }
    if (decimals <= kScale) {
        if (v != 0 && static_cast<int>(significant) + kScale - decimals > 40) return std::nullopt;
        v *= pow10_wide(kScale - decimals);
    } else {
        v /= pow10_wide(decimals - kScale);
    }
    auto r = narrow(v);
    if (!r) return std::nullopt;
    return from_raw(*r);
}

std::optional<Decimal> Decimal::from_double(double v) {
    if (!(v == v) || v > 1.0e20 || v < -1.0e20) return std::nullopt;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.18f", v);
    return parse(buf);
}

double Decimal::to_double() const {
    const __int128 ip = raw_ / kOne;
    const __int128 fp = raw_ % kOne;
    return static_cast<double>(ip) + static_cast<double>(fp) / 1e18;
}

std::string Decimal::to_string() const {
    const bool neg = raw_ < 0;
    unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(raw_) : static_cast<unsigned __int128>(raw_);
    const auto one = static_cast<unsigned __int128>(kOne);
    unsigned __int128 ip = mag / one;
    auto fp = static_cast<std::uint64_t>(mag % one);

    std::string int_part;
    do {
        int_part.insert(int_part.begin(), static_cast<char>('0' + static_cast<int>(ip % 10)));
        ip /= 10;
    } while (ip != 0);

    std::string out = neg ? "-" + int_part : int_part;
    if (fp != 0) {
        char frac[19];
        std::snprintf(frac, sizeof frac, "%018llu", static_cast<unsigned long long>(fp));
        std::string f(frac);
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += '.';
        out += f;
    }
    return out;
}

Decimal operator*(Decimal a, Decimal b) {
    Wide p = to_wide(a) * to_wide(b);
    p /= Wide(static_cast<std::uint64_t>(Decimal::kOne));
    auto r = narrow(p);
    if (!r) throw std::overflow_error("decimal multiplication overflow");
    return Decimal::from_raw(*r);
}

Decimal Decimal::div(std::int64_t count) const {
    if (count <= 0) throw std::invalid_argument("decimal division by non-positive count");
    return from_raw(raw_ / count);
}

}  // namespace washtrade
