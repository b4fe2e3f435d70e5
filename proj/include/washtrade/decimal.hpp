#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace washtrade {

/// Wide accumulator for exact sums and cross-multiplied comparisons.
using Wide = boost::multiprecision::int256_t;

/// Fixed-point decimal with 18 fractional digits held in a signed 128-bit
/// integer. Range is roughly +/-1.7e20 whole units, which covers ETH and
/// whole-token amounts of every practical ERC-20 trade.
class Decimal {
public:
    static constexpr int kScale = 18;
    static constexpr __int128 kOne = static_cast<__int128>(1000000000000000000LL);

    constexpr Decimal() = default;

    static constexpr Decimal from_raw(__int128 raw) {
        Decimal d;
        d.raw_ = raw;
        return d;
    }
    static constexpr Decimal from_int(std::int64_t v) { return from_raw(static_cast<__int128>(v) * kOne); }

    /// Parses "123", "-0.05", "1e3", "2.5E-2". Returns nullopt on malformed
    /// input, on overflow, or when digits beyond 18 fractional places are non-zero.
    static std::optional<Decimal> parse(std::string_view text);

    /// Parses an integer amount in base units and divides by 10^decimals.
    /// Digits below 10^-18 are truncated. Returns nullopt on malformed input or overflow.
    static std::optional<Decimal> from_base_units(std::string_view digits, int decimals);

    /// Nearest representable value (round half away from zero); nullopt when out of range.
    static std::optional<Decimal> from_double(double v);

    [[nodiscard]] constexpr __int128 raw() const { return raw_; }
    [[nodiscard]] double to_double() const;
    /// Shortest plain-decimal rendering: no exponent, trailing zeros trimmed.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] constexpr bool is_zero() const { return raw_ == 0; }
    [[nodiscard]] constexpr bool is_negative() const { return raw_ < 0; }
    [[nodiscard]] constexpr Decimal abs() const { return from_raw(raw_ < 0 ? -raw_ : raw_); }

    constexpr Decimal operator-() const { return from_raw(-raw_); }
    constexpr Decimal& operator+=(Decimal o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr Decimal& operator-=(Decimal o) {
        raw_ -= o.raw_;
        return *this;
    }
    friend constexpr Decimal operator+(Decimal a, Decimal b) { return a += b; }
    friend constexpr Decimal operator-(Decimal a, Decimal b) { return a -= b; }

    /// Product truncated toward zero to 18 fractional digits.
    friend Decimal operator*(Decimal a, Decimal b);
    /// Quotient by a positive count, truncated toward zero.
    [[nodiscard]] Decimal div(std::int64_t count) const;

    friend constexpr auto operator<=>(Decimal, Decimal) = default;
    friend constexpr bool operator==(Decimal, Decimal) = default;

private:
    __int128 raw_ = 0;
};

inline Wide to_wide(Decimal d) {
    // int256 has no __int128 constructor; compose from two 64-bit halves.
    const __int128 r = d.raw();
    const bool neg = r < 0;
    const unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(r) : static_cast<unsigned __int128>(r);
    Wide w = static_cast<std::uint64_t>(mag >> 64);
    w <<= 64;
    w += static_cast<std::uint64_t>(mag);
    return neg ? Wide(-w) : w;
}

}  // namespace washtrade
