#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "rtpshape/error.hpp"

namespace rtpshape {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact value numerator / 2^shift. The smoothed jitter recurrence only ever
/// divides by 16, so its state stays dyadic and never needs a gcd.
struct Dyadic {
    BigInt numerator = 0;
    unsigned shift = 0;

    Rational to_rational() const { return Rational(numerator, BigInt(1) << shift); }

    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.to_rational() == b.to_rational();
    }
};

namespace detail {

// Round-half-even of num / den (den > 0).
inline BigInt round_half_even(const BigInt& num, const BigInt& den) {
    BigInt q = num / den;
    BigInt r = num % den;
    if (r < 0) {
        r += den;
        q -= 1;
    }
    BigInt twice = 2 * r;
    if (twice > den || (twice == den && (q & 1) != 0)) {
        q += 1;
    }
    return q;
}

inline std::string format_scaled(const BigInt& scaled, int digits) {
    bool negative = scaled < 0;
    std::string s = (negative ? BigInt(-scaled) : scaled).str();
    if (digits > 0) {
        if (s.size() <= static_cast<std::size_t>(digits)) {
            s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
        }
        s.insert(s.size() - static_cast<std::size_t>(digits), ".");
        while (s.back() == '0') {
            s.pop_back();
        }
        if (s.back() == '.') {
            s.pop_back();
        }
    }
    if (negative && s != "0") {
        s.insert(0, "-");
    }
    return s;
}

// Boost reads a leading 0 as an octal prefix, so strip it first.
inline BigInt decimal_bigint(std::string_view digits) {
    auto first = digits.find_first_not_of('0');
    if (first == std::string_view::npos) {
        return 0;
    }
    return BigInt(std::string(digits.substr(first)));
}

inline BigInt pow10(int digits) {
    BigInt p = 1;
    for (int i = 0; i < digits; ++i) {
        p *= 10;
    }
    return p;
}

} // namespace detail

/// Exact decimal rendering with at most `digits` fractional digits,
/// rounded half-to-even, trailing zeros trimmed.
inline std::string to_decimal(const Rational& value, int digits = 6) {
    BigInt num = numerator(value) * detail::pow10(digits);
    return detail::format_scaled(detail::round_half_even(num, denominator(value)), digits);
}

inline std::string to_decimal(const Dyadic& value, int digits = 6) {
    BigInt num = value.numerator * detail::pow10(digits);
    return detail::format_scaled(detail::round_half_even(num, BigInt(1) << value.shift), digits);
}

/// Parses "3", "1/20" or "0.05" into an exact rational.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&] { return ConfigError("not a rational number: '" + std::string(text) + "'"); };
    auto digits_only = [](std::string_view s) {
        return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
    };
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto n = text.substr(0, slash);
        auto d = text.substr(slash + 1);
        if (!digits_only(n) || !digits_only(d)) throw fail();
        BigInt den = detail::decimal_bigint(d);
        if (den == 0) throw fail();
        return Rational(detail::decimal_bigint(n), den);
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = text.substr(0, dot);
        auto frac = text.substr(dot + 1);
        if (!digits_only(whole) || !digits_only(frac)) throw fail();
        BigInt num = detail::decimal_bigint(std::string(whole) + std::string(frac));
        return Rational(num, detail::pow10(static_cast<int>(frac.size())));
    }
    if (!digits_only(text)) throw fail();
    return Rational(detail::decimal_bigint(text));
}

} // namespace rtpshape
