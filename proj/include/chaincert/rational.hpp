// Exact rational arithmetic used throughout the library. All predicates on
// points, boxes and covers are decided by these comparisons; no floating
// point tolerance appears anywhere in the geometry or certificate paths.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chaincert {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

using Coord = std::uint32_t;

inline BigInt rat_num(const Rat& q) { return numerator(q); }
inline BigInt rat_den(const Rat& q) { return denominator(q); }

/// Canonical textual form "num/den" (gcd 1, den > 0), e.g. "0/1", "3/4".
inline std::string rat_str(const Rat& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

/// Parses "num/den" or a bare integer. Throws std::invalid_argument on
/// malformed input or zero denominator. The result is canonicalized.
inline Rat parse_rat(std::string_view s) {
    auto bad = [&] { throw std::invalid_argument("bad rational: '" + std::string(s) + "'"); };
    if (s.empty()) bad();
    std::size_t slash = s.find('/');
    auto parse_int = [&](std::string_view t) -> BigInt {
        if (t.empty()) bad();
        std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) bad();
        for (std::size_t k = i; k < t.size(); ++k)
            if (t[k] < '0' || t[k] > '9') bad();
        return BigInt(std::string(t));
    };
    if (slash == std::string_view::npos) return Rat(parse_int(s));
    BigInt num = parse_int(s.substr(0, slash));
    BigInt den = parse_int(s.substr(slash + 1));
    if (den == 0) bad();
    return Rat(num, den);
}

/// Largest integer <= q.
inline BigInt rat_floor(const Rat& q) {
    BigInt n = numerator(q), d = denominator(q);
    BigInt t = n / d;
    if (n < 0 && t * d != n) --t;
    return t;
}

inline bool is_unit_fraction(const Rat& q) { return numerator(q) == 1; }

inline double rat_approx(const Rat& q) { return q.convert_to<double>(); }

}  // namespace chaincert
