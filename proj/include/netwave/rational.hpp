#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "netwave/errors.hpp"

namespace netwave {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

inline Rational parse_rational(const std::string& s) {
    try {
        return Rational(s);
    } catch (const std::exception&) {
        throw InvalidInput("cannot parse rational '" + s + "' (expected \"p\" or \"p/q\")");
    }
}

inline std::string to_string(const Rational& r) { return r.str(); }

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

// Largest integer k with k <= r.
inline BigInt rational_floor(const Rational& r) {
    BigInt n = numerator(r), d = denominator(r);
    BigInt q = n / d;
    if (n % d != 0 && n < 0) --q;
    return q;
}

// gcd extended to positive rationals: the largest g with r1, r2 integer multiples of g.
inline Rational rational_gcd(const Rational& a, const Rational& b) {
    BigInt n = gcd(numerator(a), numerator(b));
    BigInt d = lcm(denominator(a), denominator(b));
    return Rational(n, d);
}

inline bool divides(const Rational& step, const Rational& len) {
    if (step == 0) return false;
    Rational q = len / step;
    return denominator(q) == 1;
}

// Exact conversion to int64 indices (0 <= q fits); throws otherwise.
inline std::int64_t exact_index(const Rational& value, const Rational& step) {
    Rational q = value / step;
    if (denominator(q) != 1) throw InvalidInput("value " + value.str() + " is not a multiple of the grid step " + step.str());
    return numerator(q).template convert_to<std::int64_t>();
}

struct RationalHash {
    std::size_t operator()(const Rational& r) const {
        std::hash<std::string> h;
        return h(r.str());
    }
};

}  // namespace netwave
