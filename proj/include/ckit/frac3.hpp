#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace ckit {

using Nat = boost::multiprecision::cpp_int;

inline Nat pow3_nat(unsigned k) {
    Nat p = 1;
    while (k--) p *= 3;
    return p;
}

/*
 * Fraction m / 3^k.
 *
 * Canonical form: m == 0 forces k == 0; for k >= 1 the numerator is not
 * divisible by 3.  Numerators are arbitrary-precision: section tails grow
 * without bound even when every value stays inside [0, 2].
 */
struct Frac3 {
    Nat m;
    unsigned k = 0;

    bool is_zero() const { return m == 0; }
};

inline Frac3 frac3(Nat m, unsigned k) {
    if (m < 0) throw std::invalid_argument("frac3: negative numerator");
    if (m == 0) return {0, 0};
    while (k > 0 && m % 3 == 0) {
        m /= 3;
        --k;
    }
    return {std::move(m), k};
}

inline Frac3 frac3(uint64_t m, unsigned k) { return frac3(Nat(m), k); }

/* Value comparison: sign of a - b, via the common denominator 3^max(a.k, b.k). */
inline int cmp_value(const Frac3& a, const Frac3& b) {
    Nat la = a.m;
    Nat lb = b.m;
    if (a.k < b.k)
        la *= pow3_nat(b.k - a.k);
    else if (b.k < a.k)
        lb *= pow3_nat(a.k - b.k);
    if (la < lb) return -1;
    if (lb < la) return 1;
    return 0;
}

inline bool operator==(const Frac3& a, const Frac3& b) { return a.k == b.k && a.m == b.m; }
inline bool operator!=(const Frac3& a, const Frac3& b) { return !(a == b); }
inline bool operator<(const Frac3& a, const Frac3& b) { return cmp_value(a, b) < 0; }
inline bool operator>(const Frac3& a, const Frac3& b) { return cmp_value(a, b) > 0; }
inline bool operator<=(const Frac3& a, const Frac3& b) { return cmp_value(a, b) <= 0; }
inline bool operator>=(const Frac3& a, const Frac3& b) { return cmp_value(a, b) >= 0; }

/* Multiply by 3^j (j may be negative). */
inline Frac3 scale3(const Frac3& x, int j) {
    if (x.is_zero()) return x;
    if (j >= 0) {
        unsigned up = static_cast<unsigned>(j);
        if (up <= x.k) return {x.m, x.k - up};
        return {x.m * pow3_nat(up - x.k), 0};
    }
    return {x.m, x.k + static_cast<unsigned>(-j)};
}

inline double to_double(const Frac3& x) {
    if (x.is_zero()) return 0.0;
    // (m << 64) / 3^k keeps ~19 significant digits before the final divide.
    Nat scaled = (x.m << 64) / pow3_nat(x.k);
    return scaled.convert_to<double>() / 18446744073709551616.0;
}

/* "m" when k == 0, otherwise "m/3^k" with the denominator written out. */
inline std::string to_string(const Frac3& x) {
    if (x.k == 0) return x.m.str();
    return x.m.str() + "/" + pow3_nat(x.k).str();
}

/*
 * Accepted shapes: "0", "m", "m/3^k", and "m/D" where D is a literal power
 * of three.  Anything else is a parse error.  Non-canonical input (numerator
 * divisible by 3 under a k >= 1 denominator) is reduced.
 */
inline Frac3 parse_frac3(std::string_view s) {
    auto fail = [&] { throw std::invalid_argument("parse_frac3: bad fraction '" + std::string(s) + "'"); };
    if (s.empty()) fail();
    auto digits = [&](std::string_view t) -> Nat {
        if (t.empty()) fail();
        Nat n = 0;
        for (char ch : t) {
            if (ch < '0' || ch > '9') fail();
            n = n * 10 + (ch - '0');
        }
        return n;
    };
    size_t slash = s.find('/');
    if (slash == std::string_view::npos) return frac3(digits(s), 0);
    Nat num = digits(s.substr(0, slash));
    std::string_view den = s.substr(slash + 1);
    if (den.rfind("3^", 0) == 0) {
        Nat k = digits(den.substr(2));
        if (k > 1000000) fail();
        return frac3(num, k.convert_to<unsigned>());
    }
    Nat d = digits(den);
    if (d < 3) fail();
    unsigned k = 0;
    while (d % 3 == 0) {
        d /= 3;
        ++k;
    }
    if (d != 1) fail();
    return frac3(num, k);
}

}  // namespace ckit
