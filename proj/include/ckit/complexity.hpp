#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "frac3.hpp"

namespace ckit {

/*
 * Minimal number of 1s needed to build n from +, * and parentheses.
 *
 * values[n] is exact under Exhaustive.  Bounded(B) caps the smaller summand
 * at B and therefore only upper-bounds; Modified restricts sums to +1 (the
 * calculus with rules |ab| <= |a|+|b| and |a+1| <= |a|+1).
 */
enum class Policy : uint8_t { Exhaustive = 0, Bounded = 1, Modified = 2 };

struct ComplexityTable {
    uint64_t max_n = 0;
    Policy policy = Policy::Exhaustive;
    uint64_t bound = 0;  // smaller-summand cap, Bounded only
    std::vector<uint8_t> values;  // values[n] for 1 <= n <= max_n; [0] unused

    uint8_t value(uint64_t n) const {
        if (n == 0 || n > max_n)
            throw std::out_of_range("complexity value query outside table (n=" + std::to_string(n) +
                                    ", max_n=" + std::to_string(max_n) + ")");
        return values[n];
    }
};

namespace detail {

/*
 * Sum-scan cutoffs rest on the envelope bound |x| >= 3*log3(x), proved by
 * induction over optimal expressions (products multiply the bound through;
 * a sum a+b with a,b >= 2 has ab >= a+b; +1 cases are checked directly at
 * the base).  Hence |a| + |n-a| >= ceil(3*log3(a*(n-a))), and a*(n-a) is
 * increasing in a on a <= n/2, so once the product passes the threshold no
 * later split can matter.  Results are identical to the full scan; the unit
 * tests compare against one.
 *
 * cbrt_pow3[c] = largest x with x^3 <= 3^c (saturated above c = 80).
 */
inline const uint64_t* cbrt_pow3_table() {
    static const std::vector<uint64_t> tab = [] {
        std::vector<uint64_t> t(256);
        for (unsigned c = 0; c < 256; ++c) {
            if (c > 80) {
                t[c] = std::numeric_limits<uint64_t>::max();
                continue;
            }
            unsigned __int128 p = 1;
            for (unsigned i = 0; i < c; ++i) p *= 3;
            uint64_t lo = 0, hi = 3037000499ULL * 2;  // cbrt(3^80) < 2^42, generous
            while (lo < hi) {
                uint64_t mid = lo + (hi - lo + 1) / 2;
                unsigned __int128 cube = (unsigned __int128)mid * mid * mid;
                if (cube <= p)
                    lo = mid;
                else
                    hi = mid - 1;
            }
            t[c] = lo;
        }
        return t;
    }();
    return tab.data();
}

inline uint64_t sum_cap(const ComplexityTable& t, uint64_t n) {
    uint64_t half = n / 2;
    switch (t.policy) {
        case Policy::Exhaustive: return half;
        case Policy::Bounded: return half < t.bound ? half : t.bound;
        case Policy::Modified: return 1;
    }
    return half;
}

}  // namespace detail

/*
 * Bottom-up build.  Product candidates are pushed forward: when v[e] is
 * final every product e*d with d <= e receives v[e]+v[d], so by the time n
 * is processed prodmin[n] already holds the best divisor split.  This keeps
 * the whole build at ~N*log(N) product work instead of per-n trial division.
 *
 * Deterministic: a fixed scan order and no data races (single pass), so
 * rebuilding always yields byte-identical values.
 */
inline ComplexityTable build_table(uint64_t n_max, Policy policy = Policy::Exhaustive, uint64_t bound = 0) {
    if (n_max < 1) throw std::invalid_argument("build_table: n_max must be >= 1");
    if (policy == Policy::Bounded && bound < 1) throw std::invalid_argument("build_table: Bounded needs bound >= 1");
    ComplexityTable t;
    t.max_n = n_max;
    t.policy = policy;
    t.bound = policy == Policy::Bounded ? bound : 0;
    t.values.assign(n_max + 1, 0);
    t.values[1] = 1;
    if (n_max == 1) return t;

    const uint64_t* thr = detail::cbrt_pow3_table();
    std::vector<uint8_t> prodmin(n_max + 1, 0xFF);
    auto& v = t.values;
    for (uint64_t n = 2; n <= n_max; ++n) {
        unsigned best = v[n - 1] + 1u;  // a = 1
        if (prodmin[n] < best) best = prodmin[n];
        uint64_t cap = detail::sum_cap(t, n);
        for (uint64_t a = 2; a <= cap; ++a) {
            if (a * (n - a) > thr[best - 1]) break;  // no remaining split can go below best
            unsigned cand = v[a] + unsigned(v[n - a]);
            if (cand < best) best = cand;
        }
        v[n] = uint8_t(best);
        uint64_t dmax = n_max / n < n ? n_max / n : n;
        for (uint64_t d = 2; d <= dmax; ++d) {
            uint8_t cand = uint8_t(best + v[d]);
            if (cand < prodmin[n * d]) prodmin[n * d] = cand;
        }
    }
    return t;
}

/* First optimal split in scan order: divisor pairs by smallest divisor, then sums by smallest summand. */
struct Split {
    enum Kind : uint8_t { One, Sum, Product } kind = One;
    uint64_t left = 0, right = 0;
};

inline Split witness_split(const ComplexityTable& t, uint64_t n) {
    unsigned c = t.value(n);
    if (n == 1) return {Split::One, 0, 0};
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0 && t.values[d] + unsigned(t.values[n / d]) == c) return {Split::Product, d, n / d};
    const uint64_t* thr = detail::cbrt_pow3_table();
    uint64_t cap = detail::sum_cap(t, n);
    for (uint64_t a = 1; a <= cap; ++a) {
        if (a >= 2 && a * (n - a) > thr[c]) break;  // ties preserved: threshold uses c itself
        if (t.values[a] + unsigned(t.values[n - a]) == c) return {Split::Sum, a, n - a};
    }
    throw std::logic_error("witness_split: no split attains the stored value (corrupt table?)");
}

struct Expression {
    enum Kind : uint8_t { One, Sum, Product } kind = One;
    std::unique_ptr<Expression> lhs, rhs;
};

inline Expression expr_one() { return {}; }

inline Expression expr_node(Expression::Kind kind, Expression a, Expression b) {
    Expression e;
    e.kind = kind;
    e.lhs = std::make_unique<Expression>(std::move(a));
    e.rhs = std::make_unique<Expression>(std::move(b));
    return e;
}

inline Expression expr_sum(Expression a, Expression b) { return expr_node(Expression::Sum, std::move(a), std::move(b)); }
inline Expression expr_product(Expression a, Expression b) { return expr_node(Expression::Product, std::move(a), std::move(b)); }

inline Expression witness_expression(const ComplexityTable& t, uint64_t n) {
    Split s = witness_split(t, n);
    if (s.kind == Split::One) return expr_one();
    return expr_node(s.kind == Split::Sum ? Expression::Sum : Expression::Product,
                     witness_expression(t, s.left), witness_expression(t, s.right));
}

struct EvalResult {
    Nat value;
    uint64_t ones = 0;
};

inline EvalResult eval_expression(const Expression& e) {
    if (e.kind == Expression::One) return {1, 1};
    EvalResult a = eval_expression(*e.lhs);
    EvalResult b = eval_expression(*e.rhs);
    if (e.kind == Expression::Sum) return {a.value + b.value, a.ones + b.ones};
    return {a.value * b.value, a.ones + b.ones};
}

inline std::string to_string(const Expression& e) {
    if (e.kind == Expression::One) return "1";
    std::string l = to_string(*e.lhs);
    std::string r = to_string(*e.rhs);
    if (e.kind == Expression::Sum) return l + "+" + r;
    if (e.lhs->kind == Expression::Sum) l = "(" + l + ")";
    if (e.rhs->kind == Expression::Sum) r = "(" + r + ")";
    return l + "*" + r;
}

/*
 * Largest value of complexity <= c anywhere is 3^(c/3), 4*3^((c-4)/3) or
 * 2*3^((c-2)/3) by c mod 3 (same induction as the envelope bound).  When
 * that envelope fits inside the table the scan below is complete, i.e. no
 * n beyond max_n attains complexity c.
 */
inline Nat complexity_envelope(unsigned c) {
    if (c == 0) throw std::invalid_argument("complexity_envelope: c >= 1");
    switch (c % 3) {
        case 0: return pow3_nat(c / 3);
        case 1: return c == 1 ? Nat(1) : Nat(4) * pow3_nat((c - 4) / 3);
        default: return Nat(2) * pow3_nat((c - 2) / 3);
    }
}

struct LargestResult {
    uint64_t n = 0;       // 0 when no n <= max_n attains c
    bool certified = false;
};

inline LargestResult largest_with_complexity(const ComplexityTable& t, unsigned c) {
    LargestResult r;
    for (uint64_t n = t.max_n; n >= 1; --n)
        if (t.values[n] == c) {
            r.n = n;
            break;
        }
    r.certified = c >= 1 && complexity_envelope(c) <= t.max_n;
    return r;
}

/* n is solid when every sum split strictly exceeds its complexity (1 vacuously). */
inline std::vector<uint64_t> solid_numbers(const ComplexityTable& t, uint64_t up_to) {
    if (up_to > t.max_n) throw std::out_of_range("solid_numbers: up_to beyond table");
    std::vector<uint64_t> out;
    for (uint64_t n = 1; n <= up_to; ++n) {
        bool solid = true;
        for (uint64_t a = 1; a <= n / 2; ++a)
            if (t.values[a] + unsigned(t.values[n - a]) <= t.values[n]) {
                solid = false;
                break;
            }
        if (solid) out.push_back(n);
    }
    return out;
}

}  // namespace ckit
