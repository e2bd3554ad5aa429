#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ckit {

/*
 * Ordinals below w^w as polynomials in w with natural coefficients, plus a
 * distinguished top element w^w.  c[i] is the coefficient of w^i; trailing
 * zero coefficients are stripped, so degree() == c.size() - 1.
 *
 * Everything this library indexes lives far below w^8; producing a degree
 * above kMaxOrdinalDegree is treated as a hard error rather than a value.
 */
constexpr unsigned kMaxOrdinalDegree = 8;

struct Ordinal {
    std::vector<uint64_t> c;  // empty means 0 (or w^w when top is set)
    bool top = false;
};

inline void trim(Ordinal& a) {
    while (!a.c.empty() && a.c.back() == 0) a.c.pop_back();
}

inline Ordinal ord_fin(uint64_t n) {
    Ordinal a;
    if (n) a.c.push_back(n);
    return a;
}

inline Ordinal ord_omega_pow(unsigned i, uint64_t coeff = 1) {
    if (i > kMaxOrdinalDegree) throw std::overflow_error("ordinal degree above cap");
    Ordinal a;
    if (coeff) {
        a.c.assign(i + 1, 0);
        a.c[i] = coeff;
    }
    return a;
}

inline Ordinal ord_top() {
    Ordinal a;
    a.top = true;
    return a;
}

inline bool is_zero(const Ordinal& a) { return !a.top && a.c.empty(); }

/* Sign of a - b in the ordinal order. */
inline int ord_cmp(const Ordinal& a, const Ordinal& b) {
    if (a.top || b.top) return int(a.top) - int(b.top);
    if (a.c.size() != b.c.size()) return a.c.size() < b.c.size() ? -1 : 1;
    for (size_t i = a.c.size(); i-- > 0;)
        if (a.c[i] != b.c[i]) return a.c[i] < b.c[i] ? -1 : 1;
    return 0;
}

inline bool operator==(const Ordinal& a, const Ordinal& b) { return ord_cmp(a, b) == 0; }
inline bool operator!=(const Ordinal& a, const Ordinal& b) { return ord_cmp(a, b) != 0; }
inline bool operator<(const Ordinal& a, const Ordinal& b) { return ord_cmp(a, b) < 0; }

/* Limit ordinal: nonzero with no finite part.  w^w counts as a limit. */
inline bool is_limit(const Ordinal& a) {
    if (a.top) return true;
    return !a.c.empty() && a.c[0] == 0;
}

inline Ordinal succ(Ordinal a) {
    if (a.top) throw std::domain_error("succ(w^w)");
    if (a.c.empty()) a.c.push_back(0);
    a.c[0] += 1;
    return a;
}

inline Ordinal plus_fin(Ordinal a, uint64_t n) {
    if (a.top) throw std::domain_error("w^w + n");
    if (n == 0) return a;
    if (a.c.empty()) a.c.push_back(0);
    a.c[0] += n;
    return a;
}

/* 1 + a: absorbed whenever a is infinite. */
inline Ordinal one_plus(Ordinal a) {
    if (a.top || a.c.size() > 1) return a;
    return plus_fin(std::move(a), 1);
}

/* w^u * a (left factor).  Left-distributes over the polynomial terms. */
inline Ordinal omega_shift(const Ordinal& a, unsigned u) {
    if (a.top) throw std::domain_error("w^u * w^w");
    if (u == 0 || a.c.empty()) return a;
    if (a.c.size() - 1 + u > kMaxOrdinalDegree) throw std::overflow_error("ordinal degree above cap");
    Ordinal r;
    r.c.assign(a.c.size() + u, 0);
    for (size_t i = 0; i < a.c.size(); ++i) r.c[i + u] = a.c[i];
    trim(r);
    return r;
}

/*
 * Index maps between the nested sets and the base enumeration:
 *   derived_index(n, a): element a of the n-th derived set sits at w^n*(1+a).
 *   tu_index(u, a):      element a of layer u; layer 0 skips one slot past
 *                        the first limit, deeper layers scale by w^u.
 *   limit_index(a):      the limit of the a-th block sits at w*(a+1).
 */
inline Ordinal derived_index(unsigned n, const Ordinal& a) { return omega_shift(one_plus(a), n); }

inline Ordinal tu_index(unsigned u, const Ordinal& a) {
    if (u == 0) {
        if (a.top) throw std::domain_error("tu_index at w^w");
        return a.c.size() <= 1 ? a : succ(a);
    }
    return omega_shift(succ(a), u);
}

inline Ordinal limit_index(const Ordinal& a) { return omega_shift(succ(a), 1); }

inline std::string to_string(const Ordinal& a) {
    if (a.top) return "w^w";
    if (a.c.empty()) return "0";
    std::string s;
    for (size_t i = a.c.size(); i-- > 0;) {
        if (a.c[i] == 0) continue;
        if (!s.empty()) s += '+';
        if (i == 0) {
            s += std::to_string(a.c[0]);
            continue;
        }
        s += i == 1 ? "w" : "w^" + std::to_string(i);
        if (a.c[i] != 1) s += "*" + std::to_string(a.c[i]);
    }
    return s;
}

/* Accepts the emitter's shapes: "0", "w^w", '+'-joined terms "w^i[*c]", "w[*c]", "c". */
inline Ordinal parse_ordinal(std::string_view s) {
    auto fail = [&] { throw std::invalid_argument("parse_ordinal: bad ordinal '" + std::string(s) + "'"); };
    if (s.empty()) fail();
    if (s == "w^w") return ord_top();
    auto number = [&](std::string_view t) -> uint64_t {
        if (t.empty() || t.size() > 19) fail();
        uint64_t n = 0;
        for (char ch : t) {
            if (ch < '0' || ch > '9') fail();
            n = n * 10 + unsigned(ch - '0');
        }
        return n;
    };
    Ordinal a;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t next = s.find('+', pos);
        std::string_view term = s.substr(pos, next == std::string_view::npos ? next : next - pos);
        if (term.empty()) fail();
        unsigned deg = 0;
        uint64_t coeff = 0;
        if (term[0] == 'w') {
            deg = 1;
            term.remove_prefix(1);
            if (!term.empty() && term[0] == '^') {
                term.remove_prefix(1);
                size_t star = term.find('*');
                uint64_t d = number(term.substr(0, star));
                if (d > kMaxOrdinalDegree) fail();
                deg = unsigned(d);
                term = star == std::string_view::npos ? std::string_view{} : term.substr(star);
            }
            coeff = 1;
            if (!term.empty()) {
                if (term[0] != '*') fail();
                coeff = number(term.substr(1));
            }
        } else {
            coeff = number(term);
        }
        if (deg >= a.c.size()) a.c.resize(deg + 1, 0);
        a.c[deg] += coeff;
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    trim(a);
    return a;
}

}  // namespace ckit
