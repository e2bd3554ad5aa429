#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "complexity.hpp"

namespace ckit {

/*
 * All stability notions are horizon-based: a finite table cannot decide
 * stability, so every result carries a settled flag.  settled means the
 * sequence f(k) = v[n*3^k] - 3k held constant over the last settle_window
 * steps before the horizon; f is non-increasing (v[3m] <= v[m]+3), so a
 * settled value is the true minimum unless f drops again past the horizon.
 * Unsettled values are upper bounds.
 */
struct StableValue {
    unsigned value = 0;
    unsigned horizon = 0;      // largest k with n*3^k inside the table
    unsigned first_min_k = 0;  // smallest k attaining value
    bool settled = false;
};

struct Defect {
    unsigned cpx = 0;   // exact part, for cross-exponentiation comparisons
    uint64_t n = 0;
    double value = 0.0; // cpx - 3*log3(n), display convenience
};

inline Defect defect(const ComplexityTable& t, uint64_t n) {
    Defect d;
    d.cpx = t.value(n);
    d.n = n;
    d.value = double(d.cpx) - 3.0 * std::log(double(n)) / std::log(3.0);
    return d;
}

inline unsigned default_settle_window() { return 3; }

inline StableValue stable_complexity(const ComplexityTable& t, uint64_t n, unsigned settle_window = 3) {
    if (n == 0 || n > t.max_n) throw std::out_of_range("stable_complexity: n outside table");
    StableValue r;
    uint64_t m = n;
    unsigned k = 0;
    unsigned best = t.values[n];
    r.first_min_k = 0;
    while (m <= t.max_n / 3) {
        m *= 3;
        ++k;
        unsigned f = t.values[m] - 3 * k;
        if (f < best) {
            best = f;
            r.first_min_k = k;
        }
    }
    r.value = best;
    r.horizon = k;
    r.settled = k >= r.first_min_k + settle_window;
    return r;
}

inline bool is_stable_at_horizon(const ComplexityTable& t, uint64_t n, unsigned h) {
    if (n == 0) throw std::out_of_range("is_stable_at_horizon: n >= 1");
    uint64_t m = n;
    for (unsigned k = 1; k <= h; ++k) {
        if (m > t.max_n / 3) throw std::out_of_range("is_stable_at_horizon: n*3^h outside table");
        m *= 3;
        if (t.values[m] != t.values[n] + 3 * k) return false;
    }
    return true;
}

/*
 * For 3∤m with stable complexity c, write c = 3*kappa + 2 - u with
 * u in {0,1,2}; then m/3^k lies in layer u + 3(k - kappa) for every
 * k >= kappa.  kappa(1) = 0 with u = 2 (stable complexity 0).
 */
struct KappaValue {
    unsigned kappa = 0;
    unsigned u = 0;  // layer of m/3^kappa, in {0,1,2}
    bool settled = false;
};

inline KappaValue kappa(const ComplexityTable& t, uint64_t m, unsigned settle_window = 3) {
    if (m % 3 == 0) throw std::invalid_argument("kappa: numerator must not be divisible by 3");
    StableValue s = stable_complexity(t, m, settle_window);
    KappaValue r;
    r.u = (2 + 3 - s.value % 3) % 3;
    r.kappa = (s.value + r.u - 2) / 3;
    r.settled = s.settled;
    return r;
}

struct GaugeReport {
    uint64_t checked = 0;
    uint64_t skipped_unsettled = 0;
    std::vector<uint64_t> violations;  // n where stable(3n) != stable(n) + 3
    bool ok() const { return violations.empty(); }
};

/* The shift identity: multiplying by 3 raises stable complexity by exactly 3. */
inline GaugeReport stability_gauge_check(const ComplexityTable& t, uint64_t up_to, unsigned settle_window = 3) {
    GaugeReport rep;
    for (uint64_t n = 1; n <= up_to && 3 * n <= t.max_n; ++n) {
        StableValue a = stable_complexity(t, n, settle_window);
        StableValue b = stable_complexity(t, 3 * n, settle_window);
        if (!a.settled || !b.settled) {
            ++rep.skipped_unsettled;
            continue;
        }
        ++rep.checked;
        if (b.value != a.value + 3) rep.violations.push_back(n);
    }
    return rep;
}

}  // namespace ckit
