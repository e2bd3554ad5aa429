#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "complexity.hpp"
#include "frac3.hpp"
#include "ordinal.hpp"
#include "stability.hpp"

namespace ckit {

/* Asked for a position or section beyond what the table horizon can certify. */
struct FrontierError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/* Internal element: value m/3^k with 3-free m that fits a machine word. */
struct MK {
    uint64_t m = 0;
    unsigned k = 0;
};

inline unsigned __int128 pow3_u128(unsigned e) {
    unsigned __int128 p = 1;
    while (e--) p *= 3;
    return p;
}

/* Exact value comparison of m1/3^k1 vs m2/3^k2. */
inline int cmp_mk(uint64_t m1, unsigned k1, uint64_t m2, unsigned k2) {
    if (k1 > k2) return -cmp_mk(m2, k2, m1, k1);
    unsigned d = k2 - k1;
    if (d >= 81) return 1;  // 3^81 alone exceeds any 64-bit m2
    unsigned __int128 p = pow3_u128(d);
    unsigned __int128 lim = ~(unsigned __int128)0;
    if (m1 != 0 && p > lim / m1) return 1;
    unsigned __int128 l = (unsigned __int128)m1 * p;
    unsigned __int128 r = m2;
    return l < r ? -1 : l > r ? 1 : 0;
}

inline int cmp_mk(const MK& a, const MK& b) { return cmp_mk(a.m, a.k, b.m, b.k); }

inline Frac3 to_frac(const MK& x) { return frac3(x.m, x.k); }

}  // namespace detail

/*
 * One member of a layer list: value = frac, layer u in {0,1,2}, settled is
 * the stability-horizon verdict of the numerator.  Unsettled entries carry
 * an upper-bound classification and may move deeper once the true stable
 * value is known.
 */
struct TuElement {
    Frac3 frac;
    unsigned u = 0;
    bool settled = true;
};

namespace detail {

struct StTriple {
    unsigned u0 = 0;     // layer of m/3^kappa
    unsigned kappa = 0;  // least exponent putting m into a base layer
    bool settled = false;
};

/* Classify 3-free m from its horizon stable complexity c: c = 3*kappa + 2 - u0. */
inline StTriple stability_triple(const ComplexityTable& t, uint64_t m, unsigned settle_window) {
    StableValue s = stable_complexity(t, m, settle_window);
    StTriple r;
    r.u0 = (2 + 3 - s.value % 3) % 3;
    r.kappa = (s.value + r.u0 - 2) / 3;
    r.settled = s.settled;
    return r;
}

}  // namespace detail

struct EnumerateResult {
    std::vector<TuElement> elements;     // sorted by reverse order (descending value)
    uint64_t max_numerator = 0;          // numerators above this were not scanned
    uint64_t unsettled_count = 0;
};

/*
 * All m/3^kappa(m) of layer u with value above cutoff (strict), scanning
 * numerators up to max_n/3^S so each one has a full settle window above it.
 * Unsettled candidates are included with settled=false; their layer comes
 * from the best-known upper bound.
 */
inline EnumerateResult enumerate_Tu(const ComplexityTable& t, unsigned u, const Frac3& cutoff,
                                    unsigned settle_window = 3) {
    if (u > 2) throw std::invalid_argument("enumerate_Tu: u in {0,1,2}");
    if (cutoff.is_zero()) throw std::invalid_argument("enumerate_Tu: cutoff must be positive");
    EnumerateResult r;
    uint64_t max_m = t.max_n;
    for (unsigned i = 0; i < settle_window; ++i) max_m /= 3;
    r.max_numerator = max_m;
    for (uint64_t m = 1; m <= max_m; ++m) {
        if (m % 3 == 0) continue;
        detail::StTriple st = detail::stability_triple(t, m, settle_window);
        if (!st.settled) ++r.unsettled_count;
        if (st.u0 != u) continue;
        Frac3 f = frac3(m, st.kappa);
        if (cmp_value(f, cutoff) > 0) r.elements.push_back({f, u, st.settled});
    }
    std::sort(r.elements.begin(), r.elements.end(),
              [](const TuElement& a, const TuElement& b) { return cmp_value(a.frac, b.frac) > 0; });
    return r;
}

/*
 * Shared frame for everything below: per-numerator stability data plus the
 * three base-layer lists in descending value order.  The lists contain only
 * settled numerators; a value m/3^k then sits in layer u0(m) + 3(k - kappa(m))
 * for every k >= kappa(m), and scaling a list by 3^-t gives layer u+3t.
 */
class LayerIndex {
public:
    LayerIndex(const ComplexityTable& t, unsigned settle_window = 3) : t_(&t), s_(settle_window) {
        max_m_ = t.max_n;
        for (unsigned i = 0; i < s_; ++i) max_m_ /= 3;
        if (max_m_ < 2) throw std::invalid_argument("LayerIndex: table too small for the settle window");
        u0_.assign(max_m_ + 1, 0xFF);
        kappa_.assign(max_m_ + 1, 0);
        settled_.assign(max_m_ + 1, 0);
        for (uint64_t m = 1; m <= max_m_; ++m) {
            if (m % 3 == 0) continue;
            detail::StTriple st = detail::stability_triple(t, m, s_);
            u0_[m] = uint8_t(st.u0);
            kappa_[m] = uint8_t(st.kappa);
            settled_[m] = st.settled ? 1 : 0;
            if (!st.settled) {
                ++dropped_;
                continue;
            }
            canon_[st.u0].push_back({m, st.kappa});
        }
        for (auto& list : canon_)
            std::sort(list.begin(), list.end(),
                      [](const detail::MK& a, const detail::MK& b) { return detail::cmp_mk(a, b) > 0; });
    }

    const ComplexityTable& table() const { return *t_; }
    unsigned settle_window() const { return s_; }
    uint64_t max_numerator() const { return max_m_; }
    uint64_t dropped_unsettled() const { return dropped_; }
    const std::vector<detail::MK>& canonical(unsigned u) const { return canon_[u]; }

    bool known(uint64_t m) const { return m >= 1 && m <= max_m_ && m % 3 != 0; }
    bool settled(uint64_t m) const { return known(m) && settled_[m] != 0; }
    unsigned u0(uint64_t m) const { return u0_[m]; }
    unsigned kappa0(uint64_t m) const { return kappa_[m]; }
    unsigned layer_of(uint64_t m, unsigned k) const { return u0_[m] + 3 * (k - kappa_[m]); }

    /*
     * Position of m/3^kappa(m) inside its own layer list, as an ordinal.
     * Computed from first principles rather than from any walk:
     *   pos(y) = w*beta + r, where beta is the position (one layer deeper,
     *   wrapping layer 3 onto list 0 scaled by 1/3) of the greatest
     *   deeper-list value below y, and r counts own-layer values between y
     *   and the nearest strictly deeper element above it.
     * The greatest element of a list gets 0.  `uncertain` is set when the
     * step leaned on numerators near the scan bound, where missing elements
     * could shift the answer.
     */
    Ordinal tu_position(uint64_t m, bool* uncertain = nullptr) const {
        bool unc = false;
        Ordinal r = pos_rec(m, unc);
        if (uncertain) *uncertain = unc;
        return r;
    }

    /* Independent expectation for the global label of m/3^k via the index maps. */
    Ordinal expected_label(uint64_t m, unsigned k, bool* uncertain = nullptr) const {
        unsigned layer = layer_of(m, k);
        Ordinal alpha = tu_position(m, uncertain);
        if (layer == 0) return tu_index(0, alpha);
        return omega_shift(succ(alpha), layer);
    }

private:
    const ComplexityTable* t_;
    unsigned s_;
    uint64_t max_m_ = 0;
    uint64_t dropped_ = 0;
    std::vector<uint8_t> u0_, kappa_, settled_;
    std::vector<detail::MK> canon_[3];
    mutable std::unordered_map<uint64_t, Ordinal> pos_memo_;

    bool near_frontier(uint64_t m) const { return m > max_m_ / 3; }

    /* First index whose value is strictly below x; list is descending. */
    static size_t first_below(const std::vector<detail::MK>& list, const detail::MK& x, unsigned shift) {
        size_t lo = 0, hi = list.size();
        while (lo < hi) {
            size_t mid = lo + (hi - lo) / 2;
            if (detail::cmp_mk(list[mid].m, list[mid].k + shift, x.m, x.k) < 0)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    Ordinal pos_rec(uint64_t m, bool& uncertain) const {
        auto hit = pos_memo_.find(m);
        if (hit != pos_memo_.end()) return hit->second;
        unsigned u = u0_[m];
        detail::MK y{m, kappa_[m]};
        const auto& own = canon_[u];
        Ordinal result;
        if (!own.empty() && own.front().m == m) {
            result = ord_fin(0);
        } else {
            // block limit: greatest value below y, one layer deeper (layer 3 = list 0 / 3)
            unsigned zu = u < 2 ? u + 1 : 0;
            unsigned zshift = u < 2 ? 0 : 1;
            const auto& zlist = canon_[zu];
            size_t zi = first_below(zlist, y, zshift);
            if (zi >= zlist.size())
                throw FrontierError("layer position: no deeper element below " + to_string(detail::to_frac(y)) +
                                    " within the scanned numerators");
            detail::MK z = zlist[zi];
            if (near_frontier(z.m)) uncertain = true;
            Ordinal beta = pos_rec(z.m, uncertain);

            // nearest strictly deeper element above y bounds y's block from above
            detail::MK w{0, 0};
            bool have_w = false;
            for (unsigned cu = 0; cu < 3; ++cu) {
                for (unsigned tshift = cu >= u + 1 ? 0 : (u + 1 - cu + 2) / 3;; ++tshift) {
                    const auto& list = canon_[cu];
                    if (list.empty()) break;
                    if (detail::cmp_mk(list.front().m, list.front().k + tshift, y.m, y.k) <= 0) break;
                    size_t i = first_below(list, y, tshift);
                    if (i > 0) {
                        detail::MK cand{list[i - 1].m, list[i - 1].k + tshift};
                        if (!have_w || detail::cmp_mk(cand, w) < 0) {
                            w = cand;
                            have_w = true;
                        }
                    }
                }
            }
            // elements of own layer strictly between y and w: indices [top, index_of(y))
            size_t top = have_w ? first_below(own, w, 0) : 0;
            size_t yown = first_below(own, y, 0);
            while (yown > 0 && own[yown - 1].m == m) --yown;  // exclude y itself
            uint64_t r = yown - top;
            if (have_w && near_frontier(w.m)) uncertain = true;
            if (near_frontier(m)) uncertain = true;
            result = plus_fin(omega_shift(beta, 1), r);
        }
        pos_memo_.emplace(m, result);
        return result;
    }
};

/* One labeled element of a computed initial segment. */
struct PrefixElement {
    uint64_t m = 0;
    unsigned k = 0;
    unsigned layer = 0;
    bool settled = true;
    Ordinal label;
    Frac3 frac() const { return frac3(m, k); }
};

/*
 * An initial segment of the compact, complete for canonical numerators up
 * to completeness_horizon/3^settle_window, values >= cutoff, in reverse
 * order (descending value).  Labels are consecutive ordinal positions in
 * the computed universe; deep inside a block the finite offsets can
 * undercount true positions when members beyond the numerator bound are
 * missing, but limit labels are unaffected by such tail truncation.
 */
struct KPrefix {
    Frac3 cutoff;
    unsigned layer = 0;   // 0 for the full set, d after d derivations
    uint64_t completeness_horizon = 0;
    unsigned settle_window = 3;
    uint64_t dropped_unsettled = 0;
    uint64_t verified_labels = 0;
    uint64_t skipped_uncertain = 0;
    std::vector<PrefixElement> elements;
};

/*
 * Build the labeled prefix.  Labels come from a single walk down the sorted
 * elements: entering an element of layer d discards all label terms below
 * w^d and adds one w^d.  verify_mode 1 cross-checks every limit element
 * (layer >= 1) and a sample of layer-0 elements against the independent
 * position recursion; 2 checks everything; 0 skips.  A verified mismatch
 * throws: the two routes must agree wherever both are certain.
 */
inline KPrefix build_K_prefix(const LayerIndex& idx, const Frac3& cutoff, int verify_mode = 1) {
    if (cutoff.is_zero()) throw std::invalid_argument("build_K_prefix: cutoff must be positive");
    if (cutoff.m > std::numeric_limits<uint64_t>::max())
        throw std::invalid_argument("build_K_prefix: cutoff numerator too large");
    KPrefix p;
    p.cutoff = cutoff;
    p.completeness_horizon = idx.table().max_n;
    p.settle_window = idx.settle_window();
    p.dropped_unsettled = idx.dropped_unsettled();
    detail::MK cut{uint64_t(cutoff.m), cutoff.k};

    for (unsigned u = 0; u < 3; ++u)
        for (const detail::MK& e : idx.canonical(u))
            for (unsigned k = e.k; detail::cmp_mk(e.m, k, cut.m, cut.k) >= 0; ++k)
                p.elements.push_back({e.m, k, u + 3 * (k - e.k), true, Ordinal{}});

    std::sort(p.elements.begin(), p.elements.end(), [](const PrefixElement& a, const PrefixElement& b) {
        return detail::cmp_mk(a.m, a.k, b.m, b.k) > 0;
    });

    if (p.elements.empty()) return p;
    if (p.elements.front().layer != 0)
        throw std::logic_error("build_K_prefix: segment does not start at a base-layer element");

    Ordinal cur;  // 0, the first position
    p.elements.front().label = cur;
    for (size_t i = 1; i < p.elements.size(); ++i) {
        unsigned d = p.elements[i].layer;
        if (d >= kMaxOrdinalDegree)
            throw std::overflow_error("build_K_prefix: element layer exceeds the ordinal degree cap");
        if (cur.top) throw std::logic_error("build_K_prefix: walked past the top position");
        if (cur.c.size() < d + 1) cur.c.resize(d + 1, 0);
        for (unsigned j = 0; j < d; ++j) cur.c[j] = 0;
        cur.c[d] += 1;
        trim(cur);
        p.elements[i].label = cur;
    }

    if (verify_mode > 0) {
        for (size_t i = 0; i < p.elements.size(); ++i) {
            const PrefixElement& e = p.elements[i];
            bool check = verify_mode >= 2 || e.layer >= 1 || i < 500 || i % 97 == 0;
            if (!check) continue;
            bool uncertain = false;
            Ordinal want = idx.expected_label(e.m, e.k, &uncertain);
            if (uncertain) {
                ++p.skipped_uncertain;
                continue;
            }
            ++p.verified_labels;
            if (!(want == e.label))
                throw std::logic_error("label disagreement at " + to_string(e.frac()) + ": walk says " +
                                       to_string(e.label) + ", position recursion says " + to_string(want));
        }
    }
    return p;
}

inline KPrefix build_K_prefix(const ComplexityTable& t, const Frac3& cutoff, unsigned settle_window = 3,
                              int verify_mode = 1) {
    LayerIndex idx(t, settle_window);
    return build_K_prefix(idx, cutoff, verify_mode);
}

/*
 * Keep exactly the limit positions and step one derivation deeper.  The new
 * labels are the positions within the derived set: a limit label w*g maps
 * to g-1 when g is finite, to g otherwise (left absorption).
 */
inline KPrefix derived_prefix(const KPrefix& p) {
    KPrefix q;
    q.cutoff = p.cutoff;
    q.layer = p.layer + 1;
    q.completeness_horizon = p.completeness_horizon;
    q.settle_window = p.settle_window;
    q.dropped_unsettled = p.dropped_unsettled;
    for (const PrefixElement& e : p.elements) {
        if (!is_limit(e.label)) continue;
        PrefixElement d = e;
        Ordinal g;  // label = w*g, shift coefficients down
        g.c.assign(e.label.c.begin() + 1, e.label.c.end());
        trim(g);
        if (g.c.size() <= 1) {
            uint64_t n = g.c.empty() ? 0 : g.c[0];
            if (n == 0) throw std::logic_error("derived_prefix: zero limit label");
            d.label = ord_fin(n - 1);
        } else {
            d.label = g;
        }
        q.elements.push_back(std::move(d));
    }
    return q;
}

struct SelfSimilarityReport {
    Frac3 compare_above;     // overlap starts here: 3 * cutoff
    uint64_t compared = 0;
    std::vector<std::string> mismatches;  // humanly readable, first few
    bool ok() const { return mismatches.empty(); }
};

/*
 * Scaling the third derived set by 3 must reproduce the original on the
 * overlapping value range.  Both sides are built from the same numerator
 * universe, so the comparison is exact: same values, same labels.
 */
inline SelfSimilarityReport check_self_similarity(const KPrefix& p) {
    SelfSimilarityReport rep;
    rep.compare_above = scale3(p.cutoff, 1);
    KPrefix d3 = derived_prefix(derived_prefix(derived_prefix(p)));
    detail::MK lim{uint64_t(rep.compare_above.m), rep.compare_above.k};

    std::vector<const PrefixElement*> a;
    for (const PrefixElement& e : p.elements) {
        if (detail::cmp_mk(e.m, e.k, lim.m, lim.k) < 0) break;
        a.push_back(&e);
    }
    size_t i = 0;
    auto complain = [&rep](const std::string& s) {
        if (rep.mismatches.size() < 8) rep.mismatches.push_back(s);
    };
    for (const PrefixElement& e : d3.elements) {
        if (e.k == 0) throw std::logic_error("check_self_similarity: derived element not divisible by 3");
        ++rep.compared;
        if (i >= a.size()) {
            complain("extra scaled element " + to_string(frac3(e.m, e.k - 1)));
            continue;
        }
        const PrefixElement& x = *a[i++];
        if (!(x.m == e.m && x.k == e.k - 1)) {
            complain("value mismatch: expected " + to_string(x.frac()) + ", scaled set has " +
                     to_string(frac3(e.m, e.k - 1)));
            continue;
        }
        if (!(x.label == e.label))
            complain("label mismatch at " + to_string(x.frac()) + ": " + to_string(x.label) + " vs " +
                     to_string(e.label));
    }
    if (i < a.size()) complain("scaled set stops " + std::to_string(a.size() - i) + " elements early");
    return rep;
}

/*
 * One multiplicative family attached to a limit n/3^(k+epsilon): splits
 * n = a*b whose horizon stable values add exactly.  Members are
 * (n*3^j + b*3^v)/3^(j+k+epsilon) for j >= v, decreasing toward the limit;
 * v is the greatest exponent with b*3^v <= n, so offsets b*3^v are distinct
 * and order the generators.  epsilon is 1 exactly when the members lie in
 * layer 2 (the wrap-around case), else 0.
 */
struct FamilyGen {
    uint64_t a = 0, b = 0;
    unsigned v = 0;
    uint64_t n = 0;
    unsigned k = 0;
    unsigned epsilon = 0;
    bool settled = true;
    uint64_t offset() const { return b * uint64_t(detail::pow3_u128(v)); }
};

inline std::vector<FamilyGen> family_generators(const ComplexityTable& t, const Frac3& limit, unsigned u,
                                                unsigned settle_window = 3) {
    if (u > 2) throw std::invalid_argument("family_generators: u in {0,1,2}");
    if (limit.is_zero() || limit.m > std::numeric_limits<uint64_t>::max())
        throw std::invalid_argument("family_generators: limit out of range");
    uint64_t n = uint64_t(limit.m);
    unsigned eps = u == 2 ? 1 : 0;
    if (limit.k < eps) throw std::invalid_argument("family_generators: limit exponent too small for layer wrap");
    unsigned k = limit.k - eps;

    StableValue sn = stable_complexity(t, n, settle_window);
    std::vector<FamilyGen> gens;
    for (uint64_t b = 1; b <= n; ++b) {
        if (n % b != 0) continue;
        uint64_t a = n / b;
        StableValue sa = stable_complexity(t, a, settle_window);
        StableValue sb = stable_complexity(t, b, settle_window);
        if (sa.value + sb.value != sn.value) continue;
        FamilyGen g;
        g.a = a;
        g.b = b;
        g.n = n;
        g.k = k;
        g.epsilon = eps;
        g.settled = sn.settled && sa.settled && sb.settled;
        unsigned v = 0;
        while (b * uint64_t(detail::pow3_u128(v + 1)) <= n) ++v;
        g.v = v;
        gens.push_back(g);
    }
    std::sort(gens.begin(), gens.end(), [](const FamilyGen& x, const FamilyGen& y) { return x.offset() > y.offset(); });
    for (size_t i = 1; i < gens.size(); ++i)
        if (gens[i].offset() == gens[i - 1].offset())
            throw std::logic_error("family_generators: duplicate offset, 3-adic uniqueness violated");
    return gens;
}

/* Appendix-style tail text: "(n*3^k+offset)/3^(k+k0)", with the n=1 and
 * k0=0 degeneracies written the way the tables write them. */
inline std::string emit_family_tail(const FamilyGen& g) {
    unsigned k0 = g.k + g.epsilon;
    std::string head = g.n == 1 ? "3^k" : std::to_string(g.n) + "*3^k";
    std::string denom = k0 == 0 ? "3^k" : "3^(k+" + std::to_string(k0) + ")";
    return "(" + head + "+" + std::to_string(g.offset()) + ")/" + denom;
}

/* Family-member decomposition of a section member: b*(a*3^r+1)/3^(r+k+eps). */
struct Origin {
    uint64_t a = 0, b = 0;
    unsigned r = 0;
};

struct SectionMember {
    TuElement elem;
    bool sporadic = false;
    std::optional<Origin> origin;  // set for family members, empty for sporadics
};

struct Section {
    Ordinal beta;
    unsigned u = 0;
    Frac3 limit;
    std::optional<Frac3> upper;  // previous limit; empty for the half-open first section
    std::vector<SectionMember> members;       // descending value
    std::vector<FamilyGen> families;
    std::vector<Frac3> missing_family;        // family members absent from the computed layer
    uint64_t family_beyond_horizon = 0;       // family members whose numerator exceeds the scan bound
    bool families_contained() const { return missing_family.empty(); }
};

namespace detail {

/* Value of the j-th member of a family as an MK pair (possibly non-canonical numerator). */
inline bool family_member_value(const FamilyGen& g, unsigned j, MK& out) {
    unsigned __int128 num = (unsigned __int128)g.n * pow3_u128(j) + g.offset();
    if (num > std::numeric_limits<uint64_t>::max()) return false;
    uint64_t m = uint64_t(num);
    unsigned k = j + g.k + g.epsilon;
    while (m % 3 == 0 && k > 0) {
        m /= 3;
        --k;
    }
    out = {m, k};
    return true;
}

inline bool match_family(const std::vector<FamilyGen>& gens, const MK& y, Origin& origin) {
    for (const FamilyGen& g : gens) {
        for (unsigned j = g.v;; ++j) {
            MK mem;
            if (!family_member_value(g, j, mem)) break;
            int c = cmp_mk(mem, y);
            if (c < 0) break;  // members decrease; gone below y
            if (c == 0) {
                unsigned r = j - g.v;
                if (g.a != 1 || r != 0) {
                    origin = {g.a, g.b, r};
                    return true;
                }
                break;  // hit the excluded trivial member; deeper j only go lower
            }
        }
    }
    return false;
}

}  // namespace detail

/*
 * The section of layer u below the beta-th limit: members are the layer-u
 * elements strictly between the limit and the nearest deeper element above
 * it (none for beta = 0: that first section is closed on the right).
 * Flags each member sporadic unless some family of the limit produces it,
 * and lists family members that the computed layer does not contain.
 */
inline Section section_of(const ComplexityTable& t, const KPrefix& p, const Ordinal& beta, unsigned u) {
    if (u > 2) throw std::invalid_argument("section_of: u in {0,1,2}");
    Section s;
    s.beta = beta;
    s.u = u;
    Ordinal want = omega_shift(succ(beta), u + 1);
    size_t li = p.elements.size();
    for (size_t i = 0; i < p.elements.size(); ++i)
        if (p.elements[i].label == want) {
            li = i;
            break;
        }
    if (li == p.elements.size())
        throw FrontierError("section limit at position " + to_string(want) +
                            " is not inside the computed segment (deepen the cutoff or enlarge the table)");
    const PrefixElement& lim = p.elements[li];
    if (lim.layer != u + 1)
        throw std::logic_error("section_of: element at the limit position has layer " + std::to_string(lim.layer));
    s.limit = lim.frac();

    size_t ui = li;  // nearest deeper element above the limit, if any
    while (ui > 0) {
        --ui;
        if (p.elements[ui].layer >= u + 1) {
            s.upper = p.elements[ui].frac();
            break;
        }
    }
    size_t begin = s.upper ? ui + 1 : 0;
    s.families = family_generators(t, s.limit, u, p.settle_window);
    for (size_t i = begin; i < li; ++i) {
        const PrefixElement& e = p.elements[i];
        if (e.layer != u) continue;
        SectionMember m;
        m.elem = {e.frac(), u, e.settled};
        detail::MK y{e.m, e.k};
        Origin o;
        if (detail::match_family(s.families, y, o))
            m.origin = o;
        else
            m.sporadic = true;
        s.members.push_back(std::move(m));
    }

    // containment: every family member inside the interval should be a member.
    // The first section is closed on the right at the layer's first element.
    uint64_t max_m = p.completeness_horizon;
    for (unsigned i = 0; i < p.settle_window; ++i) max_m /= 3;
    detail::MK limv{lim.m, lim.k};
    std::optional<detail::MK> top_incl;
    if (!s.upper && !s.members.empty()) {
        const Frac3& f = s.members.front().elem.frac;
        top_incl = detail::MK{uint64_t(f.m), f.k};
    }
    for (const FamilyGen& g : s.families) {
        for (unsigned j = g.v;; ++j) {
            detail::MK mem;
            if (!detail::family_member_value(g, j, mem)) {
                ++s.family_beyond_horizon;
                break;
            }
            if (detail::cmp_mk(mem, limv) <= 0) break;
            if (g.a == 1 && j == g.v) continue;
            bool inside = true;
            if (s.upper) {
                detail::MK up{uint64_t(s.upper->m), s.upper->k};
                if (detail::cmp_mk(mem, up) >= 0) inside = false;
            } else if (!top_incl || detail::cmp_mk(mem, *top_incl) > 0) {
                inside = false;
            }
            if (!inside) continue;
            if (mem.m > max_m) {
                ++s.family_beyond_horizon;
                continue;
            }
            bool found = false;
            for (const SectionMember& sm : s.members)
                if (sm.elem.frac.m == mem.m && sm.elem.frac.k == mem.k) {
                    found = true;
                    break;
                }
            if (!found) s.missing_family.push_back(frac3(mem.m, mem.k));
        }
    }
    return s;
}

/* Refresh the sporadic flags and origins of an already-built section. */
inline Section& classify_sporadics(Section& s) {
    for (SectionMember& m : s.members) {
        detail::MK y{uint64_t(m.elem.frac.m), m.elem.frac.k};
        Origin o;
        if (detail::match_family(s.families, y, o)) {
            m.sporadic = false;
            m.origin = o;
        } else {
            m.sporadic = true;
            m.origin.reset();
        }
    }
    return s;
}

/* Where a sporadic comes from: a family of a nearby deeper limit to its left. */
struct OriginRef {
    Frac3 limit;
    Origin origin;
};

inline std::optional<OriginRef> sporadic_origin(const ComplexityTable& t, const KPrefix& p, const Frac3& member,
                                                unsigned u, unsigned scan_limits = 12) {
    detail::MK y{uint64_t(member.m), member.k};
    unsigned seen = 0;
    // walk elements below the member in value, trying each deeper element's families
    for (const PrefixElement& e : p.elements) {
        if (detail::cmp_mk(e.m, e.k, y.m, y.k) >= 0) continue;
        if (e.layer < u + 1) continue;
        if (++seen > scan_limits) break;
        std::vector<FamilyGen> gens = family_generators(t, e.frac(), (e.layer - 1) % 3, p.settle_window);
        Origin o;
        if (detail::match_family(gens, y, o)) return OriginRef{e.frac(), o};
    }
    return std::nullopt;
}

struct LimitRelationCheck {
    unsigned u = 0;
    uint64_t alpha = 0;
    Frac3 limit;
    size_t members = 0;
    bool decreasing = true;        // strictly toward the limit in reverse order
    bool within_tolerance = false; // last member within 1/1000 relative distance
    std::string note;
    bool ok() const { return decreasing && within_tolerance && note.empty(); }
};

struct LimitRelationsReport {
    std::vector<LimitRelationCheck> checks;
    bool ok() const {
        for (const auto& c : checks)
            if (!c.ok()) return false;
        return !checks.empty();
    }
};

/*
 * For each layer u and finite alpha: the layer-u elements of block alpha
 * descend strictly toward the alpha-th element of layer u+1 (which is the
 * base list scaled by 1/3 once u wraps past 2), and the last computed
 * member sits within 1/1000 of the limit.  Exact rational arithmetic.
 */
inline LimitRelationsReport check_limit_relations(const ComplexityTable& /*t*/, const KPrefix& p, size_t depth,
                                                  uint64_t alpha_max = 2) {
    LimitRelationsReport rep;
    for (unsigned u = 0; u < 3; ++u) {
        std::vector<const PrefixElement*> limits, own;
        for (const PrefixElement& e : p.elements) {
            if (e.layer == u + 1) limits.push_back(&e);
            else if (e.layer == u) own.push_back(&e);
        }
        for (uint64_t alpha = 0; alpha <= alpha_max; ++alpha) {
            LimitRelationCheck c;
            c.u = u;
            c.alpha = alpha;
            if (alpha >= limits.size())
                throw FrontierError("limit relations: layer " + std::to_string(u + 1) + " has no element " +
                                    std::to_string(alpha) + " above the cutoff");
            const PrefixElement* lim = limits[alpha];
            c.limit = lim->frac();
            std::vector<const PrefixElement*> block;
            for (const PrefixElement* e : own) {
                if (detail::cmp_mk(e->m, e->k, lim->m, lim->k) <= 0) continue;
                if (alpha > 0) {
                    const PrefixElement* up = limits[alpha - 1];
                    if (detail::cmp_mk(e->m, e->k, up->m, up->k) >= 0) continue;
                }
                block.push_back(e);
            }
            if (block.size() < depth)
                throw FrontierError("limit relations: block " + std::to_string(alpha) + " of layer " +
                                    std::to_string(u) + " has only " + std::to_string(block.size()) +
                                    " computed members, need " + std::to_string(depth));
            block.erase(block.begin(), block.end() - std::ptrdiff_t(depth));
            c.members = block.size();
            for (size_t i = 0; i + 1 < block.size(); ++i)
                if (detail::cmp_mk(block[i]->m, block[i]->k, block[i + 1]->m, block[i + 1]->k) <= 0)
                    c.decreasing = false;
            for (const PrefixElement* e : block)
                if (detail::cmp_mk(e->m, e->k, lim->m, lim->k) <= 0) c.decreasing = false;
            // relative closeness of the final member: 1000*(x - L) <= L
            const PrefixElement* last = block.back();
            unsigned K = std::max(last->k, unsigned(lim->k));
            Nat A = Nat(last->m) * pow3_nat(K - last->k);
            Nat B = Nat(lim->m) * pow3_nat(K - lim->k);
            c.within_tolerance = (A - B) * 1000 <= B;
            rep.checks.push_back(std::move(c));
        }
    }
    return rep;
}

struct StableMismatch {
    uint64_t n = 0;
    unsigned first = 0, second = 0;
};

struct PrefixDiff {
    std::vector<Frac3> only_in_first, only_in_second;
    std::vector<StableMismatch> stable_mismatches;  // settled stable values that differ
    uint64_t numerators_compared = 0;
    uint64_t probe_checked = 0;      // probe family values inside both horizons
    uint64_t probe_unresolved = 0;   // probe family values beyond a horizon
    bool separated() const {
        return !only_in_first.empty() || !only_in_second.empty() || !stable_mismatches.empty();
    }
    std::string verdict() const {
        return separated() ? "separation found: computed segments differ"
                           : "no separation found at horizon";
    }
};

/*
 * Compare two computed segments (typically: full calculus vs the products
 * and +1 variant).  An empty diff never proves the two compacts equal; it
 * only says the horizon shows no separation.  The probe family
 * 73*(3^k+1)+6 is the first family whose membership is genuinely open, so
 * its numerators are tracked explicitly.
 */
inline PrefixDiff compare_prefixes(const KPrefix& a, const KPrefix& b, const ComplexityTable* ta = nullptr,
                                   const ComplexityTable* tb = nullptr) {
    if (!(a.cutoff == b.cutoff)) throw std::invalid_argument("compare_prefixes: segments have different cutoffs");
    PrefixDiff d;
    size_t i = 0, j = 0;
    while (i < a.elements.size() || j < b.elements.size()) {
        if (i == a.elements.size()) {
            d.only_in_second.push_back(b.elements[j++].frac());
            continue;
        }
        if (j == b.elements.size()) {
            d.only_in_first.push_back(a.elements[i++].frac());
            continue;
        }
        int c = detail::cmp_mk(a.elements[i].m, a.elements[i].k, b.elements[j].m, b.elements[j].k);
        if (c > 0)
            d.only_in_first.push_back(a.elements[i++].frac());
        else if (c < 0)
            d.only_in_second.push_back(b.elements[j++].frac());
        else {
            ++i;
            ++j;
        }
    }
    if (ta && tb) {
        uint64_t ma = ta->max_n, mb = tb->max_n;
        for (unsigned s = 0; s < a.settle_window; ++s) ma /= 3;
        for (unsigned s = 0; s < b.settle_window; ++s) mb /= 3;
        uint64_t m_top = std::min(ma, mb);
        for (uint64_t n = 1; n <= m_top; ++n) {
            StableValue x = stable_complexity(*ta, n, a.settle_window);
            StableValue y = stable_complexity(*tb, n, b.settle_window);
            if (!x.settled || !y.settled) continue;
            ++d.numerators_compared;
            if (x.value != y.value) d.stable_mismatches.push_back({n, x.value, y.value});
        }
        for (unsigned k = 1; k <= 40; ++k) {
            unsigned __int128 n = (unsigned __int128)73 * detail::pow3_u128(k) + 79;
            if (n > m_top) {
                ++d.probe_unresolved;
                if (k > 25) break;
                continue;
            }
            ++d.probe_checked;
        }
    }
    return d;
}

}  // namespace ckit
