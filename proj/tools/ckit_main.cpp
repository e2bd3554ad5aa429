#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <ckit/cache.hpp>
#include <ckit/compact.hpp>
#include <ckit/complexity.hpp>
#include <ckit/oeis.hpp>
#include <ckit/records.hpp>
#include <ckit/stability.hpp>

namespace {

using namespace ckit;

/* Exit discipline: 0 clean, 1 a checked property failed, 2 usage or a
 * request past the computed frontier, 3 unreadable input or cache. */
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicySpec {
    Policy policy = Policy::Exhaustive;
    uint64_t bound = 0;
};

PolicySpec parse_policy(const std::string& s) {
    if (s == "exhaustive") return {Policy::Exhaustive, 0};
    if (s == "modified") return {Policy::Modified, 0};
    if (s.rfind("bounded:", 0) == 0) {
        uint64_t b = std::stoull(s.substr(8));
        if (b == 0) throw CLI::ValidationError("--policy", "bound must be positive");
        return {Policy::Bounded, b};
    }
    throw CLI::ValidationError("--policy", "expected exhaustive, bounded:B, or modified");
}

std::string policy_tag(const PolicySpec& p) {
    switch (p.policy) {
        case Policy::Exhaustive: return "exhaustive";
        case Policy::Bounded: return "bounded" + std::to_string(p.bound);
        case Policy::Modified: return "modified";
    }
    return "?";
}

std::string default_cache_name(uint64_t max, const PolicySpec& p) {
    return "ckit-" + std::to_string(max) + "-" + policy_tag(p) + ".bin";
}

/* Load from an explicit cache, or from the cache dir, or build fresh.
 * A cache dir miss builds and saves; an explicit path must already fit. */
ComplexityTable obtain_table(uint64_t max, const PolicySpec& p, const std::string& explicit_cache) {
    if (!explicit_cache.empty()) {
        ComplexityTable t;
        try {
            t = load_table(explicit_cache);
        } catch (const CacheError& e) {
            throw IoError(std::string(e.what()) + "; build it with: ckit table --max " + std::to_string(max) +
                          " --out " + explicit_cache);
        }
        if (t.max_n != max || t.policy != p.policy || (p.policy == Policy::Bounded && t.bound != p.bound))
            throw IoError("cache " + explicit_cache + " was built with different parameters; rebuild it with: " +
                          "ckit table --max " + std::to_string(max) + " --out " + explicit_cache);
        return t;
    }
    const char* dir = std::getenv("CKIT_CACHE_DIR");
    if (dir && *dir) {
        std::filesystem::path path = std::filesystem::path(dir) / default_cache_name(max, p);
        if (std::filesystem::exists(path)) return load_table(path.string());
        ComplexityTable t = build_table(max, p.policy, p.bound);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        save_table(t, path.string());
        return t;
    }
    return build_table(max, p.policy, p.bound);
}

std::string bold(const std::string& s) { return "**" + s + "**"; }

void print_section_text(const ComplexityTable& t, const KPrefix& p, const Section& s) {
    // a section with no deeper upper bound is closed on the right at its own first element
    std::string top = s.upper            ? to_string(*s.upper)
                      : s.members.empty() ? "?"
                                          : to_string(s.members.front().elem.frac);
    std::string interval = "(" + to_string(s.limit) + ", " + top + (s.upper ? ")" : "]");
    std::cout << "== T" << s.u << " section at K[" << to_string(omega_shift(succ(s.beta), s.u + 1))
              << "]: limit " << to_string(s.limit) << ", interval " << interval << " ==\n";
    std::cout << "members (" << s.members.size() << " computed):\n  ";
    bool first = true;
    for (const SectionMember& m : s.members) {
        if (!first) std::cout << ", ";
        first = false;
        std::cout << (m.sporadic ? bold(to_string(m.elem.frac)) : to_string(m.elem.frac));
    }
    std::cout << "\ntails:\n";
    for (const FamilyGen& g : s.families) std::cout << "  " << emit_family_tail(g) << "\n";
    bool any = false;
    for (const SectionMember& m : s.members) {
        if (!m.sporadic) continue;
        if (!any) {
            std::cout << "sporadic origins:\n";
            any = true;
        }
        std::cout << "  " << to_string(m.elem.frac);
        auto o = sporadic_origin(t, p, m.elem.frac, s.u);
        if (o)
            std::cout << " = " << o->origin.b << "*(" << o->origin.a << "*3^" << o->origin.r << "+1)/3^"
                      << (o->origin.r + unsigned(o->limit.k)) << " from limit " << to_string(o->limit) << "\n";
        else
            std::cout << " (no nearby source found)\n";
    }
    if (!s.missing_family.empty()) {
        std::cout << "family members absent from the computed layer:";
        for (const Frac3& f : s.missing_family) std::cout << " " << to_string(f);
        std::cout << "\n";
    }
}

int cmd_table(uint64_t max, const PolicySpec& pol, const std::string& out, const std::string& format) {
    ComplexityTable t = build_table(max, pol.policy, pol.bound);
    if (!out.empty()) {
        save_table(t, out);
        std::cout << "wrote " << out << " (max_n=" << t.max_n << ", policy=" << policy_tag(pol) << ")\n";
        return 0;
    }
    if (format == "tsv") {
        for (uint64_t n = 1; n <= t.max_n; ++n) std::cout << n << "\t" << unsigned(t.values[n]) << "\n";
        return 0;
    }
    std::cout << "built table: max_n=" << t.max_n << " policy=" << policy_tag(pol) << " top_value="
              << unsigned(t.values[t.max_n]) << "\n";
    return 0;
}

int cmd_query(const std::vector<uint64_t>& ns, uint64_t max, const PolicySpec& pol, unsigned window,
              const std::string& cache, const std::string& format) {
    uint64_t need = max;
    for (uint64_t n : ns) {
        uint64_t deep = n;
        for (unsigned i = 0; i < window + 1 && deep <= UINT64_MAX / 3; ++i) deep *= 3;
        if (deep > need) need = deep;
    }
    ComplexityTable t = obtain_table(need, pol, cache);
    for (uint64_t n : ns) {
        unsigned c = t.value(n);
        Expression e = witness_expression(t, n);
        StableValue s = stable_complexity(t, n, window);
        if (format == "json") {
            json j;
            j["n"] = n;
            j["complexity"] = c;
            j["witness"] = to_string(e);
            j["defect"] = defect(t, n).value;
            j["stable"] = s.value;
            j["settled"] = s.settled;
            if (n % 3 != 0) {
                KappaValue kv = kappa(t, n, window);
                j["kappa"] = kv.kappa;
                j["u"] = kv.u;
            }
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "n=" << n << " complexity=" << c << " witness=" << to_string(e)
                      << " defect=" << defect(t, n).value << " stable=" << s.value
                      << (s.settled ? " settled" : " unsettled");
            if (n % 3 != 0) {
                KappaValue kv = kappa(t, n, window);
                std::cout << " kappa=" << kv.kappa << " u=" << kv.u;
            }
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_check_oeis(const std::string& file, uint64_t max, const std::string& cache) {
    std::vector<BFileEntry> entries;
    try {
        entries = load_bfile(file);
    } catch (const BFileError& e) {
        throw IoError(file + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    ComplexityTable t = obtain_table(max, {Policy::Exhaustive, 0}, cache);
    BFileReport r = check_bfile(t, entries);
    std::cout << "compared " << r.compared << " entries, " << r.beyond_table << " beyond the table\n";
    if (!r.ok()) {
        for (const BFileMismatch& m : r.mismatches)
            std::cout << "mismatch at n=" << m.n << ": table says " << m.table_value << ", file says "
                      << m.file_value << "\n";
        if (r.compared == 0) std::cout << "nothing compared\n";
        return 1;
    }
    std::cout << "all values agree\n";
    return 0;
}

int cmd_emit_appendix(uint64_t max, unsigned u, const std::string& cutoff_s,
                      const std::vector<std::string>& betas, unsigned window, const std::string& cache,
                      const std::string& format) {
    Frac3 cutoff = parse_frac3(cutoff_s);
    ComplexityTable t = obtain_table(max, {Policy::Exhaustive, 0}, cache);
    KPrefix p = build_K_prefix(t, cutoff, window);
    json all = json::array();
    for (const std::string& bs : betas) {
        Ordinal beta = parse_ordinal(bs);
        Section s = section_of(t, p, beta, u);
        if (format == "json")
            all.push_back(to_json(s));
        else
            print_section_text(t, p, s);
    }
    if (format == "json") std::cout << all.dump(2) << "\n";
    return 0;
}

int cmd_selfsim(uint64_t max, const std::string& cutoff_s, unsigned window, const std::string& cache) {
    Frac3 cutoff = parse_frac3(cutoff_s);
    ComplexityTable t = obtain_table(max, {Policy::Exhaustive, 0}, cache);
    KPrefix p = build_K_prefix(t, cutoff, window);
    SelfSimilarityReport r = check_self_similarity(p);
    std::cout << "compared " << r.compared << " elements above " << to_string(r.compare_above) << "\n";
    if (!r.ok()) {
        for (const std::string& m : r.mismatches) std::cout << "  " << m << "\n";
        return 1;
    }
    std::cout << "scaled third derivation matches the set exactly\n";
    return 0;
}

int cmd_limits(uint64_t max, const std::string& cutoff_s, size_t depth, uint64_t alpha_max, unsigned window,
               const std::string& cache) {
    Frac3 cutoff = parse_frac3(cutoff_s);
    ComplexityTable t = obtain_table(max, {Policy::Exhaustive, 0}, cache);
    KPrefix p = build_K_prefix(t, cutoff, window);
    LimitRelationsReport r = check_limit_relations(t, p, depth, alpha_max);
    bool all_ok = true;
    for (const LimitRelationCheck& c : r.checks) {
        std::cout << "layer " << c.u << ", block " << c.alpha << ": limit " << to_string(c.limit) << ", "
                  << c.members << " members, " << (c.decreasing ? "descending" : "NOT DESCENDING") << ", "
                  << (c.within_tolerance ? "converged" : "NOT CONVERGED") << "\n";
        all_ok = all_ok && c.ok();
    }
    return all_ok ? 0 : 1;
}

int cmd_compare_h(uint64_t max, const std::string& cutoff_s, unsigned window) {
    Frac3 cutoff = parse_frac3(cutoff_s);
    ComplexityTable full = build_table(max, Policy::Exhaustive);
    ComplexityTable restricted = build_table(max, Policy::Modified);
    KPrefix a = build_K_prefix(full, cutoff, window);
    KPrefix b = build_K_prefix(restricted, cutoff, window);
    PrefixDiff d = compare_prefixes(a, b, &full, &restricted);
    std::cout << "elements only in the full calculus: " << d.only_in_first.size() << "\n";
    std::cout << "elements only in the restricted calculus: " << d.only_in_second.size() << "\n";
    std::cout << "settled numerators compared: " << d.numerators_compared << ", mismatches: "
              << d.stable_mismatches.size() << "\n";
    std::cout << "probe family 73*(3^k+1)+6: " << d.probe_checked << " inside horizon, " << d.probe_unresolved
              << " unresolved\n";
    std::cout << "verdict: " << d.verdict() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integer complexity, stable defects, and the layered compact of thirds"};
    app.require_subcommand(1);

    uint64_t max = 1000000;
    std::string policy_s = "exhaustive";
    std::string out, cache, format = "text", cutoff_s = "4/9", file;
    unsigned u = 0, window = 3;
    size_t depth = 10;
    uint64_t alpha_max = 2;
    std::vector<std::string> betas{"0"};
    std::vector<uint64_t> ns;

    auto* tbl = app.add_subcommand("table", "build the complexity table, optionally writing a cache");
    tbl->add_option("--max", max, "largest n")->required();
    tbl->add_option("--policy", policy_s, "exhaustive, bounded:B, or modified");
    tbl->add_option("--out", out, "cache file to write");
    tbl->add_option("--format", format, "text or tsv")->check(CLI::IsMember({"text", "tsv"}));

    auto* qry = app.add_subcommand("query", "complexity, witness, defect, and stable data for numbers");
    qry->add_option("n", ns, "numbers to query")->required();
    qry->add_option("--max", max, "table horizon (grown automatically to settle queries)");
    qry->add_option("--policy", policy_s, "exhaustive, bounded:B, or modified");
    qry->add_option("--settle-window", window, "extra powers of three that must agree");
    qry->add_option("--cache", cache, "read the table from this cache file");
    qry->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* oeis = app.add_subcommand("check-oeis", "compare the table against a b-file");
    oeis->add_option("--file", file, "b-file path")->required();
    oeis->add_option("--max", max, "table horizon");
    oeis->add_option("--cache", cache, "read the table from this cache file");

    auto* emit = app.add_subcommand("emit-appendix", "print sections of a layer with families and sporadics");
    emit->add_option("--max", max, "table horizon");
    emit->add_option("--u", u, "layer")->check(CLI::Range(0, 2));
    emit->add_option("--cutoff", cutoff_s, "smallest value kept in the segment");
    emit->add_option("--beta", betas, "section positions, e.g. 0 1 w w+2");
    emit->add_option("--settle-window", window, "extra powers of three that must agree");
    emit->add_option("--cache", cache, "read the table from this cache file");
    emit->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* self = app.add_subcommand("selfsim", "check that the third derivation scaled by 3 reproduces the set");
    self->add_option("--max", max, "table horizon");
    self->add_option("--cutoff", cutoff_s, "smallest value kept in the segment");
    self->add_option("--settle-window", window, "extra powers of three that must agree");
    self->add_option("--cache", cache, "read the table from this cache file");

    auto* lim = app.add_subcommand("limits", "check block convergence toward layer limits");
    lim->add_option("--max", max, "table horizon");
    lim->add_option("--cutoff", cutoff_s, "smallest value kept in the segment");
    lim->add_option("--depth", depth, "members per block to examine");
    lim->add_option("--alpha-max", alpha_max, "blocks per layer to examine");
    lim->add_option("--settle-window", window, "extra powers of three that must agree");
    lim->add_option("--cache", cache, "read the table from this cache file");

    auto* cmp = app.add_subcommand("compare-h", "compare the set against the restricted-calculus variant");
    cmp->add_option("--max", max, "table horizon");
    cmp->add_option("--cutoff", cutoff_s, "smallest value kept in the segment");
    cmp->add_option("--settle-window", window, "extra powers of three that must agree");

    try {
        app.parse(argc, argv);
        PolicySpec pol = parse_policy(policy_s);
        if (*tbl) return cmd_table(max, pol, out, format);
        if (*qry) return cmd_query(ns, max, pol, window, cache, format);
        if (*oeis) return cmd_check_oeis(file, max, cache);
        if (*emit) return cmd_emit_appendix(max, u, cutoff_s, betas, window, cache, format);
        if (*self) return cmd_selfsim(max, cutoff_s, window, cache);
        if (*lim) return cmd_limits(max, cutoff_s, depth, alpha_max, window, cache);
        if (*cmp) return cmd_compare_h(max, cutoff_s, window);
        return 2;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ckit::FrontierError& e) {
        std::cerr << "frontier: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ckit::CacheError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    }
}
