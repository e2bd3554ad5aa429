#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <ckit/cache.hpp>
#include <ckit/complexity.hpp>
#include <ckit/oeis.hpp>

using namespace ckit;

namespace {

// dead simple reference: no pruning, no thresholds, quadratic sum scan
std::vector<unsigned> reference_values(uint64_t n_max) {
    std::vector<unsigned> v(n_max + 1, 0);
    v[1] = 1;
    for (uint64_t n = 2; n <= n_max; ++n) {
        unsigned best = ~0u;
        for (uint64_t a = 1; a <= n / 2; ++a) best = std::min(best, v[a] + v[n - a]);
        for (uint64_t d = 2; d * d <= n; ++d)
            if (n % d == 0) best = std::min(best, v[d] + v[n / d]);
        v[n] = best;
    }
    return v;
}

std::string data_dir() {
    const char* d = std::getenv("CKIT_DATA");
    return d && *d ? d : "tests/data";
}

}  // namespace

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("pruned table equals the full scan up to 3000") {
    ComplexityTable t = build_table(3000);
    std::vector<unsigned> ref = reference_values(3000);
    for (uint64_t n = 1; n <= 3000; ++n) REQUIRE(unsigned(t.values[n]) == ref[n]);
}

TEST_CASE("known values at the usual checkpoints") {
    ComplexityTable t = build_table(100000);
    CHECK(t.value(1) == 1);
    CHECK(t.value(2) == 2);
    CHECK(t.value(3) == 3);
    CHECK(t.value(9) == 6);
    CHECK(t.value(23) == 11);
    CHECK(t.value(73) == 13);
    CHECK(t.value(107) == 16);
    CHECK(t.value(1094) == 22);
    CHECK(t.value(2188) == 22);
    CHECK(t.value(100000) == 35);
    CHECK_THROWS_AS(t.value(0), std::out_of_range);
    CHECK_THROWS_AS(t.value(100001), std::out_of_range);
}

TEST_CASE("independently generated sequence file agrees through 100000") {
    ComplexityTable t = build_table(100000);
    std::vector<BFileEntry> entries = load_bfile(data_dir() + "/b005245.txt");
    REQUIRE(entries.size() == 100000);
    BFileReport r = check_bfile(t, entries);
    CHECK(r.compared == 100000);
    REQUIRE(r.mismatches.empty());
}

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("witnesses evaluate back to their number with exactly the counted ones") {
    ComplexityTable t = build_table(2000);
    for (uint64_t n = 1; n <= 2000; ++n) {
        Expression e = witness_expression(t, n);
        EvalResult r = eval_expression(e);
        REQUIRE(r.value == n);
        REQUIRE(r.ones == t.value(n));
    }
}

TEST_CASE("witness scan order is deterministic: products first, smallest part first") {
    ComplexityTable t = build_table(100);
    CHECK(to_string(witness_expression(t, 6)) == "(1+1)*(1+1+1)");
    CHECK(to_string(witness_expression(t, 9)) == "(1+1+1)*(1+1+1)");
    CHECK(to_string(witness_expression(t, 5)) == "1+(1+1)*(1+1)");
    CHECK(to_string(witness_expression(t, 1)) == "1");
    Split s = witness_split(t, 12);
    CHECK(s.kind == Split::Product);
    CHECK(s.left == 2);  // smallest divisor that attains the value
}

TEST_CASE("largest value per complexity class follows the 2*3^k law") {
    ComplexityTable t = build_table(100000);
    for (unsigned k = 0; k <= 9; ++k) {
        LargestResult r = largest_with_complexity(t, 3 * k + 2);
        REQUIRE(r.certified);
        Nat want = Nat(2) * pow3_nat(k);
        CHECK(Nat(r.n) == want);
    }
    // certification must refuse once the envelope leaves the table
    ComplexityTable small = build_table(100);
    CHECK(largest_with_complexity(small, 11).certified == true);   // 2*3^3 = 54 <= 100
    CHECK(largest_with_complexity(small, 12).certified == true);   // 3^4 = 81 <= 100
    CHECK(largest_with_complexity(small, 13).certified == false);  // 4*3^3 = 108 > 100
}

TEST_CASE("envelope values by residue") {
    CHECK(complexity_envelope(1) == 1);
    CHECK(complexity_envelope(2) == 2);
    CHECK(complexity_envelope(3) == 3);
    CHECK(complexity_envelope(4) == 4);
    CHECK(complexity_envelope(5) == 6);
    CHECK(complexity_envelope(6) == 9);
    CHECK(complexity_envelope(8) == 18);
    CHECK(complexity_envelope(11) == 54);
    CHECK_THROWS_AS(complexity_envelope(0), std::invalid_argument);
}

// 8 is solid: its cheapest split is 1+7 at cost 7, above ||8|| = 6.
TEST_CASE("solid numbers: every sum split strictly exceeds the complexity") {
    ComplexityTable t = build_table(200);
    std::vector<uint64_t> s = solid_numbers(t, 100);

    std::vector<uint64_t> oracle;
    for (uint64_t n = 1; n <= 100; ++n) {
        unsigned best = ~0u;
        for (uint64_t a = 1; a <= n / 2; ++a)
            best = std::min(best, t.values[a] + unsigned(t.values[n - a]));
        if (n == 1 || best > t.values[n]) oracle.push_back(n);
    }
    REQUIRE(s == oracle);

    std::vector<uint64_t> head(s.begin(), s.begin() + 9);
    CHECK(head == std::vector<uint64_t>{1, 6, 8, 9, 12, 14, 15, 16, 18});
    CHECK_THROWS_AS(solid_numbers(t, 500), std::out_of_range);
}

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("cache files round-trip and rebuild byte-identically") {
    namespace fs = std::filesystem;
    ComplexityTable t = build_table(5000);
    fs::path p1 = fs::temp_directory_path() / "ckit_cache_a.bin";
    fs::path p2 = fs::temp_directory_path() / "ckit_cache_b.bin";
    save_table(t, p1.string());
    save_table(build_table(5000), p2.string());

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    REQUIRE(b1 == b2);
    REQUIRE(b1.size() > 5000);

    ComplexityTable back = load_table(p1.string());
    CHECK(back.max_n == t.max_n);
    CHECK(back.policy == t.policy);
    REQUIRE(back.values == t.values);

    SECTION("corrupt magic is rejected") {
        std::string bad = b1;
        bad[0] = 'X';
        std::ofstream out(p2, std::ios::binary);
        out.write(bad.data(), std::streamsize(bad.size()));
        out.close();
        CHECK_THROWS_AS(load_table(p2.string()), CacheError);
    }
    SECTION("truncation is rejected") {
        std::ofstream out(p2, std::ios::binary);
        out.write(b1.data(), std::streamsize(b1.size() / 2));
        out.close();
        CHECK_THROWS_AS(load_table(p2.string()), CacheError);
    }
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("bounded policy with a roomy bound collapses to the exhaustive table") {
    ComplexityTable a = build_table(10000);
    ComplexityTable b = build_table(10000, Policy::Bounded, 1u << 30);
    REQUIRE(a.values == b.values);
}
