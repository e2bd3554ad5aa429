#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int status = -1;
    std::string out;
};

std::string bin_path() {
    const char* env = std::getenv("CKIT_BIN");
    REQUIRE(env != nullptr);
    return env;
}

std::string data_dir() {
    const char* env = std::getenv("CKIT_DATA");
    return env ? env : "tests/data";
}

std::string cache_dir() {
    static std::string dir = [] {
        std::string d = std::string(std::tmpnam(nullptr)) + "-ckit-cache";
        return d;
    }();
    return dir;
}

/* Run the binary through the shell, capturing stdout+stderr and the exit code. */
RunResult run(const std::string& args) {
    std::string cmd =
        "CKIT_CACHE_DIR='" + cache_dir() + "' '" + bin_path() + "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    int rc = pclose(pipe);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").status == 2);
    CHECK(run("no-such-command").status == 2);
    CHECK(run("query").status == 2);                        // n is required
    CHECK(run("table --max 10 --format nope").status == 2);
    CHECK(run("query 5 --policy sideways --max 100").status == 2);
}

TEST_CASE("query prints the full record") {
    RunResult r = run("query 9 107 --max 1000");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out, "n=9 complexity=6"));
    CHECK(contains(r.out, "witness=(1+1+1)*(1+1+1)"));
    CHECK(contains(r.out, "n=107 complexity=16"));
    CHECK(contains(r.out, "kappa=5 u=2"));     // 107 stabilizes three layers down
    CHECK(contains(r.out, "stable=15"));
}

TEST_CASE("query emits one json object per number") {
    RunResult r = run("query 23 --max 1000 --format json");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out, "\"complexity\":11"));
    CHECK(contains(r.out, "\"n\":23"));
    CHECK(contains(r.out, "\"settled\":true"));
}

TEST_CASE("table caches are deterministic") {
    std::string a = std::string(std::tmpnam(nullptr)) + "-a.bin";
    std::string b = std::string(std::tmpnam(nullptr)) + "-b.bin";
    REQUIRE(run("table --max 400 --out '" + a + "'").status == 0);
    REQUIRE(run("table --max 400 --out '" + b + "'").status == 0);
    CHECK(read_file(a) == read_file(b));

    SECTION("a cache feeds later commands") {
        RunResult r = run("query 9 --max 400 --cache '" + a + "' --settle-window 1");
        CHECK(r.status == 0);
        CHECK(contains(r.out, "complexity=6"));
    }

    SECTION("parameter mismatch against a cache is an input error") {
        RunResult r = run("query 9 --max 500 --cache '" + a + "' --settle-window 1");
        CHECK(r.status == 3);
        CHECK(contains(r.out, "different parameters"));
    }

    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("missing cache files are input errors") {
    RunResult r = run("query 9 --max 100 --cache /nonexistent/t.bin --settle-window 1");
    CHECK(r.status == 3);
}

TEST_CASE("tsv table output starts at one") {
    RunResult r = run("table --max 12 --format tsv");
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("1\t1\n2\t2\n3\t3\n4\t4\n5\t5\n6\t5\n", 0) == 0);
}

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("b-file checking") {
    SECTION("the shipped sequence agrees") {
        RunResult r = run("check-oeis --file '" + data_dir() + "/b005245.txt' --max 100000");
        REQUIRE(r.status == 0);
        CHECK(contains(r.out, "compared 100000 entries"));
        CHECK(contains(r.out, "all values agree"));
    }

    SECTION("a wrong value is found and reported") {
        std::string path = std::string(std::tmpnam(nullptr)) + "-bad.txt";
        std::ofstream(path) << "1 1\n2 2\n3 4\n";
        RunResult r = run("check-oeis --file '" + path + "' --max 100");
        CHECK(r.status == 1);
        CHECK(contains(r.out, "mismatch at n=3"));
        std::remove(path.c_str());
    }

    SECTION("an unreadable file is an input error") {
        RunResult r = run("check-oeis --file /nonexistent/b.txt --max 100");
        CHECK(r.status == 3);
    }

    SECTION("a malformed file is an input error") {
        std::string path = std::string(std::tmpnam(nullptr)) + "-malformed.txt";
        std::ofstream(path) << "1 1\nbogus line\n";
        RunResult r = run("check-oeis --file '" + path + "' --max 100");
        CHECK(r.status == 3);
        CHECK(contains(r.out, "line 2"));
        std::remove(path.c_str());
    }
}

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("appendix emission prints sections with sporadics in bold") {
    RunResult r = run("emit-appendix --max 100000 --u 0 --beta 0");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out, "== T0 section at K[w]: limit 4/3, interval (4/3, 2] =="));
    CHECK(contains(r.out, "**128/81**"));
    CHECK(contains(r.out, "**1024/729**"));
    CHECK(contains(r.out, "(4*3^k+4)/3^(k+1)"));
    CHECK(contains(r.out, "(4*3^k+3)/3^(k+1)"));
    CHECK(contains(r.out, "(4*3^k+2)/3^(k+1)"));
    CHECK(contains(r.out, "sporadic origins:"));
}

TEST_CASE("appendix emission covers deeper layers and json") {
    SECTION("middle layer, two sections at once") {
        RunResult r = run("emit-appendix --max 100000 --u 1 --beta 0 1");
        REQUIRE(r.status == 0);
        CHECK(contains(r.out, "== T1 section at K[w^2]: limit 1, interval (1, 4/3] =="));
        CHECK(contains(r.out, "== T1 section at K[w^2*2]: limit 8/9, interval (8/9, 1) =="));
        CHECK(contains(r.out, "(3^k+1)/3^k"));
        CHECK(contains(r.out, "**2048/2187**"));
    }

    SECTION("json form is parseable shape") {
        RunResult r = run("emit-appendix --max 100000 --u 2 --beta 0 --format json");
        REQUIRE(r.status == 0);
        CHECK(contains(r.out, "\"limit\": \"2/3\""));
        CHECK(contains(r.out, "\"tail\": \"(2*3^k+2)/3^(k+1)\""));
    }

    SECTION("a section beyond the horizon is a frontier error") {
        RunResult r = run("emit-appendix --max 100000 --u 0 --beta w^3");
        CHECK(r.status == 2);
        CHECK(contains(r.out, "frontier"));
    }
}

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("structural checks run end to end") {
    SECTION("self-similarity") {
        RunResult r = run("selfsim --max 100000");
        REQUIRE(r.status == 0);
        CHECK(contains(r.out, "scaled third derivation matches the set exactly"));
    }

    SECTION("limit convergence inside the horizon") {
        RunResult r = run("limits --max 1000000 --depth 5 --alpha-max 1");
        REQUIRE(r.status == 0);
        CHECK(contains(r.out, "layer 0, block 0: limit 4/3"));
        CHECK(contains(r.out, "converged"));
        CHECK_FALSE(contains(r.out, "NOT CONVERGED"));
        CHECK_FALSE(contains(r.out, "NOT DESCENDING"));
    }

    SECTION("asking past the horizon is a frontier error") {
        RunResult r = run("limits --max 100000 --depth 500");
        CHECK(r.status == 2);
        CHECK(contains(r.out, "frontier"));
    }

    SECTION("restricted-calculus comparison") {
        RunResult r = run("compare-h --max 50000");
        REQUIRE(r.status == 0);
        CHECK(contains(r.out, "verdict: no separation found at horizon"));
        CHECK(contains(r.out, "probe family 73*(3^k+1)+6"));
    }
}
