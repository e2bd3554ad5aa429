#include <catch2/catch_amalgamated.hpp>

#include <ckit/records.hpp>

#include <sstream>

using namespace ckit;

namespace {

const ComplexityTable& table5() {
    static ComplexityTable t = build_table(100000);
    return t;
}

const LayerIndex& index5() {
    static LayerIndex idx(table5(), 3);
    return idx;
}

const KPrefix& prefix5() {
    static KPrefix p = build_K_prefix(index5(), frac3(uint64_t(4), 2), 1);
    return p;
}

}  // namespace

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("section record survives a round trip") {
    Section s = section_of(table5(), prefix5(), ord_fin(0), 0);
    json j = to_json(s);

    SECTION("shape") {
        CHECK(j.at("beta") == "0");
        CHECK(j.at("u") == 0);
        CHECK(j.at("limit") == "4/3");
        CHECK(j.at("upper").is_null());
        REQUIRE(j.at("members").is_array());
        REQUIRE(!j.at("members").empty());
        CHECK(j.at("members")[0].at("frac") == "2");
        CHECK(j.at("families").is_array());
        CHECK(j.at("families")[0].at("tail") == "(4*3^k+4)/3^(k+1)");
    }

    SECTION("parse back and re-serialize identically") {
        Section back = section_from_json(j);
        CHECK(ord_cmp(back.beta, s.beta) == 0);
        CHECK(back.u == s.u);
        CHECK(back.limit == s.limit);
        CHECK(back.members.size() == s.members.size());
        json j2 = to_json(back);
        CHECK(j2 == j);
    }

    SECTION("origin is null exactly on sporadics") {
        for (const json& e : j.at("members")) {
            bool spor = e.at("sporadic").get<bool>();
            CHECK(e.at("origin").is_null() == spor);
        }
    }
}

TEST_CASE("section with an upper bound keeps it") {
    Section s = section_of(table5(), prefix5(), ord_fin(1), 0);
    json j = to_json(s);
    REQUIRE(!j.at("upper").is_null());
    CHECK(j.at("upper") == "4/3");
    CHECK(j.at("limit") == "32/27");

    Section back = section_from_json(j);
    REQUIRE(back.upper.has_value());
    CHECK(*back.upper == frac3(uint64_t(4), 1));
    CHECK(to_json(back) == j);
}

TEST_CASE("bottom layer family arithmetic reconstructs") {
    Section s = section_of(table5(), prefix5(), ord_fin(0), 2);
    json j = to_json(s);
    Section back = section_from_json(j);
    REQUIRE(back.families.size() == s.families.size());
    for (size_t i = 0; i < back.families.size(); ++i) {
        CHECK(back.families[i].n == s.families[i].n);
        CHECK(back.families[i].k == s.families[i].k);
        CHECK(back.families[i].epsilon == s.families[i].epsilon);
        CHECK(emit_family_tail(back.families[i]) == emit_family_tail(s.families[i]));
    }
    CHECK(to_json(back) == j);
}

// ─────────────────────────────────────────────────────────────────────────────

TEST_CASE("prefix record survives a round trip") {
    const KPrefix& p = prefix5();
    json j = to_json(p);

    CHECK(j.at("cutoff") == "4/9");
    CHECK(j.at("layer") == 0);
    CHECK(j.at("completeness_horizon") == 100000);
    CHECK(j.at("settle_window") == 3);
    REQUIRE(j.at("elements").is_array());
    REQUIRE(j.at("elements").size() == p.elements.size());
    CHECK(j.at("elements")[0].at("frac") == "2");
    CHECK(j.at("elements")[0].at("label") == "0");

    KPrefix back = prefix_from_json(j);
    REQUIRE(back.elements.size() == p.elements.size());
    for (size_t i = 0; i < back.elements.size(); ++i) {
        CAPTURE(i);
        REQUIRE(back.elements[i].m == p.elements[i].m);
        REQUIRE(back.elements[i].k == p.elements[i].k);
        REQUIRE(back.elements[i].layer == p.elements[i].layer);
        REQUIRE(ord_cmp(back.elements[i].label, p.elements[i].label) == 0);
    }
    CHECK(to_json(back) == j);
}

TEST_CASE("prefix parse validates numerators") {
    json j;
    j["cutoff"] = "4/9";
    j["layer"] = 0;
    j["completeness_horizon"] = 100;
    j["settle_window"] = 3;
    j["elements"] = json::array();
    j["elements"].push_back({{"label", "0"},
                             {"frac", "36893488147419103232/3"},  // 2^65: numerator overflows
                             {"layer", 0},
                             {"settled", true}});
    CHECK_THROWS_AS(prefix_from_json(j), std::invalid_argument);
}

TEST_CASE("records of a comparison pair stay comparable") {
    // serialize, reload, and diff against the original: nothing may differ
    json j = to_json(prefix5());
    KPrefix back = prefix_from_json(j);
    PrefixDiff d = compare_prefixes(prefix5(), back);
    CHECK(d.only_in_first.empty());
    CHECK(d.only_in_second.empty());
    CHECK_FALSE(d.separated());
}
