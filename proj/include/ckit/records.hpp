#pragma once

#include <json.hpp>

#include "compact.hpp"
#include "frac3.hpp"
#include "ordinal.hpp"

/*
 * Stable JSON shapes for the two record types other tools consume.  Field
 * names and value encodings are part of the interface: fractions and
 * ordinal labels travel as their canonical text forms, never as floats.
 */

namespace ckit {

using nlohmann::json;

inline json to_json(const Section& s) {
    json j;
    j["beta"] = to_string(s.beta);
    j["u"] = s.u;
    j["limit"] = to_string(s.limit);
    j["upper"] = s.upper ? json(to_string(*s.upper)) : json(nullptr);
    j["members"] = json::array();
    for (const SectionMember& m : s.members) {
        json e;
        e["frac"] = to_string(m.elem.frac);
        e["sporadic"] = m.sporadic;
        e["settled"] = m.elem.settled;
        if (m.origin)
            e["origin"] = {{"a", m.origin->a}, {"b", m.origin->b}, {"r", m.origin->r}};
        else
            e["origin"] = nullptr;
        j["members"].push_back(std::move(e));
    }
    j["families"] = json::array();
    for (const FamilyGen& g : s.families)
        j["families"].push_back({{"a", g.a},
                                 {"b", g.b},
                                 {"v", g.v},
                                 {"offset", g.offset()},
                                 {"tail", emit_family_tail(g)}});
    return j;
}

inline Section section_from_json(const json& j) {
    Section s;
    s.beta = parse_ordinal(j.at("beta").get<std::string>());
    s.u = j.at("u").get<unsigned>();
    s.limit = parse_frac3(j.at("limit").get<std::string>());
    if (!j.at("upper").is_null()) s.upper = parse_frac3(j.at("upper").get<std::string>());
    for (const json& e : j.at("members")) {
        SectionMember m;
        m.elem.frac = parse_frac3(e.at("frac").get<std::string>());
        m.elem.u = s.u;
        m.elem.settled = e.at("settled").get<bool>();
        m.sporadic = e.at("sporadic").get<bool>();
        if (!e.at("origin").is_null()) {
            Origin o;
            o.a = e.at("origin").at("a").get<uint64_t>();
            o.b = e.at("origin").at("b").get<uint64_t>();
            o.r = e.at("origin").at("r").get<unsigned>();
            m.origin = o;
        }
        s.members.push_back(std::move(m));
    }
    unsigned eps = s.u == 2 ? 1 : 0;
    for (const json& e : j.at("families")) {
        FamilyGen g;
        g.a = e.at("a").get<uint64_t>();
        g.b = e.at("b").get<uint64_t>();
        g.v = e.at("v").get<unsigned>();
        g.n = g.a * g.b;
        g.epsilon = eps;
        g.k = s.limit.k - eps;
        s.families.push_back(g);
    }
    return s;
}

inline json to_json(const KPrefix& p) {
    json j;
    j["cutoff"] = to_string(p.cutoff);
    j["layer"] = p.layer;
    j["completeness_horizon"] = p.completeness_horizon;
    j["settle_window"] = p.settle_window;
    j["elements"] = json::array();
    for (const PrefixElement& e : p.elements)
        j["elements"].push_back({{"label", to_string(e.label)},
                                 {"frac", to_string(e.frac())},
                                 {"layer", e.layer},
                                 {"settled", e.settled}});
    return j;
}

inline KPrefix prefix_from_json(const json& j) {
    KPrefix p;
    p.cutoff = parse_frac3(j.at("cutoff").get<std::string>());
    p.layer = j.at("layer").get<unsigned>();
    p.completeness_horizon = j.at("completeness_horizon").get<uint64_t>();
    p.settle_window = j.at("settle_window").get<unsigned>();
    for (const json& e : j.at("elements")) {
        PrefixElement x;
        Frac3 f = parse_frac3(e.at("frac").get<std::string>());
        if (f.m > std::numeric_limits<uint64_t>::max())
            throw std::invalid_argument("prefix_from_json: numerator out of range");
        x.m = uint64_t(f.m);
        x.k = f.k;
        x.layer = e.at("layer").get<unsigned>();
        x.settled = e.at("settled").get<bool>();
        x.label = parse_ordinal(e.at("label").get<std::string>());
        p.elements.push_back(std::move(x));
    }
    return p;
}

}  // namespace ckit
