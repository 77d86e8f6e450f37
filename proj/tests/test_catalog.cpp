#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "golden_catalog.hpp"
#include "privlab/catalog.hpp"

using namespace privlab;
using nlohmann::json;

TEST_CASE("built-in catalog matches golden transcription cell for cell") {
    const auto mismatches = golden::fidelity_mismatches(builtin_catalog());
    for (const auto& m : mismatches) MESSAGE(m);
    CHECK(mismatches.empty());
}

TEST_CASE("built-in catalog spot checks") {
    const Catalog& c = builtin_catalog();
    CHECK(c.threats.size() == 15);

    const ThreatEntry& ca001 = c.threat("CA001");
    CHECK(ca001.goals == std::vector<ThreatCategory>{ThreatCategory::StoredDataCompromise,
                                                     ThreatCategory::Identification});

    const MitigationStrategy& hmac = c.strategy("hmac-enhancements");
    std::set<std::pair<std::string, std::string>> addressed;
    for (const auto& a : hmac.addresses) addressed.insert({a.threat_id, to_string(a.effect)});
    CHECK(addressed == std::set<std::pair<std::string, std::string>>{{"EV002", "minimizes"},
                                                                     {"EV003", "minimizes"},
                                                                     {"ST002", "minimizes"},
                                                                     {"ST001", "minimizes"}});
}

TEST_CASE("mitigations_for") {
    const Catalog& c = builtin_catalog();

    CHECK(mitigations_for(c, "ST003").empty());

    const auto ev004 = mitigations_for(c, "EV004");
    REQUIRE(ev004.size() == 1);
    CHECK(ev004[0].first->id == "keep-components-current");
    CHECK(ev004[0].second == MitigationEffect::Mitigates);

    const auto ca004 = mitigations_for(c, "CA004");
    REQUIRE(ca004.size() == 1);
    CHECK(ca004[0].first->id == "inform");
    CHECK(ca004[0].second == MitigationEffect::Mitigates);

    CHECK_THROWS_AS(mitigations_for(c, "ZZ999"), NotFoundError);
}

TEST_CASE("threats_for_capability groups") {
    const Catalog& c = builtin_catalog();
    auto ids = [](const std::vector<const ThreatEntry*>& ts) {
        std::vector<std::string> out;
        for (const auto* t : ts) out.push_back(t->id);
        return out;
    };

    CHECK(ids(threats_for_capability(c, AttackerCapability::Coercion)) ==
          std::vector<std::string>{"CA001", "CA002", "CA003", "CA004"});
    CHECK(ids(threats_for_capability(c, AttackerCapability::Eavesdropping)) ==
          std::vector<std::string>{"EV001", "EV002", "EV003", "EV004"});
    CHECK(ids(threats_for_capability(c, AttackerCapability::DataDisclosure)) ==
          std::vector<std::string>{"DD001", "DD002", "DD003"});
    // Replay, spoofing and tampering all resolve to the combined ST group.
    const std::vector<std::string> st{"ST001", "ST002", "ST003", "ST004"};
    CHECK(ids(threats_for_capability(c, AttackerCapability::Replay)) == st);
    CHECK(ids(threats_for_capability(c, AttackerCapability::Spoofing)) == st);
    CHECK(ids(threats_for_capability(c, AttackerCapability::Tampering)) == st);
}

TEST_CASE("every threat belongs to exactly one capability group") {
    const Catalog& c = builtin_catalog();
    std::map<std::string, int> seen;
    for (ThreatGroup g : {ThreatGroup::Coercion, ThreatGroup::DataDisclosure,
                          ThreatGroup::Eavesdropping, ThreatGroup::SpoofTraceReplay}) {
        for (const auto& t : c.threats) {
            if (t.group() == g) ++seen[t.id];
        }
    }
    CHECK(seen.size() == c.threats.size());
    for (const auto& [id, count] : seen) CHECK(count == 1);
}

TEST_CASE("effect dominance: best effect is mitigates iff any mapping is unasterisked") {
    const Catalog& c = builtin_catalog();
    for (const auto& t : c.threats) {
        const auto mappings = mitigations_for(c, t.id);
        MitigationEffect expected = MitigationEffect::None;
        for (const auto& [strategy, effect] : mappings) expected = std::max(expected, effect);
        CHECK(best_effect(c, t.id) == expected);
    }
    // Concrete anchors: ST004 has a mixed pair, ST001 only asterisked rows.
    CHECK(best_effect(c, "ST004") == MitigationEffect::Mitigates);
    CHECK(best_effect(c, "ST001") == MitigationEffect::Minimizes);
    CHECK(best_effect(c, "ST003") == MitigationEffect::None);
}

TEST_CASE("serialize then load is the identity") {
    const Catalog& c = builtin_catalog();
    const Catalog reloaded = load_catalog(serialize_catalog(c).dump());
    CHECK(reloaded == c);
}

TEST_CASE("load rejects dangling strategy references") {
    json doc = serialize_catalog(builtin_catalog());
    doc["strategies"][0]["addresses"].push_back({{"threat", "ZZ999"}, {"effect", "mitigates"}});
    try {
        load_catalog(doc);
        FAIL("expected ReferenceError");
    } catch (const ReferenceError& e) {
        CHECK(std::string(e.what()).find("ZZ999") != std::string::npos);
    }
}

TEST_CASE("load rejects a threat without goals") {
    json doc = serialize_catalog(builtin_catalog());
    doc["threats"][2].erase("goals");
    try {
        load_catalog(doc);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.path().find("threats[2]") != std::string::npos);
    }

    // Present but empty violates the non-empty-set invariant the same way.
    json doc2 = serialize_catalog(builtin_catalog());
    doc2["threats"][2]["goals"] = json::array();
    CHECK_THROWS_AS(load_catalog(doc2), ParseError);
}

TEST_CASE("load rejects vocabulary extensions unless flagged") {
    json doc = serialize_catalog(builtin_catalog());
    doc["categories"].push_back("price-discrimination");
    CHECK_THROWS_AS(load_catalog(doc), ParseError);

    doc["allow_extensions"] = true;
    const Catalog c = load_catalog(doc);  // unknown categories tolerated
    CHECK(c.allow_extensions);
}

TEST_CASE("load rejects duplicate ids and malformed ids") {
    json doc = serialize_catalog(builtin_catalog());
    doc["threats"][1]["id"] = "CA001";
    CHECK_THROWS_AS(load_catalog(doc), ParseError);

    json doc2 = serialize_catalog(builtin_catalog());
    doc2["threats"][0]["id"] = "XX01";
    CHECK_THROWS_AS(load_catalog(doc2), ParseError);
}

TEST_CASE("load rejects a toggle bound by two strategies") {
    json doc = serialize_catalog(builtin_catalog());
    doc["strategies"][3]["sim_toggles"] = json::array({"hmac_tags"});  // already owned
    CHECK_THROWS_AS(load_catalog(doc), ParseError);
}

TEST_CASE("each simulation toggle is bound by exactly one built-in strategy") {
    const Catalog& c = builtin_catalog();
    std::map<std::string, int> owners;
    for (const auto& s : c.strategies) {
        for (const auto& toggle : s.sim_toggles) ++owners[toggle];
    }
    for (const auto& name : known_sim_toggle_names()) {
        INFO("toggle ", name);
        CHECK(owners[name] == 1);
    }
}

TEST_CASE("policy-level strategies have no simulation toggles") {
    const Catalog& c = builtin_catalog();
    for (const char* id : {"inform", "control", "visibility", "regulation",
                           "reference-architecture-adoption", "security-assessment"}) {
        CHECK(c.strategy(id).sim_toggles.empty());
    }
}
