#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "privlab/model.hpp"

using namespace privlab;
using nlohmann::json;

namespace {

json minimal_decentralized() {
    return json{
        {"tptm_model_version", 1},
        {"name", "minimal"},
        {"architecture", "decentralized"},
        {"nodes",
         json::array({{{"id", "dev"}, {"role", "device"}, {"operator", "data-subject"}},
                      {{"id", "srv"}, {"role", "key-server"}, {"operator", "controller"}}})},
        {"flows", json::array({{{"id", "f1"},
                                {"from", "dev"},
                                {"to", "srv"},
                                {"identifiers", json::array({"TEK"})},
                                {"encrypted", true},
                                {"metadata_exposed", json::array()}}})},
        {"retention_days", 14},
        {"consent_withdrawal_supported", true},
        {"per_function_consent", true},
        {"user_notice_provided", true},
        {"data_minimization", true},
        {"processing_separated", true},
        {"perturbation_applied", false},
        {"telemetry_default_on", false},
    };
}

}  // namespace

TEST_CASE("minimal decentralized model parses") {
    const SystemModel m = parse_model(minimal_decentralized().dump(), builtin_catalog());
    CHECK(m.architecture == ArchitectureKind::Decentralized);
    CHECK(m.nodes.size() == 2);
    CHECK(m.flows.size() == 1);
    CHECK(m.retention_days == 14);
    CHECK(validate_model(m).empty());
}

TEST_CASE("dangling node reference is reported with the offending id") {
    json doc = minimal_decentralized();
    doc["flows"][0]["to"] = "srvX";
    try {
        parse_model(doc.dump(), builtin_catalog());
        FAIL("expected ReferenceError");
    } catch (const ReferenceError& e) {
        CHECK(std::string(e.what()).find("srvX") != std::string::npos);
    }
}

TEST_CASE("unknown identifier name is a parse error with path") {
    json doc = minimal_decentralized();
    doc["flows"][0]["identifiers"] = json::array({"social graph"});
    try {
        parse_model(doc.dump(), builtin_catalog());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.path().find("flows[0]") != std::string::npos);
    }
}

TEST_CASE("schema violations carry paths") {
    json doc = minimal_decentralized();
    doc.erase("retention_days");
    CHECK_THROWS_AS(parse_model(doc.dump(), builtin_catalog()), ParseError);

    json doc2 = minimal_decentralized();
    doc2["retention_days"] = 0;
    CHECK_THROWS_AS(parse_model(doc2.dump(), builtin_catalog()), ParseError);

    json doc3 = minimal_decentralized();
    doc3["nodes"][0]["role"] = "mainframe";
    CHECK_THROWS_AS(parse_model(doc3.dump(), builtin_catalog()), ParseError);

    CHECK_THROWS_AS(parse_model(std::string("not json"), builtin_catalog()), ParseError);
}

TEST_CASE("serialize then parse is the identity") {
    const SystemModel& m = builtin_gaen_partial();
    const SystemModel reparsed =
        parse_model(serialize_model(m).dump(), builtin_catalog());
    CHECK(reparsed == m);
}

TEST_CASE("serialize/parse identity on randomized models") {
    const Catalog& catalog = builtin_catalog();
    std::mt19937 gen(20240817);
    for (int round = 0; round < 25; ++round) {
        SystemModel m;
        m.name = "random-" + std::to_string(round);
        m.architecture = static_cast<ArchitectureKind>(gen() % 3);
        const int node_count = 2 + static_cast<int>(gen() % 4);
        const std::vector<NodeRole> roles{NodeRole::Device, NodeRole::KeyServer,
                                          NodeRole::AppBackend, NodeRole::TelemetrySink,
                                          NodeRole::VerificationServer};
        for (int i = 0; i < node_count; ++i) {
            m.nodes.push_back(ModelNode{"n" + std::to_string(i), roles[gen() % roles.size()],
                                        static_cast<OperatorRole>(gen() % 3)});
        }
        const int flow_count = static_cast<int>(gen() % 5);
        for (int i = 0; i < flow_count; ++i) {
            InformationFlow f;
            f.id = "f" + std::to_string(i);
            f.from = m.nodes[gen() % m.nodes.size()].id;
            f.to = m.nodes[gen() % m.nodes.size()].id;
            f.identifiers.push_back(catalog.identifiers[gen() % catalog.identifiers.size()].name);
            f.encrypted = (gen() % 2) == 0;
            if (gen() % 2) {
                f.metadata_exposed.push_back(
                    catalog.identifiers[gen() % catalog.identifiers.size()].name);
            }
            m.flows.push_back(std::move(f));
        }
        if (gen() % 2) m.retention_days = 1 + static_cast<int>(gen() % 30);
        m.consent_withdrawal_supported = gen() % 2;
        m.per_function_consent = gen() % 2;
        m.user_notice_provided = gen() % 2;
        m.data_minimization = gen() % 2;
        m.processing_separated = gen() % 2;
        m.perturbation_applied = gen() % 2;
        m.telemetry_default_on = gen() % 2;

        CHECK(parse_model(serialize_model(m).dump(), catalog) == m);
    }
}

TEST_CASE("validate_model flags contact history flowing to a controller") {
    json doc = minimal_decentralized();
    doc["flows"][0]["identifiers"] = json::array({"exposure details"});
    const SystemModel m = parse_model(doc.dump(), builtin_catalog());
    const auto violations = validate_model(m);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].code == "contact-history-exposure");
    CHECK(violations[0].subject == "f1");

    // Processor-operated sinks are outside the decentralized constraint.
    json doc2 = minimal_decentralized();
    doc2["flows"][0]["identifiers"] = json::array({"exposure details"});
    doc2["nodes"][1]["operator"] = "processor";
    CHECK(validate_model(parse_model(doc2.dump(), builtin_catalog())).empty());
}

TEST_CASE("validate_model requires device-to-server connectivity when not decentralized") {
    json doc = minimal_decentralized();
    doc["architecture"] = "centralized";
    doc["flows"] = json::array();
    const SystemModel m = parse_model(doc.dump(), builtin_catalog());
    const auto violations = validate_model(m);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].code == "connectivity");
}

TEST_CASE("built-in gaen-partial model is violation free") {
    CHECK(validate_model(builtin_gaen_partial()).empty());
}

TEST_CASE("validate_model is pure") {
    const SystemModel& m = builtin_gaen_partial();
    CHECK(validate_model(m) == validate_model(m));
}

TEST_CASE("flows_carrying") {
    const SystemModel& m = builtin_gaen_partial();
    const Catalog& c = builtin_catalog();

    auto tek_flows = flows_carrying(m, c, "TEK");
    std::vector<std::string> ids;
    for (const auto* f : tek_flows) ids.push_back(f->id);
    CHECK(ids == std::vector<std::string>{"f-key-upload", "f-key-download"});

    CHECK(flows_carrying(m, c, "name").empty());
    CHECK_THROWS_AS(flows_carrying(m, c, "no such identifier"), NotFoundError);
}

TEST_CASE("flows_carrying equals brute-force filter for every identifier") {
    const SystemModel& m = builtin_gaen_partial();
    const Catalog& c = builtin_catalog();
    for (const auto& ident : c.identifiers) {
        std::vector<const InformationFlow*> expected;
        for (const auto& f : m.flows) {
            bool carries = false;
            for (const auto& i : f.identifiers) carries = carries || i == ident.name;
            for (const auto& i : f.metadata_exposed) carries = carries || i == ident.name;
            if (carries) expected.push_back(&f);
        }
        CHECK(flows_carrying(m, c, ident.name) == expected);
    }
}

TEST_CASE("shipped gaen_partial.json equals the built-in model") {
    const std::string path = std::string(PRIVLAB_DATA_DIR) + "/models/gaen_partial.json";
    const SystemModel from_file = parse_model(read_file(path), builtin_catalog());
    CHECK(from_file == builtin_gaen_partial());
}
