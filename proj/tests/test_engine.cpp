#include <doctest.h>

#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "privlab/engine.hpp"
#include "privlab/predicate.hpp"

using namespace privlab;

namespace {

std::set<std::string> finding_ids(const std::vector<ThreatFinding>& findings) {
    std::set<std::string> out;
    for (const auto& f : findings) out.insert(f.threat_id);
    return out;
}

std::set<std::string> all_threat_ids() {
    std::set<std::string> out;
    for (const auto& t : builtin_catalog().threats) out.insert(t.id);
    return out;
}

std::set<std::string> all_strategy_ids() {
    std::set<std::string> out;
    for (const auto& s : builtin_catalog().strategies) out.insert(s.id);
    return out;
}

std::set<std::string> by_status(const ResidualReport& r, ThreatStatus status) {
    std::set<std::string> out;
    for (const auto& f : r.findings) {
        if (f.status == status) out.insert(f.threat_id);
    }
    return out;
}

int rank(ThreatStatus s) {
    switch (s) {
        case ThreatStatus::Open: return 0;
        case ThreatStatus::Minimized: return 1;
        case ThreatStatus::Mitigated: return 2;
    }
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Predicate grammar
// ---------------------------------------------------------------------------

TEST_CASE("predicate atoms evaluate against the model") {
    const SystemModel& m = builtin_gaen_partial();

    CHECK(Predicate::parse("flag(telemetry_default_on)").evaluate(m));
    CHECK_FALSE(Predicate::parse("flag(user_notice_provided)").evaluate(m));
    CHECK(Predicate::parse("not flag(user_notice_provided)").evaluate(m));
    CHECK(Predicate::parse("retention_days = indefinite").evaluate(m));
    CHECK_FALSE(Predicate::parse("retention_days = 14").evaluate(m));
    CHECK(Predicate::parse("retention_days != 14").evaluate(m));
    CHECK(Predicate::parse("architecture = partially-decentralized").evaluate(m));
    CHECK(Predicate::parse("architecture != centralized").evaluate(m));
    CHECK(Predicate::parse("flow-exists(device, key-server, TEK)").evaluate(m));
    CHECK(Predicate::parse("flow-exists(device, *, IP address)").evaluate(m));
    CHECK(Predicate::parse("flow-exists(*, device, *)").evaluate(m));
    CHECK_FALSE(Predicate::parse("flow-exists(device, app-store, *)").evaluate(m));
    CHECK_FALSE(Predicate::parse("flow-exists(device, key-server, name)").evaluate(m));
}

TEST_CASE("predicate combinators and precedence") {
    const SystemModel& m = builtin_gaen_partial();
    CHECK(Predicate::parse(
              "flag(telemetry_default_on) and not flag(user_notice_provided)")
              .evaluate(m));
    CHECK(Predicate::parse("flag(user_notice_provided) or retention_days = indefinite")
              .evaluate(m));
    // "and" binds tighter than "or".
    CHECK(Predicate::parse(
              "flag(user_notice_provided) and flag(user_notice_provided) or "
              "flag(telemetry_default_on)")
              .evaluate(m));
    CHECK_FALSE(Predicate::parse("flag(user_notice_provided) and (flag(user_notice_provided) or "
                                 "flag(telemetry_default_on))")
                    .evaluate(m));
    CHECK(Predicate::parse("not (retention_days = 14)").evaluate(m));
}

TEST_CASE("predicate parse errors") {
    CHECK_THROWS_AS(Predicate::parse("flag(not_a_flag)"), ParseError);
    CHECK_THROWS_AS(Predicate::parse("unknown_field = 3"), ParseError);
    CHECK_THROWS_AS(Predicate::parse("flow-exists(device, key-server)"), ParseError);
    CHECK_THROWS_AS(Predicate::parse("flow-exists(mainframe, *, *)"), ParseError);
    CHECK_THROWS_AS(Predicate::parse("architecture = sideways"), ParseError);
    CHECK_THROWS_AS(Predicate::parse("retention_days = soon"), ParseError);
    CHECK_THROWS_AS(Predicate::parse(""), ParseError);
    CHECK_THROWS_AS(Predicate::parse("flag(telemetry_default_on) and"), ParseError);
    CHECK_THROWS_AS(Predicate::parse("flag(telemetry_default_on) garbage"), ParseError);
}

TEST_CASE("predicate triggers name supporting elements") {
    const SystemModel& m = builtin_gaen_partial();
    CHECK(Predicate::parse("retention_days = indefinite").triggers(m) ==
          std::vector<std::string>{"retention_days"});
    CHECK(Predicate::parse("not flag(user_notice_provided)").triggers(m) ==
          std::vector<std::string>{"user_notice_provided"});
    const auto flow_triggers = Predicate::parse("flow-exists(device, device, pseudonyms)").triggers(m);
    CHECK(flow_triggers == std::vector<std::string>{"f-broadcast"});
}

// ---------------------------------------------------------------------------
// Threat enumeration
// ---------------------------------------------------------------------------

TEST_CASE("default model triggers every built-in threat") {
    const auto findings = enumerate_threats(builtin_gaen_partial(), builtin_catalog());
    CHECK(finding_ids(findings) == all_threat_ids());
    for (const auto& f : findings) CHECK(f.status == ThreatStatus::Open);
}

TEST_CASE("per-flag model variants drop their threat") {
    SystemModel m = builtin_gaen_partial();
    m.telemetry_default_on = false;
    auto ids = finding_ids(enumerate_threats(m, builtin_catalog()));
    CHECK(ids.count("DD002") == 0);
    auto expected = all_threat_ids();
    expected.erase("DD002");
    CHECK(ids == expected);

    SystemModel m2 = builtin_gaen_partial();
    m2.retention_days = 14;
    auto ids2 = finding_ids(enumerate_threats(m2, builtin_catalog()));
    CHECK(ids2.count("DD003") == 0);

    SystemModel m3 = builtin_gaen_partial();
    m3.user_notice_provided = true;
    CHECK(finding_ids(enumerate_threats(m3, builtin_catalog())).count("CA004") == 0);

    SystemModel m4 = builtin_gaen_partial();
    m4.consent_withdrawal_supported = true;
    m4.per_function_consent = true;
    CHECK(finding_ids(enumerate_threats(m4, builtin_catalog())).count("CA002") == 0);
}

TEST_CASE("enumerate_threats equals brute-force predicate evaluation") {
    const Catalog& catalog = builtin_catalog();
    std::vector<SystemModel> variants;
    variants.push_back(builtin_gaen_partial());
    {
        SystemModel m = builtin_gaen_partial();
        m.retention_days = 14;
        m.telemetry_default_on = false;
        variants.push_back(m);
    }
    {
        SystemModel m = builtin_gaen_partial();
        m.flows.erase(m.flows.begin());  // drop the broadcast flow
        variants.push_back(m);
    }
    {
        SystemModel m = builtin_gaen_partial();
        m.consent_withdrawal_supported = true;
        m.per_function_consent = true;
        m.user_notice_provided = true;
        variants.push_back(m);
    }
    for (const auto& m : variants) {
        std::set<std::string> oracle;
        for (const auto& t : catalog.threats) {
            if (Predicate::parse(t.applicability).evaluate(m)) oracle.insert(t.id);
        }
        CHECK(finding_ids(enumerate_threats(m, catalog)) == oracle);
    }
}

TEST_CASE("findings carry their triggering elements") {
    const auto findings = enumerate_threats(builtin_gaen_partial(), builtin_catalog());
    for (const auto& f : findings) {
        if (f.threat_id == "DD003") {
            CHECK(f.triggered_by == std::vector<std::string>{"retention_days"});
        }
        if (f.threat_id == "EV004") {
            CHECK(f.triggered_by == std::vector<std::string>{"f-broadcast"});
        }
        if (f.threat_id == "ST004") {
            CHECK(f.triggered_by == std::vector<std::string>{"f-tan-request"});
        }
    }
}

TEST_CASE("broken predicate surfaces as a catalog error") {
    Catalog broken = builtin_catalog();
    broken.threats[0].applicability = "flag(no_such_flag)";
    CHECK_THROWS_AS(enumerate_threats(builtin_gaen_partial(), broken), Error);
}

// ---------------------------------------------------------------------------
// Mitigation application
// ---------------------------------------------------------------------------

TEST_CASE("all thirteen strategies yield the published residual partition") {
    const auto findings = enumerate_threats(builtin_gaen_partial(), builtin_catalog());
    const ResidualReport r = apply_mitigations(findings, all_strategy_ids(), builtin_catalog());

    CHECK(by_status(r, ThreatStatus::Mitigated) ==
          std::set<std::string>{"CA004", "DD002", "DD003", "EV001", "EV004", "ST004"});
    CHECK(by_status(r, ThreatStatus::Minimized) ==
          std::set<std::string>{"CA001", "CA002", "CA003", "DD001", "EV002", "EV003", "ST001",
                                "ST002"});
    CHECK(by_status(r, ThreatStatus::Open) == std::set<std::string>{"ST003"});
}

TEST_CASE("empty strategy set leaves every finding open") {
    const auto findings = enumerate_threats(builtin_gaen_partial(), builtin_catalog());
    const ResidualReport r = apply_mitigations(findings, {}, builtin_catalog());
    CHECK(by_status(r, ThreatStatus::Open) == all_threat_ids());
}

TEST_CASE("ssl-certificates alone mitigates EV001 and nothing else") {
    const auto findings = enumerate_threats(builtin_gaen_partial(), builtin_catalog());
    const ResidualReport r = apply_mitigations(findings, {"ssl-certificates"}, builtin_catalog());
    CHECK(by_status(r, ThreatStatus::Mitigated) == std::set<std::string>{"EV001"});
    CHECK(by_status(r, ThreatStatus::Minimized).empty());
    auto open = all_threat_ids();
    open.erase("EV001");
    CHECK(by_status(r, ThreatStatus::Open) == open);
}

TEST_CASE("unknown strategy id raises not-found") {
    const auto findings = enumerate_threats(builtin_gaen_partial(), builtin_catalog());
    CHECK_THROWS_AS(apply_mitigations(findings, {"upgrade-everything"}, builtin_catalog()),
                    NotFoundError);
}

TEST_CASE("adding a strategy never worsens any finding (monotonicity)") {
    const Catalog& catalog = builtin_catalog();
    const auto findings = enumerate_threats(builtin_gaen_partial(), catalog);
    const std::set<std::string> id_set = all_strategy_ids();
    const std::vector<std::string> ids(id_set.begin(), id_set.end());
    std::mt19937 gen(99);
    for (int round = 0; round < 60; ++round) {
        std::set<std::string> subset;
        for (const auto& id : ids) {
            if (gen() % 2) subset.insert(id);
        }
        const std::string extra = ids[gen() % ids.size()];
        std::set<std::string> superset = subset;
        superset.insert(extra);

        const ResidualReport before = apply_mitigations(findings, subset, catalog);
        const ResidualReport after = apply_mitigations(findings, superset, catalog);
        REQUIRE(before.findings.size() == after.findings.size());
        for (std::size_t i = 0; i < before.findings.size(); ++i) {
            CHECK(rank(after.findings[i].status) >= rank(before.findings[i].status));
        }
    }
}

TEST_CASE("applying the same profile twice equals applying once (idempotence)") {
    const Catalog& catalog = builtin_catalog();
    const auto findings = enumerate_threats(builtin_gaen_partial(), catalog);
    std::mt19937 gen(7);
    const std::set<std::string> id_set = all_strategy_ids();
    const std::vector<std::string> ids(id_set.begin(), id_set.end());
    for (int round = 0; round < 20; ++round) {
        std::set<std::string> subset;
        for (const auto& id : ids) {
            if (gen() % 2) subset.insert(id);
        }
        const ResidualReport once = apply_mitigations(findings, subset, catalog);
        const ResidualReport twice = apply_mitigations(once.findings, subset, catalog);
        CHECK(once.findings == twice.findings);
    }
}

// ---------------------------------------------------------------------------
// Principle audit
// ---------------------------------------------------------------------------

TEST_CASE("principle audit on a compliant model is empty") {
    SystemModel m = builtin_gaen_partial();
    m.retention_days = 14;
    m.consent_withdrawal_supported = true;
    m.per_function_consent = true;
    m.user_notice_provided = true;
    CHECK(principle_audit(m, builtin_catalog()).empty());
}

TEST_CASE("indefinite retention violates the data-retention principle") {
    SystemModel m = builtin_gaen_partial();
    m.consent_withdrawal_supported = true;
    m.per_function_consent = true;
    m.user_notice_provided = true;
    const auto violations = principle_audit(m, builtin_catalog());
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].principle == PrincipleName::DataRetention);
}

TEST_CASE("missing consent withdrawal violates informed-consent and triggers CA002") {
    SystemModel m = builtin_gaen_partial();
    m.retention_days = 14;
    m.per_function_consent = true;
    m.user_notice_provided = true;
    m.consent_withdrawal_supported = false;
    const auto violations = principle_audit(m, builtin_catalog());
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].principle == PrincipleName::InformedConsent);
    CHECK(finding_ids(enumerate_threats(m, builtin_catalog())).count("CA002") == 1);
}

// ---------------------------------------------------------------------------
// Coverage matrix
// ---------------------------------------------------------------------------

TEST_CASE("coverage matrix layout and totals") {
    const CoverageMatrix m = coverage_matrix(builtin_catalog());
    CHECK(m.strategy_ids.size() == 13);
    CHECK(m.threat_ids.size() == 15);

    std::size_t cells = 0;
    for (const auto& row : m.cells) cells += row.size();
    CHECK(cells == 13 * 15);

    // ST003 column: all none.
    for (const auto& strategy : m.strategy_ids) {
        CHECK(m.cell(strategy, "ST003") == MitigationEffect::None);
    }
    const auto st003_col = std::find(m.threat_ids.begin(), m.threat_ids.end(), "ST003");
    CHECK(m.col_totals[st003_col - m.threat_ids.begin()] == 0);

    // inform row: exactly one non-none cell, (CA004, mitigates).
    const auto inform_row = std::find(m.strategy_ids.begin(), m.strategy_ids.end(), "inform");
    CHECK(m.row_totals[inform_row - m.strategy_ids.begin()] == 1);
    CHECK(m.cell("inform", "CA004") == MitigationEffect::Mitigates);

    // Empty rows for the organizational-only strategies.
    for (const char* id : {"visibility", "regulation"}) {
        const auto row = std::find(m.strategy_ids.begin(), m.strategy_ids.end(), id);
        CHECK(m.row_totals[row - m.strategy_ids.begin()] == 0);
    }
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

TEST_CASE("markdown rendering covers every finding and its status") {
    const ResidualReport r = analyze_model(builtin_gaen_partial(), builtin_catalog(),
                                           all_strategy_ids(), "<builtin:gaen-partial>");
    const std::string md = residual_report_markdown(r, builtin_catalog());
    for (const auto& f : r.findings) {
        CHECK(md.find(f.threat_id) != std::string::npos);
    }
    CHECK(md.find("| ST003 |") != std::string::npos);
    CHECK(md.find("open") != std::string::npos);
    CHECK(md.find("integrity compromise, misattribution, exclusion") != std::string::npos);
}
