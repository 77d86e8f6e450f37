#include "privlab/engine.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "privlab/predicate.hpp"

namespace privlab {

using nlohmann::json;

std::string to_string(ThreatStatus s) {
    switch (s) {
        case ThreatStatus::Open: return "open";
        case ThreatStatus::Minimized: return "minimized";
        case ThreatStatus::Mitigated: return "mitigated";
    }
    return "open";
}

ThreatStatus threat_status_from_string(const std::string& s) {
    if (s == "open") return ThreatStatus::Open;
    if (s == "minimized") return ThreatStatus::Minimized;
    if (s == "mitigated") return ThreatStatus::Mitigated;
    throw ParseError("", "unknown threat status: \"" + s + "\"");
}

const ThreatFinding* ResidualReport::find(const std::string& threat_id) const {
    for (const auto& f : findings) {
        if (f.threat_id == threat_id) return &f;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Threat enumeration
// ---------------------------------------------------------------------------

std::vector<ThreatFinding> enumerate_threats(const SystemModel& model, const Catalog& catalog) {
    std::vector<ThreatFinding> findings;
    for (const auto& threat : catalog.threats) {
        ThreatFinding f;
        f.threat_id = threat.id;
        if (threat.applicability.empty()) {
            // No predicate: the threat applies unconditionally.
        } else {
            Predicate pred = [&] {
                try {
                    return Predicate::parse(threat.applicability);
                } catch (const Error& e) {
                    throw Error("catalog error: threat " + threat.id + ": " + e.what());
                }
            }();
            if (!pred.evaluate(model)) continue;
            f.triggered_by = pred.triggers(model);
        }
        for (const auto& ident : threat.identifiers) f.exposed_identifiers.push_back(ident.name);
        f.status = ThreatStatus::Open;
        findings.push_back(std::move(f));
    }
    return findings;
}

// ---------------------------------------------------------------------------
// Mitigation application
// ---------------------------------------------------------------------------

namespace {

ThreatStatus status_for_effect(MitigationEffect e) {
    switch (e) {
        case MitigationEffect::Mitigates: return ThreatStatus::Mitigated;
        case MitigationEffect::Minimizes: return ThreatStatus::Minimized;
        case MitigationEffect::None: return ThreatStatus::Open;
    }
    return ThreatStatus::Open;
}

}  // namespace

ResidualReport apply_mitigations(std::vector<ThreatFinding> findings,
                                 const std::set<std::string>& strategy_ids,
                                 const Catalog& catalog) {
    for (const auto& id : strategy_ids) {
        catalog.strategy(id);  // throws NotFoundError on unknown ids
    }

    for (auto& finding : findings) {
        MitigationEffect best = MitigationEffect::None;
        for (const auto& id : strategy_ids) {
            const MitigationStrategy& s = catalog.strategy(id);
            for (const auto& a : s.addresses) {
                if (a.threat_id == finding.threat_id) best = std::max(best, a.effect);
            }
        }
        finding.status = status_for_effect(best);
    }

    ResidualReport report;
    report.profile.assign(strategy_ids.begin(), strategy_ids.end());
    report.findings = std::move(findings);
    return report;
}

// ---------------------------------------------------------------------------
// Principle audit
// ---------------------------------------------------------------------------

std::vector<PrincipleViolation> principle_audit(const SystemModel& model, const Catalog& catalog) {
    std::vector<PrincipleViolation> out;
    for (const auto& principle : catalog.principles) {
        if (principle.audit_rule.empty()) continue;  // not machine-auditable, always passes
        Predicate rule = Predicate::parse(principle.audit_rule);
        if (rule.evaluate(model)) continue;
        PrincipleViolation v;
        v.principle = principle.name;
        v.message = "audit rule failed: " + principle.audit_rule;
        // Elements responsible for the failure (rule evaluated false).
        v.triggered_by = rule.triggers(model);
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coverage matrix
// ---------------------------------------------------------------------------

MitigationEffect CoverageMatrix::cell(const std::string& strategy_id,
                                      const std::string& threat_id) const {
    auto row = std::find(strategy_ids.begin(), strategy_ids.end(), strategy_id);
    auto col = std::find(threat_ids.begin(), threat_ids.end(), threat_id);
    if (row == strategy_ids.end() || col == threat_ids.end()) {
        throw NotFoundError("coverage matrix has no cell (" + strategy_id + ", " + threat_id + ")");
    }
    return cells[row - strategy_ids.begin()][col - threat_ids.begin()];
}

CoverageMatrix coverage_matrix(const Catalog& catalog) {
    CoverageMatrix m;
    for (const auto& s : catalog.strategies) m.strategy_ids.push_back(s.id);
    for (const auto& t : catalog.threats) m.threat_ids.push_back(t.id);
    m.cells.assign(m.strategy_ids.size(),
                   std::vector<MitigationEffect>(m.threat_ids.size(), MitigationEffect::None));
    for (std::size_t r = 0; r < catalog.strategies.size(); ++r) {
        for (const auto& a : catalog.strategies[r].addresses) {
            auto col = std::find(m.threat_ids.begin(), m.threat_ids.end(), a.threat_id);
            m.cells[r][col - m.threat_ids.begin()] =
                std::max(m.cells[r][col - m.threat_ids.begin()], a.effect);
        }
    }
    m.row_totals.assign(m.strategy_ids.size(), 0);
    m.col_totals.assign(m.threat_ids.size(), 0);
    for (std::size_t r = 0; r < m.cells.size(); ++r) {
        for (std::size_t c = 0; c < m.cells[r].size(); ++c) {
            if (m.cells[r][c] != MitigationEffect::None) {
                ++m.row_totals[r];
                ++m.col_totals[c];
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Composition + rendering
// ---------------------------------------------------------------------------

ResidualReport analyze_model(const SystemModel& model, const Catalog& catalog,
                             const std::set<std::string>& strategy_ids,
                             const std::string& model_ref) {
    ResidualReport report = apply_mitigations(enumerate_threats(model, catalog), strategy_ids, catalog);
    report.model_ref = model_ref;
    report.principle_violations = principle_audit(model, catalog);
    return report;
}

nlohmann::json residual_report_json(const ResidualReport& report) {
    json doc;
    doc["tptm_report_version"] = kReportSchemaVersion;
    doc["model_ref"] = report.model_ref;
    doc["profile"] = report.profile;
    json findings = json::array();
    for (const auto& f : report.findings) {
        findings.push_back({{"threat_id", f.threat_id},
                            {"triggered_by", f.triggered_by},
                            {"exposed_identifiers", f.exposed_identifiers},
                            {"status", to_string(f.status)}});
    }
    doc["findings"] = findings;
    json violations = json::array();
    for (const auto& v : report.principle_violations) {
        violations.push_back({{"principle", to_string(v.principle)},
                              {"message", v.message},
                              {"triggered_by", v.triggered_by}});
    }
    doc["principle_violations"] = violations;
    return doc;
}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

std::string residual_report_markdown(const ResidualReport& report, const Catalog& catalog) {
    std::ostringstream md;
    md << "# Residual threat report\n\n";
    md << "Model: `" << report.model_ref << "`\n\n";
    if (report.profile.empty()) {
        md << "Mitigation profile: (none)\n\n";
    } else {
        md << "Mitigation profile: " << join(report.profile, ", ") << "\n\n";
    }

    md << "| ID | Goals | Attackers | Identifiers | Details | Status |\n";
    md << "|----|-------|-----------|-------------|---------|--------|\n";
    for (const auto& f : report.findings) {
        const ThreatEntry& t = catalog.threat(f.threat_id);
        std::vector<std::string> goals;
        for (auto g : t.goals) goals.push_back(display_name(g));
        std::vector<std::string> idents;
        for (const auto& i : t.identifiers) {
            idents.push_back(i.name + " (" +
                             (i.kind_as_cited == IdentifierKind::Direct ? "D" : "I") + ")");
        }
        md << "| " << t.id << " | " << join(goals, ", ") << " | " << join(t.attackers, ", ")
           << " | " << join(idents, ", ") << " | " << t.details << " | " << to_string(f.status)
           << " |\n";
    }

    md << "\n## Principle audit\n\n";
    if (report.principle_violations.empty()) {
        md << "No principle violations.\n";
    } else {
        for (const auto& v : report.principle_violations) {
            md << "- **" << to_string(v.principle) << "**: " << v.message;
            if (!v.triggered_by.empty()) md << " (" << join(v.triggered_by, ", ") << ")";
            md << "\n";
        }
    }

    std::vector<std::string> unauditable;
    for (const auto& p : catalog.principles) {
        if (p.audit_rule.empty()) unauditable.push_back(to_string(p.name));
    }
    if (!unauditable.empty()) {
        md << "\nNot machine-auditable (always pass): " << join(unauditable, ", ") << "\n";
    }
    return md.str();
}

}  // namespace privlab
