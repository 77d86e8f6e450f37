#pragma once

#include <set>
#include <string>
#include <vector>

#include "privlab/catalog.hpp"
#include "privlab/model.hpp"

#include <nlohmann/json_fwd.hpp>

namespace privlab {

enum class ThreatStatus { Open, Minimized, Mitigated };

std::string to_string(ThreatStatus s);
ThreatStatus threat_status_from_string(const std::string& s);

struct ThreatFinding {
    std::string threat_id;
    std::vector<std::string> triggered_by;         // model element ids / field names
    std::vector<std::string> exposed_identifiers;  // identifier names cited by the threat
    ThreatStatus status = ThreatStatus::Open;

    bool operator==(const ThreatFinding&) const = default;
};

struct PrincipleViolation {
    PrincipleName principle = PrincipleName::Lawful;
    std::string message;
    std::vector<std::string> triggered_by;

    bool operator==(const PrincipleViolation&) const = default;
};

constexpr int kReportSchemaVersion = 1;

struct ResidualReport {
    std::string model_ref;
    std::vector<std::string> profile;  // selected strategy ids, sorted
    std::vector<ThreatFinding> findings;
    std::vector<PrincipleViolation> principle_violations;

    const ThreatFinding* find(const std::string& threat_id) const;

    bool operator==(const ResidualReport&) const = default;
};

// One finding per threat whose applicability predicate holds on the model,
// status Open, triggered_by naming the satisfying elements.
std::vector<ThreatFinding> enumerate_threats(const SystemModel& model, const Catalog& catalog);

// Resolve each finding's status to the best effect among the selected
// strategies addressing it; unaddressed findings stay open. Unknown strategy
// ids raise NotFoundError.
ResidualReport apply_mitigations(std::vector<ThreatFinding> findings,
                                 const std::set<std::string>& strategy_ids,
                                 const Catalog& catalog);

// One violation per principle whose audit rule fails on the model. Principles
// with no machine-checkable rule always pass.
std::vector<PrincipleViolation> principle_audit(const SystemModel& model, const Catalog& catalog);

struct CoverageMatrix {
    std::vector<std::string> strategy_ids;               // rows
    std::vector<std::string> threat_ids;                 // columns
    std::vector<std::vector<MitigationEffect>> cells;    // [row][col]
    std::vector<int> row_totals;                         // non-none cells per row
    std::vector<int> col_totals;                         // non-none cells per column

    MitigationEffect cell(const std::string& strategy_id, const std::string& threat_id) const;
};

CoverageMatrix coverage_matrix(const Catalog& catalog);

// enumerate + audit + mitigation application in one step.
ResidualReport analyze_model(const SystemModel& model, const Catalog& catalog,
                             const std::set<std::string>& strategy_ids,
                             const std::string& model_ref);

nlohmann::json residual_report_json(const ResidualReport& report);
std::string residual_report_markdown(const ResidualReport& report, const Catalog& catalog);

}  // namespace privlab
