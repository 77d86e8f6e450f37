#pragma once

#include <set>
#include <string>
#include <vector>

#include "privlab/attacks.hpp"
#include "privlab/engine.hpp"
#include "privlab/sim.hpp"

#include <nlohmann/json_fwd.hpp>

namespace privlab {

inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Mitigation profiles: a set of catalog strategies plus optional raw toggle
// overrides. Selecting a strategy switches every simulation flag it is bound
// to into its protective state.
// ---------------------------------------------------------------------------

constexpr int kProfileSchemaVersion = 1;

struct MitigationProfile {
    std::set<std::string> strategies;
    std::string raw_overrides;  // JSON text of the "toggles" object, empty when absent

    bool operator==(const MitigationProfile&) const = default;
};

MitigationProfile parse_profile(const std::string& text, const Catalog& catalog);

// All strategies off = permissive defaults; each selected strategy flips its
// bound toggles to the protective value (retention gets a one-day window).
MitigationConfig config_from_profile(const Catalog& catalog, const MitigationProfile& profile);

// ---------------------------------------------------------------------------
// Run report
// ---------------------------------------------------------------------------

struct RunInputs {
    std::string model_path;
    std::string model_sha256;
    std::string scenario_path;
    std::string scenario_sha256;
    std::string profile_path;
    std::string profile_sha256;
};

// Engine verdict versus observed attack successes for one threat.
//   expectation "zero"    — engine says mitigated, the attack must not land
//   expectation "nonzero" — threat open/minimized with its toggle inactive,
//                           the shipped scenario must demonstrate it
//   expectation "none"    — toggle active but verdict short of mitigated;
//                           no claim either way
struct CoherenceVerdict {
    std::string threat_id;
    ThreatStatus engine_status = ThreatStatus::Open;
    int attack_successes = 0;
    std::string expectation;
    bool coherent = true;
};

std::vector<CoherenceVerdict> coherence_verdicts(const ResidualReport& residual,
                                                 const std::vector<AttackOutcome>& outcomes,
                                                 const MitigationConfig& config);

struct RunReport {
    std::string tool_version = kToolVersion;
    RunInputs inputs;
    std::uint64_t seed = 0;
    MitigationConfig config;
    ResidualReport residual;
    std::vector<AttackOutcome> outcomes;
    std::vector<CoherenceVerdict> coherence;
};

// Deterministic body; wall-clock data (timestamp, elapsed time) lives in the
// separate run_meta object so byte-comparisons can drop it.
nlohmann::json run_report_json(const RunReport& report, const nlohmann::json& run_meta);
std::string run_report_markdown(const RunReport& report, const Catalog& catalog);

// Per-threat delta of two run reports over the same scenario (matched by
// content hash; mismatch raises ValidationError).
nlohmann::json compare_reports(const nlohmann::json& baseline, const nlohmann::json& mitigated);
std::string compare_markdown(const nlohmann::json& delta);

}  // namespace privlab
