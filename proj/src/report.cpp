#include "privlab/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace privlab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

MitigationProfile parse_profile(const std::string& text, const Catalog& catalog) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("", "profile document must be a JSON object");
    if (!doc.contains("tptm_profile_version") ||
        !doc["tptm_profile_version"].is_number_integer() ||
        doc["tptm_profile_version"].get<int>() != kProfileSchemaVersion) {
        throw ParseError("tptm_profile_version", "missing or unsupported profile schema version");
    }

    MitigationProfile profile;
    if (doc.contains("strategies")) {
        const json& strategies = doc["strategies"];
        if (strategies.is_string() && strategies.get<std::string>() == "all") {
            for (const auto& s : catalog.strategies) profile.strategies.insert(s.id);
        } else if (strategies.is_array()) {
            for (const auto& id : strategies) {
                if (!id.is_string()) throw ParseError("strategies", "expected strategy id strings");
                catalog.strategy(id.get<std::string>());  // throws NotFoundError
                profile.strategies.insert(id.get<std::string>());
            }
        } else {
            throw ParseError("strategies", "expected an array of ids or \"all\"");
        }
    }
    if (doc.contains("toggles")) {
        mitigation_config_from_json(doc["toggles"]);  // validate early
        profile.raw_overrides = doc["toggles"].dump();
    }
    return profile;
}

MitigationConfig config_from_profile(const Catalog& catalog, const MitigationProfile& profile) {
    MitigationConfig config;  // permissive defaults
    for (const auto& id : profile.strategies) {
        const MitigationStrategy& strategy = catalog.strategy(id);
        for (const auto& toggle : strategy.sim_toggles) {
            if (toggle == "tls_on") config.tls_on = true;
            else if (toggle == "header_stripping") config.header_stripping = true;
            else if (toggle == "hmac_tags") config.hmac_tags = true;
            else if (toggle == "sync_rotation") config.sync_rotation = true;
            else if (toggle == "retention_days") config.retention_days = 1;
            else if (toggle == "data_minimization") config.data_minimization = true;
            else if (toggle == "telemetry_default_on") config.telemetry_default_on = false;
            else if (toggle == "verification_binding") config.verification_binding = true;
            else if (toggle == "perturbation_on") config.perturbation_on = true;
        }
    }
    if (!profile.raw_overrides.empty()) {
        const json overrides = json::parse(profile.raw_overrides);
        const MitigationConfig parsed = mitigation_config_from_json(overrides);
        if (overrides.contains("tls_on")) config.tls_on = parsed.tls_on;
        if (overrides.contains("header_stripping")) config.header_stripping = parsed.header_stripping;
        if (overrides.contains("hmac_tags")) config.hmac_tags = parsed.hmac_tags;
        if (overrides.contains("sync_rotation")) config.sync_rotation = parsed.sync_rotation;
        if (overrides.contains("retention_days")) config.retention_days = parsed.retention_days;
        if (overrides.contains("data_minimization")) config.data_minimization = parsed.data_minimization;
        if (overrides.contains("telemetry_default_on")) {
            config.telemetry_default_on = parsed.telemetry_default_on;
        }
        if (overrides.contains("verification_binding")) {
            config.verification_binding = parsed.verification_binding;
        }
        if (overrides.contains("perturbation_on")) config.perturbation_on = parsed.perturbation_on;
    }
    return config;
}

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

namespace {

// Threats whose simulated attack is fully suppressed by a specific toggle
// state; used to scope the "nonzero" expectation.
bool protective_toggle_active(const std::string& threat_id, const MitigationConfig& c,
                              bool& known) {
    known = true;
    if (threat_id == "ST002") return c.hmac_tags;
    if (threat_id == "ST004") return c.verification_binding;
    if (threat_id == "EV004") return c.sync_rotation;
    if (threat_id == "EV001") return c.tls_on && c.header_stripping;
    if (threat_id == "DD002") return !c.telemetry_default_on;
    if (threat_id == "DD003") return c.retention_days.has_value();
    known = false;
    return false;
}

}  // namespace

std::vector<CoherenceVerdict> coherence_verdicts(const ResidualReport& residual,
                                                 const std::vector<AttackOutcome>& outcomes,
                                                 const MitigationConfig& config) {
    std::vector<CoherenceVerdict> verdicts;
    for (const auto& outcome : outcomes) {
        const ThreatFinding* finding = residual.find(outcome.threat_id);
        if (!finding) continue;  // threat not applicable to the analyzed model

        CoherenceVerdict v;
        v.threat_id = outcome.threat_id;
        v.engine_status = finding->status;
        v.attack_successes = outcome.successes;

        bool toggle_known = false;
        const bool toggle_on = protective_toggle_active(outcome.threat_id, config, toggle_known);
        if (finding->status == ThreatStatus::Mitigated) {
            v.expectation = "zero";
            v.coherent = outcome.successes == 0;
        } else if (toggle_known && toggle_on) {
            // Toggle protects the mechanism even though the engine verdict
            // stops short of full mitigation.
            v.expectation = "none";
            v.coherent = true;
        } else {
            v.expectation = "nonzero";
            v.coherent = outcome.successes > 0;
        }
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

// ---------------------------------------------------------------------------
// Run report serialization
// ---------------------------------------------------------------------------

nlohmann::json run_report_json(const RunReport& report, const nlohmann::json& run_meta) {
    json doc;
    doc["tptm_report_version"] = kReportSchemaVersion;
    doc["tool_version"] = report.tool_version;
    doc["inputs"] = {{"model_path", report.inputs.model_path},
                     {"model_sha256", report.inputs.model_sha256},
                     {"scenario_path", report.inputs.scenario_path},
                     {"scenario_sha256", report.inputs.scenario_sha256},
                     {"profile_path", report.inputs.profile_path},
                     {"profile_sha256", report.inputs.profile_sha256}};
    doc["seed"] = report.seed;
    doc["config"] = mitigation_config_json(report.config);
    doc["residual"] = residual_report_json(report.residual);
    json outcomes = json::array();
    for (const auto& outcome : report.outcomes) {
        json details = json::array();
        for (const auto& d : outcome.details) details.push_back(d.description);
        outcomes.push_back({{"threat_id", outcome.threat_id},
                            {"successes", outcome.successes},
                            {"details", details}});
    }
    doc["attack_outcomes"] = outcomes;
    json coherence = json::array();
    for (const auto& v : report.coherence) {
        coherence.push_back({{"threat_id", v.threat_id},
                             {"engine_status", to_string(v.engine_status)},
                             {"attack_successes", v.attack_successes},
                             {"expectation", v.expectation},
                             {"coherent", v.coherent}});
    }
    doc["coherence"] = coherence;
    doc["run_meta"] = run_meta;
    return doc;
}

std::string run_report_markdown(const RunReport& report, const Catalog& catalog) {
    std::ostringstream md;
    md << "# Simulation run report\n\n";
    md << "Scenario: `" << report.inputs.scenario_path << "` (sha256 "
       << report.inputs.scenario_sha256.substr(0, 12) << "...), seed " << report.seed << "\n\n";

    md << "## Attack outcomes\n\n";
    md << "| Threat | Engine status | Successes | Expectation | Coherent |\n";
    md << "|--------|---------------|-----------|-------------|----------|\n";
    std::map<std::string, const CoherenceVerdict*> verdict_by_threat;
    for (const auto& v : report.coherence) verdict_by_threat[v.threat_id] = &v;
    for (const auto& outcome : report.outcomes) {
        auto it = verdict_by_threat.find(outcome.threat_id);
        md << "| " << outcome.threat_id << " | "
           << (it != verdict_by_threat.end() ? to_string(it->second->engine_status) : "n/a")
           << " | " << outcome.successes << " | "
           << (it != verdict_by_threat.end() ? it->second->expectation : "n/a") << " | "
           << (it != verdict_by_threat.end() ? (it->second->coherent ? "yes" : "NO") : "n/a")
           << " |\n";
    }

    md << "\n## Residual threat analysis\n\n";
    md << residual_report_markdown(report.residual, catalog);
    return md.str();
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

nlohmann::json compare_reports(const nlohmann::json& baseline, const nlohmann::json& mitigated) {
    const std::string base_hash = baseline.at("inputs").at("scenario_sha256").get<std::string>();
    const std::string mit_hash = mitigated.at("inputs").at("scenario_sha256").get<std::string>();
    if (base_hash != mit_hash) {
        throw ValidationError("reports come from different scenarios (scenario_sha256 " +
                              base_hash.substr(0, 12) + "... vs " + mit_hash.substr(0, 12) +
                              "...)");
    }

    auto successes_by_threat = [](const json& report) {
        std::map<std::string, int> out;
        for (const auto& outcome : report.at("attack_outcomes")) {
            out[outcome.at("threat_id").get<std::string>()] = outcome.at("successes").get<int>();
        }
        return out;
    };
    auto status_by_threat = [](const json& report) {
        std::map<std::string, std::string> out;
        for (const auto& finding : report.at("residual").at("findings")) {
            out[finding.at("threat_id").get<std::string>()] =
                finding.at("status").get<std::string>();
        }
        return out;
    };

    const auto base_successes = successes_by_threat(baseline);
    const auto mit_successes = successes_by_threat(mitigated);
    const auto base_status = status_by_threat(baseline);
    const auto mit_status = status_by_threat(mitigated);

    std::set<std::string> threats;
    for (const auto& [id, n] : base_successes) threats.insert(id);
    for (const auto& [id, n] : mit_successes) threats.insert(id);
    for (const auto& [id, s] : base_status) threats.insert(id);
    for (const auto& [id, s] : mit_status) threats.insert(id);

    json rows = json::array();
    bool identical = true;
    for (const auto& id : threats) {
        auto lookup_n = [&](const std::map<std::string, int>& m) {
            auto it = m.find(id);
            return it == m.end() ? json(nullptr) : json(it->second);
        };
        auto lookup_s = [&](const std::map<std::string, std::string>& m) {
            auto it = m.find(id);
            return it == m.end() ? json(nullptr) : json(it->second);
        };
        json row = {{"threat_id", id},
                    {"successes_before", lookup_n(base_successes)},
                    {"successes_after", lookup_n(mit_successes)},
                    {"status_before", lookup_s(base_status)},
                    {"status_after", lookup_s(mit_status)}};
        if (row["successes_before"] != row["successes_after"] ||
            row["status_before"] != row["status_after"]) {
            identical = false;
        }
        rows.push_back(std::move(row));
    }

    json delta;
    delta["tptm_compare_version"] = 1;
    delta["scenario_sha256"] = base_hash;
    delta["identical"] = identical;
    delta["rows"] = rows;
    return delta;
}

std::string compare_markdown(const nlohmann::json& delta) {
    std::ostringstream md;
    md << "# Baseline vs mitigated\n\n";
    md << "Scenario sha256: " << delta.at("scenario_sha256").get<std::string>().substr(0, 12)
       << "...\n\n";
    md << "| Threat | Successes before | Successes after | Status before | Status after |\n";
    md << "|--------|------------------|-----------------|---------------|--------------|\n";
    auto cell = [](const json& v) {
        if (v.is_null()) return std::string("-");
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    for (const auto& row : delta.at("rows")) {
        md << "| " << row.at("threat_id").get<std::string>() << " | "
           << cell(row.at("successes_before")) << " | " << cell(row.at("successes_after")) << " | "
           << cell(row.at("status_before")) << " | " << cell(row.at("status_after")) << " |\n";
    }
    return md.str();
}

}  // namespace privlab
