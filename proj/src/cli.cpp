#include "privlab/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "privlab/attacks.hpp"
#include "privlab/catalog.hpp"
#include "privlab/engine.hpp"
#include "privlab/model.hpp"
#include "privlab/report.hpp"
#include "privlab/sim.hpp"

namespace privlab::cli {

using nlohmann::json;

namespace {

constexpr const char* kBuiltinModelRef = "<builtin:gaen-partial>";

// PRIVLAB_CATALOG overrides the built-in catalog.
Catalog active_catalog() {
    const char* path = std::getenv("PRIVLAB_CATALOG");
    if (path && *path) {
        return load_catalog(read_file(path));
    }
    return builtin_catalog();
}

std::string sidecar_path(const std::string& out_path, const std::string& new_suffix) {
    const std::string json_ext = ".json";
    if (out_path.size() > json_ext.size() &&
        out_path.compare(out_path.size() - json_ext.size(), json_ext.size(), json_ext) == 0) {
        return out_path.substr(0, out_path.size() - json_ext.size()) + new_suffix;
    }
    return out_path + new_suffix;
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

std::string iso8601_now() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::set<std::string> parse_mitigation_list(const std::string& arg, const Catalog& catalog) {
    std::set<std::string> out;
    if (arg.empty()) return out;
    if (arg == "all") {
        for (const auto& s : catalog.strategies) out.insert(s.id);
        return out;
    }
    std::stringstream ss(arg);
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (id.empty()) continue;
        catalog.strategy(id);  // throws NotFoundError on unknown ids
        out.insert(id);
    }
    return out;
}

// -- catalog ----------------------------------------------------------------

std::string kind_letter(IdentifierKind k) { return k == IdentifierKind::Direct ? "D" : "I"; }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

int cmd_catalog_list(const Catalog& catalog) {
    for (const auto& t : catalog.threats) {
        std::cout << t.id << "  [" << to_string(t.capability) << "]  " << t.title << "\n";
    }
    return 0;
}

int cmd_catalog_show(const Catalog& catalog, const std::string& id) {
    const ThreatEntry* t = catalog.find_threat(id);
    if (!t) {
        std::cerr << "error: unknown threat id: " << id << "\n";
        return 1;
    }
    std::vector<std::string> goals;
    for (auto g : t->goals) goals.push_back(display_name(g));
    std::vector<std::string> identifiers;
    for (const auto& i : t->identifiers) {
        identifiers.push_back(i.name + " (" + kind_letter(i.kind_as_cited) + ")");
    }
    std::cout << t->id << "  " << t->title << "\n";
    std::cout << "  Capability:  " << to_string(t->capability) << "  (group: "
              << group_label(t->group()) << ")\n";
    std::cout << "  Goals:       " << join(goals, ", ") << "\n";
    std::cout << "  Attackers:   " << join(t->attackers, ", ") << "\n";
    std::cout << "  Identifiers: " << join(identifiers, ", ") << "\n";
    std::cout << "  Details:     " << t->details << "\n";
    const auto mitigations = mitigations_for(catalog, t->id);
    if (mitigations.empty()) {
        std::cout << "  Mitigations: (none catalogued)\n";
    } else {
        std::vector<std::string> entries;
        for (const auto& [strategy, effect] : mitigations) {
            entries.push_back(strategy->id + " (" + to_string(effect) + ")");
        }
        std::cout << "  Mitigations: " << join(entries, ", ") << "\n";
    }
    return 0;
}

// -- analyze ------------------------------------------------------------------

int cmd_analyze(const std::string& model_path, const std::string& mitigations,
                const std::string& out_path) {
    const Catalog catalog = active_catalog();
    const std::string model_text = read_file(model_path);
    const SystemModel model = parse_model(model_text, catalog);
    const std::vector<ModelViolation> violations = validate_model(model);
    if (!violations.empty()) {
        for (const auto& v : violations) {
            std::cerr << "model violation [" << v.code << "] " << v.message << "\n";
        }
        return 1;
    }
    const std::set<std::string> strategy_ids = parse_mitigation_list(mitigations, catalog);
    const ResidualReport report = analyze_model(model, catalog, strategy_ids, model_path);
    write_file(out_path, dump_json(residual_report_json(report)));
    write_file(sidecar_path(out_path, ".md"), residual_report_markdown(report, catalog));

    int open = 0, minimized = 0, mitigated = 0;
    for (const auto& f : report.findings) {
        if (f.status == ThreatStatus::Open) ++open;
        if (f.status == ThreatStatus::Minimized) ++minimized;
        if (f.status == ThreatStatus::Mitigated) ++mitigated;
    }
    std::cout << report.findings.size() << " applicable threats: " << mitigated << " mitigated, "
              << minimized << " minimized, " << open << " open; "
              << report.principle_violations.size() << " principle violation(s)\n";
    std::cout << "report written to " << out_path << "\n";
    return 0;
}

// -- simulate -----------------------------------------------------------------

int cmd_simulate(const std::string& scenario_path, const std::string& profile_path,
                 const std::string& model_path, std::optional<std::uint64_t> seed_override,
                 const std::string& out_path) {
    const auto started = std::chrono::steady_clock::now();
    const Catalog catalog = active_catalog();

    const std::string scenario_text = read_file(scenario_path);
    Scenario scenario = parse_scenario(scenario_text);
    if (seed_override) scenario.seed = *seed_override;
    validate_scenario(scenario);

    // Explicit --profile wins; otherwise honor the scenario's own profile
    // reference, resolved relative to the scenario file.
    std::string effective_profile_path = profile_path;
    if (effective_profile_path.empty() && !scenario.profile.empty()) {
        const std::filesystem::path ref(scenario.profile);
        effective_profile_path =
            ref.is_absolute()
                ? ref.string()
                : (std::filesystem::path(scenario_path).parent_path() / ref).string();
    }
    MitigationProfile profile;
    std::string profile_text;
    if (!effective_profile_path.empty()) {
        profile_text = read_file(effective_profile_path);
        profile = parse_profile(profile_text, catalog);
    }
    const MitigationConfig config = config_from_profile(catalog, profile);

    SystemModel model;
    std::string model_text;
    std::string model_ref;
    if (!model_path.empty()) {
        model_text = read_file(model_path);
        model = parse_model(model_text, catalog);
        model_ref = model_path;
    } else {
        model = builtin_gaen_partial();
        model_text = dump_json(serialize_model(model));
        model_ref = kBuiltinModelRef;
    }
    const std::vector<ModelViolation> violations = validate_model(model);
    if (!violations.empty()) {
        for (const auto& v : violations) {
            std::cerr << "model violation [" << v.code << "] " << v.message << "\n";
        }
        return 1;
    }

    const SimTrace trace = run_scenario(scenario, config);
    const std::vector<AttackOutcome> outcomes = compute_attack_outcomes(scenario, trace);

    RunReport report;
    report.inputs =
        RunInputs{model_ref,     sha256_hex(model_text),   scenario_path,
                  sha256_hex(scenario_text), effective_profile_path, sha256_hex(profile_text)};
    report.seed = scenario.seed;
    report.config = config;
    report.residual = analyze_model(model, catalog, profile.strategies, model_ref);
    report.outcomes = outcomes;
    report.coherence = coherence_verdicts(report.residual, outcomes, config);

    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    json run_meta = {{"generated_at", iso8601_now()}, {"elapsed_ms", elapsed.count()}};

    write_file(out_path, dump_json(run_report_json(report, run_meta)));
    write_file(sidecar_path(out_path, ".md"), run_report_markdown(report, catalog));
    write_file(sidecar_path(out_path, ".trace.json"), dump_json(trace_json(trace)));
    write_file(sidecar_path(out_path, ".trace.txt"), trace_text(trace));

    std::cout << "simulated " << scenario.name << " (" << scenario.duration_intervals
              << " intervals, seed " << scenario.seed << ")\n";
    for (const auto& outcome : outcomes) {
        std::cout << "  " << outcome.threat_id << ": " << outcome.successes << " success(es)\n";
    }
    bool all_coherent = true;
    for (const auto& v : report.coherence) all_coherent = all_coherent && v.coherent;
    std::cout << (all_coherent ? "engine/simulation verdicts coherent"
                               : "WARNING: engine/simulation verdicts diverge")
              << "; report written to " << out_path << "\n";
    return 0;
}

// -- compare ------------------------------------------------------------------

int cmd_compare(const std::string& baseline_path, const std::string& mitigated_path,
                const std::string& out_path) {
    json baseline, mitigated;
    try {
        baseline = json::parse(read_file(baseline_path));
        mitigated = json::parse(read_file(mitigated_path));
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid report JSON: ") + e.what());
    }
    json delta;
    try {
        delta = compare_reports(baseline, mitigated);
    } catch (const json::exception& e) {
        throw ParseError("", std::string("report missing required fields: ") + e.what());
    }
    write_file(out_path, dump_json(delta));
    write_file(sidecar_path(out_path, ".md"), compare_markdown(delta));
    std::cout << (delta["identical"].get<bool>() ? "no differences" : "differences found")
              << "; delta written to " << out_path << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"privlab - privacy threat lab for exposure notification systems"};
    app.require_subcommand(1);

    // catalog
    auto* catalog_cmd = app.add_subcommand("catalog", "inspect the threat catalog");
    catalog_cmd->require_subcommand(1);
    auto* list_cmd = catalog_cmd->add_subcommand("list", "list all catalogued threats");
    std::string show_id;
    auto* show_cmd = catalog_cmd->add_subcommand("show", "show one threat in detail");
    show_cmd->add_option("id", show_id, "threat id, e.g. ST003")->required();

    // analyze
    std::string model_path, mitigations, analyze_out;
    auto* analyze_cmd = app.add_subcommand("analyze", "static residual-threat analysis of a model");
    analyze_cmd->add_option("--model", model_path, "system model JSON file")->required();
    analyze_cmd->add_option("--mitigations", mitigations,
                            "comma-separated strategy ids, or \"all\"");
    analyze_cmd->add_option("--out", analyze_out, "output report path (.json)")->required();

    // simulate
    std::string scenario_path, profile_path, sim_model_path, sim_out;
    std::uint64_t seed_value = 0;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "run a scenario and execute its attacks");
    simulate_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    simulate_cmd->add_option("--profile", profile_path, "mitigation profile JSON file");
    simulate_cmd->add_option("--model", sim_model_path,
                             "system model for the engine verdicts (default: built-in)");
    auto* seed_opt = simulate_cmd->add_option("--seed", seed_value, "override the scenario seed");
    simulate_cmd->add_option("--out", sim_out, "output report path (.json)")->required();

    // compare
    std::string baseline_path, mitigated_path, compare_out;
    auto* compare_cmd = app.add_subcommand("compare", "diff two run reports");
    compare_cmd->add_option("--baseline", baseline_path, "baseline run report")->required();
    compare_cmd->add_option("--mitigated", mitigated_path, "mitigated run report")->required();
    compare_cmd->add_option("--out", compare_out, "output delta path (.json)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (list_cmd->parsed()) return cmd_catalog_list(active_catalog());
        if (show_cmd->parsed()) return cmd_catalog_show(active_catalog(), show_id);
        if (analyze_cmd->parsed()) return cmd_analyze(model_path, mitigations, analyze_out);
        if (simulate_cmd->parsed()) {
            return cmd_simulate(scenario_path, profile_path, sim_model_path,
                                seed_opt->count() > 0 ? std::optional<std::uint64_t>(seed_value)
                                                      : std::nullopt,
                                sim_out);
        }
        if (compare_cmd->parsed()) return cmd_compare(baseline_path, mitigated_path, compare_out);
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace privlab::cli
