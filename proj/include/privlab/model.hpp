#pragma once

#include <optional>
#include <string>
#include <vector>

#include "privlab/catalog.hpp"
#include "privlab/util.hpp"

#include <nlohmann/json_fwd.hpp>

namespace privlab {

enum class ArchitectureKind { Centralized, PartiallyDecentralized, Decentralized };

enum class NodeRole {
    Device,
    AppBackend,
    KeyServer,
    VerificationServer,
    TelemetrySink,
    AppStore,
    ThirdPartyTool,
};

enum class OperatorRole { DataSubject, Controller, Processor };

std::string to_string(ArchitectureKind a);
std::string to_string(NodeRole r);
std::string to_string(OperatorRole r);
ArchitectureKind architecture_from_string(const std::string& s);
NodeRole node_role_from_string(const std::string& s);
OperatorRole operator_role_from_string(const std::string& s);

struct ModelNode {
    std::string id;
    NodeRole role = NodeRole::Device;
    OperatorRole operator_role = OperatorRole::DataSubject;

    bool operator==(const ModelNode&) const = default;
};

struct InformationFlow {
    std::string id;
    std::string from;
    std::string to;
    std::vector<std::string> identifiers;        // payload identifiers
    bool encrypted = false;
    std::vector<std::string> metadata_exposed;   // visible even when encrypted

    bool carries(const std::string& identifier) const;

    bool operator==(const InformationFlow&) const = default;
};

constexpr int kModelSchemaVersion = 1;

// Declarative information-flow description of one ENS deployment plus the
// policy flags the analysis engine evaluates.
struct SystemModel {
    std::string name;
    ArchitectureKind architecture = ArchitectureKind::Decentralized;
    std::vector<ModelNode> nodes;
    std::vector<InformationFlow> flows;
    std::optional<int> retention_days;  // nullopt = indefinite
    bool consent_withdrawal_supported = false;
    bool per_function_consent = false;
    bool user_notice_provided = false;
    bool data_minimization = false;
    bool processing_separated = false;
    bool perturbation_applied = false;
    bool telemetry_default_on = false;

    const ModelNode* find_node(const std::string& id) const;
    bool flag(const std::string& name) const;  // throws NotFoundError on unknown flag

    bool operator==(const SystemModel&) const = default;
};

struct ModelViolation {
    std::string code;     // "connectivity", "contact-history-exposure", ...
    std::string subject;  // offending element id, if any
    std::string message;

    bool operator==(const ModelViolation&) const = default;
};

// Structural parse; cross-references and identifier names are checked against
// the catalog and reported as errors with the offending path.
SystemModel parse_model(const nlohmann::json& doc, const Catalog& catalog);
SystemModel parse_model(const std::string& text, const Catalog& catalog);
nlohmann::json serialize_model(const SystemModel& model);

// Architecture invariants, reported as data rather than thrown.
std::vector<ModelViolation> validate_model(const SystemModel& model);

// All flows whose payload identifiers or exposed metadata include the
// identifier. The identifier must exist in the catalog taxonomy.
std::vector<const InformationFlow*> flows_carrying(const SystemModel& model,
                                                   const Catalog& catalog,
                                                   const std::string& identifier);

// Reference model of a partially decentralized GAEN-style deployment with all
// risk flags at their permissive defaults; triggers every built-in threat.
const SystemModel& builtin_gaen_partial();

}  // namespace privlab
