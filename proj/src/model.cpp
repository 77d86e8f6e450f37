#include "privlab/model.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace privlab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

namespace {

const std::map<ArchitectureKind, std::string> kArchitectureNames = {
    {ArchitectureKind::Centralized, "centralized"},
    {ArchitectureKind::PartiallyDecentralized, "partially-decentralized"},
    {ArchitectureKind::Decentralized, "decentralized"},
};

const std::map<NodeRole, std::string> kNodeRoleNames = {
    {NodeRole::Device, "device"},
    {NodeRole::AppBackend, "app-backend"},
    {NodeRole::KeyServer, "key-server"},
    {NodeRole::VerificationServer, "verification-server"},
    {NodeRole::TelemetrySink, "telemetry-sink"},
    {NodeRole::AppStore, "app-store"},
    {NodeRole::ThirdPartyTool, "third-party-tool"},
};

const std::map<OperatorRole, std::string> kOperatorRoleNames = {
    {OperatorRole::DataSubject, "data-subject"},
    {OperatorRole::Controller, "controller"},
    {OperatorRole::Processor, "processor"},
};

template <typename E>
E lookup(const std::map<E, std::string>& table, const std::string& s, const char* what) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    throw ParseError("", std::string("unknown ") + what + ": \"" + s + "\"");
}

}  // namespace

std::string to_string(ArchitectureKind a) { return kArchitectureNames.at(a); }
std::string to_string(NodeRole r) { return kNodeRoleNames.at(r); }
std::string to_string(OperatorRole r) { return kOperatorRoleNames.at(r); }

ArchitectureKind architecture_from_string(const std::string& s) {
    return lookup(kArchitectureNames, s, "architecture kind");
}
NodeRole node_role_from_string(const std::string& s) {
    return lookup(kNodeRoleNames, s, "node role");
}
OperatorRole operator_role_from_string(const std::string& s) {
    return lookup(kOperatorRoleNames, s, "operator role");
}

// ---------------------------------------------------------------------------
// SystemModel accessors
// ---------------------------------------------------------------------------

bool InformationFlow::carries(const std::string& identifier) const {
    return std::find(identifiers.begin(), identifiers.end(), identifier) != identifiers.end() ||
           std::find(metadata_exposed.begin(), metadata_exposed.end(), identifier) !=
               metadata_exposed.end();
}

const ModelNode* SystemModel::find_node(const std::string& id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

bool SystemModel::flag(const std::string& name) const {
    if (name == "consent_withdrawal_supported") return consent_withdrawal_supported;
    if (name == "per_function_consent") return per_function_consent;
    if (name == "user_notice_provided") return user_notice_provided;
    if (name == "data_minimization") return data_minimization;
    if (name == "processing_separated") return processing_separated;
    if (name == "perturbation_applied") return perturbation_applied;
    if (name == "telemetry_default_on") return telemetry_default_on;
    throw NotFoundError("unknown model flag: " + name);
}

// ---------------------------------------------------------------------------
// JSON parse / serialize
// ---------------------------------------------------------------------------

namespace {

bool require_bool(const json& obj, const char* key) {
    if (!obj.contains(key)) throw ParseError(key, "missing required field");
    if (!obj.at(key).is_boolean()) throw ParseError(key, "expected a boolean");
    return obj.at(key).get<bool>();
}

std::vector<std::string> string_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) throw ParseError(path, "expected an array of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

}  // namespace

SystemModel parse_model(const json& doc, const Catalog& catalog) {
    if (!doc.is_object()) throw ParseError("", "model document must be a JSON object");
    if (!doc.contains("tptm_model_version") || !doc["tptm_model_version"].is_number_integer() ||
        doc["tptm_model_version"].get<int>() != kModelSchemaVersion) {
        throw ParseError("tptm_model_version", "missing or unsupported model schema version");
    }

    SystemModel m;
    m.name = doc.value("name", std::string());
    if (!doc.contains("architecture") || !doc["architecture"].is_string()) {
        throw ParseError("architecture", "missing or non-string field");
    }
    m.architecture = architecture_from_string(doc["architecture"].get<std::string>());

    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ParseError("nodes", "missing nodes array");
    }
    std::set<std::string> node_ids;
    std::size_t idx = 0;
    for (const auto& v : doc["nodes"]) {
        const std::string path = "nodes[" + std::to_string(idx++) + "]";
        ModelNode n;
        if (!v.contains("id") || !v["id"].is_string()) throw ParseError(path + ".id", "missing id");
        n.id = v["id"].get<std::string>();
        if (!node_ids.insert(n.id).second) {
            throw ParseError(path + ".id", "duplicate node id \"" + n.id + "\"");
        }
        if (!v.contains("role") || !v["role"].is_string())
            throw ParseError(path + ".role", "missing role");
        try {
            n.role = node_role_from_string(v["role"].get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(path + ".role", e.what());
        }
        if (!v.contains("operator") || !v["operator"].is_string())
            throw ParseError(path + ".operator", "missing operator");
        try {
            n.operator_role = operator_role_from_string(v["operator"].get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(path + ".operator", e.what());
        }
        m.nodes.push_back(std::move(n));
    }

    if (!doc.contains("flows") || !doc["flows"].is_array()) {
        throw ParseError("flows", "missing flows array");
    }
    std::set<std::string> flow_ids;
    idx = 0;
    for (const auto& v : doc["flows"]) {
        const std::string path = "flows[" + std::to_string(idx++) + "]";
        InformationFlow f;
        if (!v.contains("id") || !v["id"].is_string()) throw ParseError(path + ".id", "missing id");
        f.id = v["id"].get<std::string>();
        if (!flow_ids.insert(f.id).second) {
            throw ParseError(path + ".id", "duplicate flow id \"" + f.id + "\"");
        }
        if (!v.contains("from") || !v["from"].is_string())
            throw ParseError(path + ".from", "missing from");
        if (!v.contains("to") || !v["to"].is_string()) throw ParseError(path + ".to", "missing to");
        f.from = v["from"].get<std::string>();
        f.to = v["to"].get<std::string>();
        for (const auto& endpoint : {f.from, f.to}) {
            if (node_ids.find(endpoint) == node_ids.end()) {
                throw ReferenceError(path + ": flow \"" + f.id +
                                     "\" references unknown node \"" + endpoint + "\"");
            }
        }
        if (!v.contains("identifiers")) throw ParseError(path + ".identifiers", "missing field");
        f.identifiers = string_array(v["identifiers"], path + ".identifiers");
        f.encrypted = require_bool(v, "encrypted");
        if (v.contains("metadata_exposed")) {
            f.metadata_exposed = string_array(v["metadata_exposed"], path + ".metadata_exposed");
        }
        for (const auto& ident : f.identifiers) {
            if (!catalog.has_identifier(ident)) {
                throw ParseError(path + ".identifiers",
                                 "unknown identifier name \"" + ident + "\"");
            }
        }
        for (const auto& ident : f.metadata_exposed) {
            if (!catalog.has_identifier(ident)) {
                throw ParseError(path + ".metadata_exposed",
                                 "unknown identifier name \"" + ident + "\"");
            }
        }
        m.flows.push_back(std::move(f));
    }

    if (!doc.contains("retention_days")) throw ParseError("retention_days", "missing field");
    const json& retention = doc["retention_days"];
    if (retention.is_string() && retention.get<std::string>() == "indefinite") {
        m.retention_days = std::nullopt;
    } else if (retention.is_number_integer() && retention.get<int>() >= 1) {
        m.retention_days = retention.get<int>();
    } else {
        throw ParseError("retention_days", "expected a positive integer or \"indefinite\"");
    }

    m.consent_withdrawal_supported = require_bool(doc, "consent_withdrawal_supported");
    m.per_function_consent = require_bool(doc, "per_function_consent");
    m.user_notice_provided = require_bool(doc, "user_notice_provided");
    m.data_minimization = require_bool(doc, "data_minimization");
    m.processing_separated = require_bool(doc, "processing_separated");
    m.perturbation_applied = require_bool(doc, "perturbation_applied");
    m.telemetry_default_on = require_bool(doc, "telemetry_default_on");
    return m;
}

SystemModel parse_model(const std::string& text, const Catalog& catalog) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_model(doc, catalog);
}

nlohmann::json serialize_model(const SystemModel& m) {
    json doc;
    doc["tptm_model_version"] = kModelSchemaVersion;
    doc["name"] = m.name;
    doc["architecture"] = to_string(m.architecture);
    json nodes = json::array();
    for (const auto& n : m.nodes) {
        nodes.push_back({{"id", n.id},
                         {"role", to_string(n.role)},
                         {"operator", to_string(n.operator_role)}});
    }
    doc["nodes"] = nodes;
    json flows = json::array();
    for (const auto& f : m.flows) {
        flows.push_back({{"id", f.id},
                         {"from", f.from},
                         {"to", f.to},
                         {"identifiers", f.identifiers},
                         {"encrypted", f.encrypted},
                         {"metadata_exposed", f.metadata_exposed}});
    }
    doc["flows"] = flows;
    if (m.retention_days) {
        doc["retention_days"] = *m.retention_days;
    } else {
        doc["retention_days"] = "indefinite";
    }
    doc["consent_withdrawal_supported"] = m.consent_withdrawal_supported;
    doc["per_function_consent"] = m.per_function_consent;
    doc["user_notice_provided"] = m.user_notice_provided;
    doc["data_minimization"] = m.data_minimization;
    doc["processing_separated"] = m.processing_separated;
    doc["perturbation_applied"] = m.perturbation_applied;
    doc["telemetry_default_on"] = m.telemetry_default_on;
    return doc;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool is_server_role(NodeRole r) {
    return r == NodeRole::AppBackend || r == NodeRole::KeyServer ||
           r == NodeRole::VerificationServer;
}

// Identifiers that stand for contact histories; a decentralized deployment
// must not route them to controller-operated nodes.
const std::vector<std::string> kContactHistoryIdentifiers = {"exposure details"};

}  // namespace

std::vector<ModelViolation> validate_model(const SystemModel& m) {
    std::vector<ModelViolation> out;

    if (m.architecture == ArchitectureKind::Centralized ||
        m.architecture == ArchitectureKind::PartiallyDecentralized) {
        // Directed reachability from any device node to any server node.
        std::set<std::string> reachable;
        for (const auto& n : m.nodes) {
            if (n.role == NodeRole::Device) reachable.insert(n.id);
        }
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& f : m.flows) {
                if (reachable.count(f.from) && !reachable.count(f.to)) {
                    reachable.insert(f.to);
                    grew = true;
                }
            }
        }
        bool connected = false;
        for (const auto& n : m.nodes) {
            if (is_server_role(n.role) && reachable.count(n.id)) {
                connected = true;
                break;
            }
        }
        if (!connected) {
            out.push_back({"connectivity", "",
                           "no device node reaches a server node, required for a " +
                               to_string(m.architecture) + " architecture"});
        }
    }

    if (m.architecture == ArchitectureKind::Decentralized) {
        for (const auto& f : m.flows) {
            const ModelNode* to = m.find_node(f.to);
            if (!to || to->operator_role != OperatorRole::Controller) continue;
            for (const auto& ident : kContactHistoryIdentifiers) {
                if (f.carries(ident)) {
                    out.push_back({"contact-history-exposure", f.id,
                                   "flow \"" + f.id + "\" carries \"" + ident +
                                       "\" to controller-operated node \"" + to->id +
                                       "\" in a decentralized architecture"});
                }
            }
        }
    }

    return out;
}

std::vector<const InformationFlow*> flows_carrying(const SystemModel& m, const Catalog& catalog,
                                                   const std::string& identifier) {
    if (!catalog.has_identifier(identifier)) {
        throw NotFoundError("identifier \"" + identifier + "\" not in catalog taxonomy");
    }
    std::vector<const InformationFlow*> out;
    for (const auto& f : m.flows) {
        if (f.carries(identifier)) out.push_back(&f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in reference model
// ---------------------------------------------------------------------------

namespace {

SystemModel make_gaen_partial() {
    SystemModel m;
    m.name = "gaen-partial";
    m.architecture = ArchitectureKind::PartiallyDecentralized;
    m.nodes = {
        {"dev-a", NodeRole::Device, OperatorRole::DataSubject},
        {"dev-b", NodeRole::Device, OperatorRole::DataSubject},
        {"verif-server", NodeRole::VerificationServer, OperatorRole::Controller},
        {"key-server", NodeRole::KeyServer, OperatorRole::Controller},
        {"telemetry", NodeRole::TelemetrySink, OperatorRole::Processor},
    };
    m.flows = {
        {"f-broadcast", "dev-a", "dev-b", {"pseudonyms", "AEMD"}, false, {"MAC address"}},
        {"f-tan-request", "dev-a", "verif-server", {"infection status"}, true, {"IP address"}},
        {"f-key-upload", "dev-a", "key-server", {"TEK", "infection status"}, true, {"IP address"}},
        {"f-key-download", "key-server", "dev-b", {"TEK"}, true, {"IP address"}},
        {"f-telemetry", "dev-a", "telemetry", {"device information", "user details"}, true,
         {"IP address"}},
    };
    // Permissive defaults: every built-in threat predicate fires on this model.
    m.retention_days = std::nullopt;
    m.consent_withdrawal_supported = false;
    m.per_function_consent = false;
    m.user_notice_provided = false;
    m.data_minimization = false;
    m.processing_separated = false;
    m.perturbation_applied = false;
    m.telemetry_default_on = true;
    return m;
}

}  // namespace

const SystemModel& builtin_gaen_partial() {
    static const SystemModel model = make_gaen_partial();
    return model;
}

}  // namespace privlab
