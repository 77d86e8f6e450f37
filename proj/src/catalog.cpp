#include "privlab/catalog.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include <nlohmann/json.hpp>

#include "privlab/predicate.hpp"

namespace privlab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Enum <-> string tables
// ---------------------------------------------------------------------------

namespace {

const std::map<ThreatCategory, std::string> kCategoryNames = {
    {ThreatCategory::Surveillance, "surveillance"},
    {ThreatCategory::StoredDataCompromise, "stored-data-compromise"},
    {ThreatCategory::Misattribution, "misattribution"},
    {ThreatCategory::SecondaryUse, "secondary-use"},
    {ThreatCategory::Exclusion, "exclusion"},
    {ThreatCategory::Linkability, "linkability"},
    {ThreatCategory::Identification, "identification"},
    {ThreatCategory::Detection, "detection"},
    {ThreatCategory::NonRepudiation, "non-repudiation"},
    {ThreatCategory::IntegrityCompromise, "integrity-compromise"},
};

const std::map<AttackerCapability, std::string> kCapabilityNames = {
    {AttackerCapability::Coercion, "coercion"},
    {AttackerCapability::DataDisclosure, "data-disclosure"},
    {AttackerCapability::Eavesdropping, "eavesdropping"},
    {AttackerCapability::Replay, "replay"},
    {AttackerCapability::Spoofing, "spoofing"},
    {AttackerCapability::Tampering, "tampering"},
};

const std::map<StrategyGroup, std::string> kStrategyGroupNames = {
    {StrategyGroup::PrivacyByDesign, "privacy-by-design"},
    {StrategyGroup::SecureCommunication, "secure-communication"},
    {StrategyGroup::ReferenceArchitecture, "reference-architecture"},
};

const std::map<PrincipleName, std::string> kPrincipleNames = {
    {PrincipleName::Lawful, "lawful"},
    {PrincipleName::InformedConsent, "informed-consent"},
    {PrincipleName::PurposeBinding, "purpose-binding"},
    {PrincipleName::IdentityControl, "identity-control"},
    {PrincipleName::Transparency, "transparency"},
    {PrincipleName::Accountability, "accountability"},
    {PrincipleName::Proportionality, "proportionality"},
    {PrincipleName::DataRetention, "data-retention"},
};

template <typename E>
E enum_from_string(const std::map<E, std::string>& table, const std::string& s,
                   const char* what) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    throw ParseError("", std::string("unknown ") + what + ": \"" + s + "\"");
}

}  // namespace

std::string to_string(ThreatCategory c) { return kCategoryNames.at(c); }
std::string to_string(AttackerCapability c) { return kCapabilityNames.at(c); }
std::string to_string(StrategyGroup g) { return kStrategyGroupNames.at(g); }
std::string to_string(PrincipleName p) { return kPrincipleNames.at(p); }

std::string to_string(IdentifierKind k) {
    return k == IdentifierKind::Direct ? "direct" : "indirect";
}

std::string to_string(MitigationEffect e) {
    switch (e) {
        case MitigationEffect::None: return "none";
        case MitigationEffect::Minimizes: return "minimizes";
        case MitigationEffect::Mitigates: return "mitigates";
    }
    return "none";
}

std::string display_name(ThreatCategory c) {
    std::string s = to_string(c);
    std::replace(s.begin(), s.end(), '-', ' ');
    return s;
}

ThreatCategory threat_category_from_string(const std::string& s) {
    return enum_from_string(kCategoryNames, s, "threat category");
}
AttackerCapability capability_from_string(const std::string& s) {
    return enum_from_string(kCapabilityNames, s, "attacker capability");
}
StrategyGroup strategy_group_from_string(const std::string& s) {
    return enum_from_string(kStrategyGroupNames, s, "strategy group");
}
PrincipleName principle_from_string(const std::string& s) {
    return enum_from_string(kPrincipleNames, s, "privacy principle");
}

IdentifierKind identifier_kind_from_string(const std::string& s) {
    if (s == "direct") return IdentifierKind::Direct;
    if (s == "indirect") return IdentifierKind::Indirect;
    throw ParseError("", "unknown identifier kind: \"" + s + "\"");
}

MitigationEffect effect_from_string(const std::string& s) {
    if (s == "none") return MitigationEffect::None;
    if (s == "minimizes") return MitigationEffect::Minimizes;
    if (s == "mitigates") return MitigationEffect::Mitigates;
    throw ParseError("", "unknown mitigation effect: \"" + s + "\"");
}

const std::vector<std::string>& known_sim_toggle_names() {
    static const std::vector<std::string> names = {
        "tls_on",           "header_stripping",      "hmac_tags",
        "sync_rotation",    "retention_days",        "data_minimization",
        "telemetry_default_on", "verification_binding", "perturbation_on",
    };
    return names;
}

ThreatGroup group_of(AttackerCapability c) {
    switch (c) {
        case AttackerCapability::Coercion: return ThreatGroup::Coercion;
        case AttackerCapability::DataDisclosure: return ThreatGroup::DataDisclosure;
        case AttackerCapability::Eavesdropping: return ThreatGroup::Eavesdropping;
        case AttackerCapability::Replay:
        case AttackerCapability::Spoofing:
        case AttackerCapability::Tampering: return ThreatGroup::SpoofTraceReplay;
    }
    return ThreatGroup::Coercion;
}

std::string group_label(ThreatGroup g) {
    switch (g) {
        case ThreatGroup::Coercion: return "Coercion Attacks";
        case ThreatGroup::DataDisclosure: return "Data Disclosure";
        case ThreatGroup::Eavesdropping: return "Eavesdropping";
        case ThreatGroup::SpoofTraceReplay: return "Spoofing, Tracing, and Replay Attacks";
    }
    return "";
}

// ---------------------------------------------------------------------------
// Catalog lookups
// ---------------------------------------------------------------------------

const ThreatEntry* Catalog::find_threat(const std::string& id) const {
    for (const auto& t : threats) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

const ThreatEntry& Catalog::threat(const std::string& id) const {
    if (const ThreatEntry* t = find_threat(id)) return *t;
    throw NotFoundError("unknown threat id: " + id);
}

const MitigationStrategy* Catalog::find_strategy(const std::string& id) const {
    for (const auto& s : strategies) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

const MitigationStrategy& Catalog::strategy(const std::string& id) const {
    if (const MitigationStrategy* s = find_strategy(id)) return *s;
    throw NotFoundError("unknown strategy id: " + id);
}

const PrivacyIdentifier* Catalog::find_identifier(const std::string& name) const {
    for (const auto& i : identifiers) {
        if (i.name == name) return &i;
    }
    return nullptr;
}

std::vector<std::pair<const MitigationStrategy*, MitigationEffect>> mitigations_for(
    const Catalog& catalog, const std::string& threat_id) {
    catalog.threat(threat_id);  // existence check
    std::vector<std::pair<const MitigationStrategy*, MitigationEffect>> out;
    for (const auto& s : catalog.strategies) {
        for (const auto& a : s.addresses) {
            if (a.threat_id == threat_id) {
                out.emplace_back(&s, a.effect);
            }
        }
    }
    return out;
}

std::vector<const ThreatEntry*> threats_for_capability(const Catalog& catalog,
                                                       AttackerCapability capability) {
    std::vector<const ThreatEntry*> out;
    const ThreatGroup g = group_of(capability);
    for (const auto& t : catalog.threats) {
        if (t.group() == g) out.push_back(&t);
    }
    return out;
}

MitigationEffect best_effect(const Catalog& catalog, const std::string& threat_id) {
    MitigationEffect best = MitigationEffect::None;
    for (const auto& [strategy, effect] : mitigations_for(catalog, threat_id)) {
        best = std::max(best, effect);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Validation shared by load paths
// ---------------------------------------------------------------------------

namespace {

const std::regex kThreatIdPattern("(CA|DD|EV|ST)[0-9]{3}");

void validate_catalog(const Catalog& c) {
    std::set<std::string> threat_ids;
    for (std::size_t i = 0; i < c.threats.size(); ++i) {
        const ThreatEntry& t = c.threats[i];
        const std::string path = "threats[" + std::to_string(i) + "]";
        if (!std::regex_match(t.id, kThreatIdPattern)) {
            throw ParseError(path + ".id", "threat id \"" + t.id + "\" does not match (CA|DD|EV|ST)NNN");
        }
        if (!threat_ids.insert(t.id).second) {
            throw ParseError(path + ".id", "duplicate threat id " + t.id);
        }
        if (t.goals.empty()) {
            throw ParseError(path + ".goals", "threat " + t.id + " has no goals");
        }
        if (t.attackers.empty()) {
            throw ParseError(path + ".attackers", "threat " + t.id + " has no attackers");
        }
        if (t.identifiers.empty()) {
            throw ParseError(path + ".identifiers", "threat " + t.id + " has no identifiers");
        }
        if (std::find(c.capabilities.begin(), c.capabilities.end(), t.capability) ==
            c.capabilities.end()) {
            throw ParseError(path + ".capability", "capability not in catalog enumeration");
        }
        for (const auto& g : t.goals) {
            if (std::find(c.categories.begin(), c.categories.end(), g) == c.categories.end()) {
                throw ParseError(path + ".goals", "goal " + to_string(g) + " not in catalog categories");
            }
        }
        for (const auto& ident : t.identifiers) {
            if (!c.has_identifier(ident.name)) {
                throw ParseError(path + ".identifiers",
                                 "identifier \"" + ident.name + "\" not in catalog taxonomy");
            }
        }
        if (!t.applicability.empty()) {
            try {
                Predicate::parse(t.applicability);
            } catch (const Error& e) {
                throw ParseError(path + ".applicability", e.what());
            }
        }
    }

    std::set<std::string> strategy_ids;
    std::set<std::string> claimed_toggles;
    for (std::size_t i = 0; i < c.strategies.size(); ++i) {
        const MitigationStrategy& s = c.strategies[i];
        const std::string path = "strategies[" + std::to_string(i) + "]";
        if (s.id.empty()) {
            throw ParseError(path + ".id", "empty strategy id");
        }
        if (!strategy_ids.insert(s.id).second) {
            throw ParseError(path + ".id", "duplicate strategy id " + s.id);
        }
        for (const auto& a : s.addresses) {
            if (threat_ids.find(a.threat_id) == threat_ids.end()) {
                throw ReferenceError("strategy \"" + s.id + "\" addresses unknown threat id " +
                                     a.threat_id);
            }
        }
        for (const auto& toggle : s.sim_toggles) {
            const auto& known = known_sim_toggle_names();
            if (std::find(known.begin(), known.end(), toggle) == known.end()) {
                throw ParseError(path + ".sim_toggles", "unknown simulation toggle \"" + toggle + "\"");
            }
            if (!claimed_toggles.insert(toggle).second) {
                throw ParseError(path + ".sim_toggles",
                                 "toggle \"" + toggle + "\" bound by more than one strategy");
            }
        }
    }

    std::set<PrincipleName> principle_names;
    for (const auto& p : c.principles) {
        principle_names.insert(p.name);
        if (!p.audit_rule.empty()) {
            try {
                Predicate::parse(p.audit_rule);
            } catch (const Error& e) {
                throw ParseError("principles", std::string("audit rule for ") + to_string(p.name) +
                                                   ": " + e.what());
            }
        }
    }

    if (!c.allow_extensions) {
        if (c.categories.size() != kThreatCategoryCount) {
            throw ParseError("categories", "expected exactly 10 threat categories");
        }
        if (c.capabilities.size() != kAttackerCapabilityCount) {
            throw ParseError("capabilities", "expected exactly 6 attacker capabilities");
        }
        if (c.principles.size() != kPrincipleCount || principle_names.size() != kPrincipleCount) {
            throw ParseError("principles", "expected exactly 8 distinct privacy principles");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

nlohmann::json serialize_catalog(const Catalog& c) {
    json doc;
    doc["tptm_catalog_version"] = kCatalogSchemaVersion;
    if (c.allow_extensions) doc["allow_extensions"] = true;

    json categories = json::array();
    for (auto v : c.categories) categories.push_back(to_string(v));
    doc["categories"] = categories;

    json capabilities = json::array();
    for (auto v : c.capabilities) capabilities.push_back(to_string(v));
    doc["capabilities"] = capabilities;

    json identifiers = json::array();
    for (const auto& i : c.identifiers) {
        identifiers.push_back({{"name", i.name}, {"kind", to_string(i.kind)}});
    }
    doc["identifiers"] = identifiers;

    json threats = json::array();
    for (const auto& t : c.threats) {
        json goals = json::array();
        for (auto g : t.goals) goals.push_back(to_string(g));
        json cited = json::array();
        for (const auto& i : t.identifiers) {
            cited.push_back({{"name", i.name}, {"kind", to_string(i.kind_as_cited)}});
        }
        threats.push_back({{"id", t.id},
                           {"title", t.title},
                           {"capability", to_string(t.capability)},
                           {"goals", goals},
                           {"attackers", t.attackers},
                           {"identifiers", cited},
                           {"details", t.details},
                           {"applicability", t.applicability}});
    }
    doc["threats"] = threats;

    json strategies = json::array();
    for (const auto& s : c.strategies) {
        json addresses = json::array();
        for (const auto& a : s.addresses) {
            addresses.push_back({{"threat", a.threat_id}, {"effect", to_string(a.effect)}});
        }
        strategies.push_back({{"id", s.id},
                              {"group", to_string(s.group)},
                              {"details", s.details},
                              {"addresses", addresses},
                              {"sim_toggles", s.sim_toggles}});
    }
    doc["strategies"] = strategies;

    json principles = json::array();
    for (const auto& p : c.principles) {
        principles.push_back({{"name", to_string(p.name)}, {"audit_rule", p.audit_rule}});
    }
    doc["principles"] = principles;

    return doc;
}

namespace {

const json& require_field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(path + "." + key, "missing required field");
    }
    return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require_field(obj, key, path);
    if (!v.is_string()) throw ParseError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

const json& require_array(const json& obj, const char* key, const std::string& path) {
    const json& v = require_field(obj, key, path);
    if (!v.is_array()) throw ParseError(path + "." + key, "expected an array");
    return v;
}

}  // namespace

Catalog load_catalog(const json& doc) {
    if (!doc.is_object()) throw ParseError("", "catalog document must be a JSON object");
    if (!doc.contains("tptm_catalog_version") || !doc["tptm_catalog_version"].is_number_integer() ||
        doc["tptm_catalog_version"].get<int>() != kCatalogSchemaVersion) {
        throw ParseError("tptm_catalog_version", "missing or unsupported catalog schema version");
    }

    Catalog c;
    c.allow_extensions = doc.value("allow_extensions", false);

    std::size_t idx = 0;
    for (const auto& v : require_array(doc, "categories", "")) {
        const std::string path = "categories[" + std::to_string(idx++) + "]";
        if (!v.is_string()) throw ParseError(path, "expected a string");
        try {
            c.categories.push_back(threat_category_from_string(v.get<std::string>()));
        } catch (const ParseError& e) {
            if (!c.allow_extensions) throw ParseError(path, e.what());
            // extension categories are dropped rather than modeled
        }
    }

    idx = 0;
    for (const auto& v : require_array(doc, "capabilities", "")) {
        const std::string path = "capabilities[" + std::to_string(idx++) + "]";
        if (!v.is_string()) throw ParseError(path, "expected a string");
        c.capabilities.push_back(capability_from_string(v.get<std::string>()));
    }

    idx = 0;
    for (const auto& v : require_array(doc, "identifiers", "")) {
        const std::string path = "identifiers[" + std::to_string(idx++) + "]";
        PrivacyIdentifier ident;
        ident.name = require_string(v, "name", path);
        ident.kind = identifier_kind_from_string(require_string(v, "kind", path));
        c.identifiers.push_back(std::move(ident));
    }

    idx = 0;
    for (const auto& v : require_array(doc, "threats", "")) {
        const std::string path = "threats[" + std::to_string(idx++) + "]";
        ThreatEntry t;
        t.id = require_string(v, "id", path);
        t.title = require_string(v, "title", path);
        try {
            t.capability = capability_from_string(require_string(v, "capability", path));
        } catch (const ParseError& e) {
            throw ParseError(path + ".capability", e.what());
        }
        for (const auto& g : require_array(v, "goals", path)) {
            if (!g.is_string()) throw ParseError(path + ".goals", "expected strings");
            try {
                t.goals.push_back(threat_category_from_string(g.get<std::string>()));
            } catch (const ParseError& e) {
                throw ParseError(path + ".goals", e.what());
            }
        }
        for (const auto& a : require_array(v, "attackers", path)) {
            if (!a.is_string()) throw ParseError(path + ".attackers", "expected strings");
            t.attackers.push_back(a.get<std::string>());
        }
        std::size_t iidx = 0;
        for (const auto& i : require_array(v, "identifiers", path)) {
            const std::string ipath = path + ".identifiers[" + std::to_string(iidx++) + "]";
            CitedIdentifier cited;
            cited.name = require_string(i, "name", ipath);
            cited.kind_as_cited = identifier_kind_from_string(require_string(i, "kind", ipath));
            t.identifiers.push_back(std::move(cited));
        }
        t.details = require_string(v, "details", path);
        t.applicability = require_string(v, "applicability", path);
        c.threats.push_back(std::move(t));
    }

    idx = 0;
    for (const auto& v : require_array(doc, "strategies", "")) {
        const std::string path = "strategies[" + std::to_string(idx++) + "]";
        MitigationStrategy s;
        s.id = require_string(v, "id", path);
        try {
            s.group = strategy_group_from_string(require_string(v, "group", path));
        } catch (const ParseError& e) {
            throw ParseError(path + ".group", e.what());
        }
        s.details = require_string(v, "details", path);
        for (const auto& a : require_array(v, "addresses", path)) {
            AddressedThreat addr;
            addr.threat_id = require_string(a, "threat", path + ".addresses");
            addr.effect = effect_from_string(require_string(a, "effect", path + ".addresses"));
            s.addresses.push_back(std::move(addr));
        }
        if (v.contains("sim_toggles")) {
            for (const auto& toggle : require_array(v, "sim_toggles", path)) {
                if (!toggle.is_string()) throw ParseError(path + ".sim_toggles", "expected strings");
                s.sim_toggles.push_back(toggle.get<std::string>());
            }
        }
        c.strategies.push_back(std::move(s));
    }

    idx = 0;
    for (const auto& v : require_array(doc, "principles", "")) {
        const std::string path = "principles[" + std::to_string(idx++) + "]";
        PrivacyPrinciple p;
        try {
            p.name = principle_from_string(require_string(v, "name", path));
        } catch (const ParseError& e) {
            throw ParseError(path + ".name", e.what());
        }
        p.audit_rule = v.value("audit_rule", std::string());
        c.principles.push_back(std::move(p));
    }

    validate_catalog(c);
    return c;
}

Catalog load_catalog(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    return load_catalog(doc);
}

}  // namespace privlab
