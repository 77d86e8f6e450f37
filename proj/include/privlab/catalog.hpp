#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "privlab/util.hpp"

#include <nlohmann/json_fwd.hpp>

namespace privlab {

// ---------------------------------------------------------------------------
// Closed enumerations of the threat model vocabulary.
// ---------------------------------------------------------------------------

enum class ThreatCategory {
    Surveillance,
    StoredDataCompromise,
    Misattribution,
    SecondaryUse,
    Exclusion,
    Linkability,
    Identification,
    Detection,
    NonRepudiation,
    IntegrityCompromise,
};
constexpr int kThreatCategoryCount = 10;

enum class AttackerCapability {
    Coercion,
    DataDisclosure,
    Eavesdropping,
    Replay,
    Spoofing,
    Tampering,
};
constexpr int kAttackerCapabilityCount = 6;

// Threats are grouped per capability family; replay, spoofing and tampering
// share the combined spoof/trace/replay group.
enum class ThreatGroup {
    Coercion,
    DataDisclosure,
    Eavesdropping,
    SpoofTraceReplay,
};

enum class IdentifierKind { Direct, Indirect };

enum class MitigationEffect { None, Minimizes, Mitigates };  // ordered weakest to strongest

enum class StrategyGroup { PrivacyByDesign, SecureCommunication, ReferenceArchitecture };

enum class PrincipleName {
    Lawful,
    InformedConsent,
    PurposeBinding,
    IdentityControl,
    Transparency,
    Accountability,
    Proportionality,
    DataRetention,
};
constexpr int kPrincipleCount = 8;

std::string to_string(ThreatCategory c);
std::string to_string(AttackerCapability c);
std::string to_string(IdentifierKind k);
std::string to_string(MitigationEffect e);
std::string to_string(StrategyGroup g);
std::string to_string(PrincipleName p);
std::string display_name(ThreatCategory c);  // "stored data compromise" etc.

ThreatCategory threat_category_from_string(const std::string& s);
AttackerCapability capability_from_string(const std::string& s);
IdentifierKind identifier_kind_from_string(const std::string& s);
MitigationEffect effect_from_string(const std::string& s);
StrategyGroup strategy_group_from_string(const std::string& s);
PrincipleName principle_from_string(const std::string& s);

ThreatGroup group_of(AttackerCapability c);
std::string group_label(ThreatGroup g);

// ---------------------------------------------------------------------------
// Catalog entry types
// ---------------------------------------------------------------------------

struct PrivacyIdentifier {
    std::string name;
    IdentifierKind kind = IdentifierKind::Indirect;  // canonical taxonomy kind

    bool operator==(const PrivacyIdentifier&) const = default;
};

// Identifier citation attached to one threat; the kind is the one cited by
// that threat's table row, which can disagree with the canonical taxonomy.
struct CitedIdentifier {
    std::string name;
    IdentifierKind kind_as_cited = IdentifierKind::Indirect;

    bool operator==(const CitedIdentifier&) const = default;
};

struct ThreatEntry {
    std::string id;  // matches (CA|DD|EV|ST)[0-9]{3}
    std::string title;
    AttackerCapability capability = AttackerCapability::Coercion;
    std::vector<ThreatCategory> goals;       // non-empty, unique, source order kept
    std::vector<std::string> attackers;      // non-empty, source order kept
    std::vector<CitedIdentifier> identifiers;  // non-empty, source order kept
    std::string details;
    std::string applicability;  // predicate text, grammar in predicate.hpp

    ThreatGroup group() const { return group_of(capability); }

    bool operator==(const ThreatEntry&) const = default;
};

struct AddressedThreat {
    std::string threat_id;
    MitigationEffect effect = MitigationEffect::Mitigates;

    bool operator==(const AddressedThreat&) const = default;
};

struct MitigationStrategy {
    std::string id;
    StrategyGroup group = StrategyGroup::PrivacyByDesign;
    std::string details;
    std::vector<AddressedThreat> addresses;
    // Names of the MitigationConfig flags this strategy drives in simulation.
    // Empty for organizational strategies that only influence engine verdicts.
    std::vector<std::string> sim_toggles;

    bool operator==(const MitigationStrategy&) const = default;
};

struct PrivacyPrinciple {
    PrincipleName name = PrincipleName::Lawful;
    // Predicate over the system model that must hold for the principle to be
    // satisfied. Empty means the principle is not machine-auditable and the
    // audit always passes.
    std::string audit_rule;

    bool operator==(const PrivacyPrinciple&) const = default;
};

constexpr int kCatalogSchemaVersion = 1;

class Catalog {
public:
    std::vector<ThreatCategory> categories;
    std::vector<AttackerCapability> capabilities;
    std::vector<PrivacyIdentifier> identifiers;
    std::vector<ThreatEntry> threats;
    std::vector<MitigationStrategy> strategies;
    std::vector<PrivacyPrinciple> principles;
    bool allow_extensions = false;

    const ThreatEntry* find_threat(const std::string& id) const;
    const ThreatEntry& threat(const std::string& id) const;  // throws NotFoundError
    const MitigationStrategy* find_strategy(const std::string& id) const;
    const MitigationStrategy& strategy(const std::string& id) const;  // throws NotFoundError
    const PrivacyIdentifier* find_identifier(const std::string& name) const;
    bool has_identifier(const std::string& name) const { return find_identifier(name) != nullptr; }

    bool operator==(const Catalog&) const = default;
};

// Strategies addressing one threat, with their effect, in catalog order.
std::vector<std::pair<const MitigationStrategy*, MitigationEffect>> mitigations_for(
    const Catalog& catalog, const std::string& threat_id);

// All threats in the capability's group, in catalog order.
std::vector<const ThreatEntry*> threats_for_capability(const Catalog& catalog,
                                                       AttackerCapability capability);

// Strongest effect any strategy in the catalog applies to the threat.
MitigationEffect best_effect(const Catalog& catalog, const std::string& threat_id);

// The built-in target privacy threat model for exposure notification systems:
// 15 threats, 13 mitigation strategies, 10 categories, 6 capabilities,
// 8 principles, and the full strategy-to-threat effect mapping.
const Catalog& builtin_catalog();

Catalog load_catalog(const nlohmann::json& doc);
Catalog load_catalog(const std::string& text);
nlohmann::json serialize_catalog(const Catalog& catalog);

// Names of MitigationConfig flags a catalog may bind via sim_toggles.
const std::vector<std::string>& known_sim_toggle_names();

}  // namespace privlab
