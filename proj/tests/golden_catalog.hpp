// Golden transcription of the threat tables and the mitigation mapping,
// kept as flat strings so the fidelity check stays independent of how the
// catalog code builds its entries. Asterisked ids in `addresses` mark
// minimizes-only mappings, mirroring the source table's footnote.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "privlab/catalog.hpp"

namespace golden {

struct GoldenThreat {
    const char* id;
    const char* capability;
    const char* goals;        // comma-separated, row order
    const char* attackers;    // comma-separated, row order
    const char* identifiers;  // "name (D)" / "name (I)", row order
};

inline const std::vector<GoldenThreat>& threats() {
    static const std::vector<GoldenThreat> rows = {
        {"CA001", "coercion", "stored-data-compromise, identification",
         "authorities, organizations, employers, assailants",
         "infection status (D), exposure details (I)"},
        {"CA002", "coercion", "secondary-use", "authorities, organizations",
         "infection status (D), exposure details (I)"},
        {"CA003", "coercion", "stored-data-compromise, identification",
         "authorities, hackers, assailants", "infection status (D), exposure details (I)"},
        {"CA004", "coercion", "stored-data-compromise, identification",
         "authorities, hackers, assailants",
         "infection status (D), exposure details (I), other personal information (I)"},
        {"DD001", "data-disclosure", "stored-data-compromise, identification",
         "hackers, organizers, assailants", "infection status (D), exposure details (I)"},
        {"DD002", "data-disclosure", "stored-data-compromise, identification, linkability",
         "authorities, hackers, assailants",
         "infection status (D), exposure details (I), user details (D)"},
        {"DD003", "data-disclosure", "stored-data-compromise, identification, linkability",
         "authorities, hackers, assailants",
         "infection status (D), exposure details (I), user details (D)"},
        {"EV001", "eavesdropping", "identification, surveillance, linkability",
         "authorities, organizations, hackers",
         "TEK (D), IP address (I), device information (I)"},
        {"EV002", "eavesdropping", "identification, surveillance, linkability",
         "authorities, organizations, hackers",
         "TEK (D), IP address (I), device information (I), location data (I)"},
        {"EV003", "eavesdropping", "identification, surveillance, linkability",
         "authorities, organizations, hackers",
         "TEK (D), IP address (I), device information (I), location data (I)"},
        {"EV004", "eavesdropping", "identification, surveillance, linkability",
         "authorities, organizations, hackers",
         "IP address (I), device information (I), location data (I)"},
        {"ST001", "spoofing", "integrity-compromise",
         "hackers, authorities, organizations, employers, assailants",
         "infection status (D), location data (I)"},
        {"ST002", "replay", "integrity-compromise",
         "hackers, authorities, organizations, employers, assailants",
         "infection status (D), location data (I)"},
        {"ST003", "replay", "integrity-compromise, misattribution, exclusion",
         "hackers, authorities, organizations, employers, assailants",
         "infection status (D), location data (I)"},
        {"ST004", "spoofing", "stored-data-compromise, identification",
         "authorities, service provider, employers, hackers", "infection status (D)"},
    };
    return rows;
}

struct GoldenStrategy {
    const char* id;
    const char* group;
    const char* addresses;  // "*" suffix = minimizes; empty string = addresses nothing
};

inline const std::vector<GoldenStrategy>& strategies() {
    static const std::vector<GoldenStrategy> rows = {
        {"data-minimization", "privacy-by-design", "DD002, DD003"},
        {"data-separation", "privacy-by-design", "DD002"},
        {"data-perturbation", "privacy-by-design", "DD002, DD003"},
        {"inform", "privacy-by-design", "CA004"},
        {"control", "privacy-by-design", "CA001*, CA002*, CA003*, DD001*"},
        {"visibility", "privacy-by-design", ""},
        {"regulation", "privacy-by-design", ""},
        {"ssl-certificates", "secure-communication", "EV001"},
        {"header-stripping", "secure-communication", "EV001"},
        {"hmac-enhancements", "secure-communication", "EV002*, EV003*, ST002*, ST001*"},
        {"reference-architecture-adoption", "reference-architecture", "EV002*, EV003*, ST004"},
        {"keep-components-current", "reference-architecture", "EV004"},
        {"security-assessment", "reference-architecture", "ST001*, ST002*, ST004*"},
    };
    return rows;
}

inline std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t b = item.find_first_not_of(' ');
        const std::size_t e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

// All differences between the catalog and the golden tables; empty means the
// catalog is a faithful transcription.
inline std::vector<std::string> fidelity_mismatches(const privlab::Catalog& catalog) {
    using namespace privlab;
    std::vector<std::string> errors;
    auto err = [&](const std::string& msg) { errors.push_back(msg); };

    if (catalog.threats.size() != 15) err("threat count != 15");
    if (catalog.strategies.size() != 13) err("strategy count != 13");
    if (catalog.categories.size() != 10) err("category count != 10");
    if (catalog.capabilities.size() != 6) err("capability count != 6");
    if (catalog.principles.size() != 8) err("principle count != 8");

    int pbd = 0, sc = 0, ra = 0;
    for (const auto& s : catalog.strategies) {
        if (s.group == StrategyGroup::PrivacyByDesign) ++pbd;
        if (s.group == StrategyGroup::SecureCommunication) ++sc;
        if (s.group == StrategyGroup::ReferenceArchitecture) ++ra;
    }
    if (pbd != 7) err("privacy-by-design strategy count != 7");
    if (sc != 3) err("secure-communication strategy count != 3");
    if (ra != 3) err("reference-architecture strategy count != 3");

    for (const auto& golden : threats()) {
        const ThreatEntry* t = catalog.find_threat(golden.id);
        if (!t) {
            err(std::string("missing threat ") + golden.id);
            continue;
        }
        if (to_string(t->capability) != golden.capability) {
            err(std::string(golden.id) + ": capability " + to_string(t->capability) +
                " != " + golden.capability);
        }
        std::vector<std::string> goals;
        for (auto g : t->goals) goals.push_back(to_string(g));
        if (goals != split_csv(golden.goals)) err(std::string(golden.id) + ": goals differ");
        if (t->attackers != split_csv(golden.attackers)) {
            err(std::string(golden.id) + ": attackers differ");
        }
        std::vector<std::string> idents;
        for (const auto& i : t->identifiers) {
            idents.push_back(i.name + " (" +
                             (i.kind_as_cited == IdentifierKind::Direct ? "D" : "I") + ")");
        }
        if (idents != split_csv(golden.identifiers)) {
            err(std::string(golden.id) + ": identifiers differ");
        }
    }

    // Full mapping matrix, including rows that address nothing.
    for (const auto& golden : strategies()) {
        const MitigationStrategy* s = catalog.find_strategy(golden.id);
        if (!s) {
            err(std::string("missing strategy ") + golden.id);
            continue;
        }
        if (to_string(s->group) != golden.group) {
            err(std::string(golden.id) + ": group differs");
        }
        std::vector<std::pair<std::string, MitigationEffect>> expected;
        for (auto& cell : split_csv(golden.addresses)) {
            if (!cell.empty() && cell.back() == '*') {
                expected.emplace_back(cell.substr(0, cell.size() - 1),
                                      MitigationEffect::Minimizes);
            } else {
                expected.emplace_back(cell, MitigationEffect::Mitigates);
            }
        }
        std::vector<std::pair<std::string, MitigationEffect>> actual;
        for (const auto& a : s->addresses) actual.emplace_back(a.threat_id, a.effect);
        if (expected != actual) err(std::string(golden.id) + ": addresses differ");
    }

    return errors;
}

}  // namespace golden
