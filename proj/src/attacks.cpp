#include "privlab/attacks.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace privlab {

// ---------------------------------------------------------------------------
// Linkage
// ---------------------------------------------------------------------------

std::vector<MovementProfile> linkage_attack(const std::vector<Sighting>& sightings,
                                            const std::vector<PublishedKey>& publication) {
    // Exhaustive re-derivation: identifier -> published key index.
    std::unordered_map<std::string, std::size_t> rpid_to_key;
    for (std::size_t i = 0; i < publication.size(); ++i) {
        TemporaryExposureKey tek{publication[i].key, publication[i].period_index};
        const int first = publication[i].period_index * kIntervalsPerPeriod;
        for (int interval = first; interval < first + kIntervalsPerPeriod; ++interval) {
            rpid_to_key.emplace(to_hex(derive_rpid(tek, interval).value), i);
        }
    }

    std::vector<std::vector<Sighting>> matched(publication.size());
    for (const auto& s : sightings) {
        auto it = rpid_to_key.find(to_hex(s.rpid));
        if (it != rpid_to_key.end()) matched[it->second].push_back(s);
    }

    std::vector<MovementProfile> profiles;
    for (std::size_t i = 0; i < publication.size(); ++i) {
        if (matched[i].empty()) continue;
        std::stable_sort(matched[i].begin(), matched[i].end(),
                         [](const Sighting& a, const Sighting& b) { return a.interval < b.interval; });
        std::vector<Position> positions;
        for (const auto& s : matched[i]) {
            if (std::find(positions.begin(), positions.end(), s.pos) == positions.end()) {
                positions.push_back(s.pos);
            }
        }
        if (positions.size() < 2) continue;  // a single place is not a movement profile
        profiles.push_back(MovementProfile{publication[i].key, matched[i], std::move(positions)});
    }
    return profiles;
}

// ---------------------------------------------------------------------------
// MAC correlation
// ---------------------------------------------------------------------------

std::vector<MacChain> mac_correlation(const std::vector<Sighting>& sightings) {
    std::map<std::string, std::vector<Sighting>> by_mac;
    for (const auto& s : sightings) by_mac[s.mac].push_back(s);

    std::vector<MacChain> chains;
    for (auto& [mac, group] : by_mac) {
        std::stable_sort(group.begin(), group.end(),
                         [](const Sighting& a, const Sighting& b) { return a.interval < b.interval; });
        std::set<std::string> rpids;
        for (const auto& s : group) rpids.insert(to_hex(s.rpid));
        if (rpids.size() < 2) continue;  // the address never bridged a rotation
        chains.push_back(MacChain{mac, group, static_cast<int>(rpids.size())});
    }
    return chains;
}

// ---------------------------------------------------------------------------
// Upload observation
// ---------------------------------------------------------------------------

AttackOutcome observe_upload(const UploadTranscript& transcript, bool on_path) {
    AttackOutcome outcome;
    outcome.threat_id = "EV001";
    if (on_path && transcript.payload_visible && !transcript.visible_teks.empty()) {
        outcome.details.push_back(AttackSuccessDetail{
            "on-path observer linked " + transcript.source_address + " to " +
            std::to_string(transcript.visible_teks.size()) + " key(s) [TEK, IP address]"});
    }
    if (transcript.accepted && !transcript.server_recorded_source.empty() &&
        transcript.server_recorded_source != "anonymized") {
        outcome.details.push_back(AttackSuccessDetail{
            "server endpoint stored source " + transcript.server_recorded_source +
            " alongside uploaded keys [TEK, IP address]"});
    }
    outcome.successes = static_cast<int>(outcome.details.size());
    return outcome;
}

AttackOutcome observe_uploads(const std::vector<UploadTranscript>& transcripts, bool on_path) {
    AttackOutcome outcome;
    outcome.threat_id = "EV001";
    for (const auto& t : transcripts) {
        AttackOutcome one = observe_upload(t, on_path);
        outcome.details.insert(outcome.details.end(), one.details.begin(), one.details.end());
    }
    outcome.successes = static_cast<int>(outcome.details.size());
    return outcome;
}

// ---------------------------------------------------------------------------
// Relay scoring
// ---------------------------------------------------------------------------

namespace {

std::string threat_for_mode(RelayMode mode) {
    switch (mode) {
        case RelayMode::RangeExtender: return "ST001";
        case RelayMode::ActiveRelay: return "ST002";
        case RelayMode::Wormhole: return "ST003";
    }
    return "ST003";
}

bool genuinely_colocated(const SimTrace& trace, const std::string& a, const std::string& b,
                         int radio_range) {
    for (const auto& record : trace.intervals) {
        auto pa = record.positions.find(a);
        auto pb = record.positions.find(b);
        if (pa == record.positions.end() || pb == record.positions.end()) continue;
        if (within_range(pa->second, pb->second, radio_range)) return true;
    }
    return false;
}

}  // namespace

std::vector<AttackOutcome> relay_outcomes(const Scenario& scenario, const SimTrace& trace) {
    std::map<std::string, RelayMode> relay_modes;
    for (const auto& a : scenario.attackers) {
        if (a.type == "relay") relay_modes[a.id] = a.mode;
    }
    std::map<std::string, AttackOutcome> by_threat;
    for (const auto& [id, mode] : relay_modes) {
        const std::string threat = threat_for_mode(mode);
        if (!by_threat.count(threat)) by_threat[threat] = AttackOutcome{threat, 0, {}};
    }
    if (by_threat.empty()) return {};

    // Identifier -> published key, for attributing log entries to keys.
    std::unordered_map<std::string, std::string> rpid_to_key_hex;
    for (const auto& pk : trace.all_published_keys()) {
        TemporaryExposureKey tek{pk.key, pk.period_index};
        const int first = pk.period_index * kIntervalsPerPeriod;
        for (int interval = first; interval < first + kIntervalsPerPeriod; ++interval) {
            rpid_to_key_hex.emplace(to_hex(derive_rpid(tek, interval).value), to_hex(pk.key));
        }
    }

    for (const auto& record : trace.intervals) {
        for (const auto& n : record.notifications) {
            const std::string key_hex = to_hex(n.tek_key);
            auto owner = trace.key_owner.find(key_hex);
            // A notification is a false alarm when its receiver never shared
            // radio range with the key's owner.
            if (owner != trace.key_owner.end() &&
                trace.position_of(owner->second, 0).has_value() &&
                genuinely_colocated(trace, n.device, owner->second, scenario.radio_range)) {
                continue;
            }
            // Which relays fed matching identifiers into the receiver's log?
            std::set<std::string> contributors;
            for (const auto& past : trace.intervals) {
                if (past.interval > record.interval) break;
                for (const auto& r : past.receptions) {
                    if (!r.injected || r.receiver != n.device) continue;
                    auto it = rpid_to_key_hex.find(to_hex(r.rpid));
                    if (it != rpid_to_key_hex.end() && it->second == key_hex) {
                        contributors.insert(r.attacker);
                    }
                }
            }
            for (const auto& attacker : contributors) {
                auto mode = relay_modes.find(attacker);
                if (mode == relay_modes.end()) continue;
                AttackOutcome& outcome = by_threat[threat_for_mode(mode->second)];
                outcome.details.push_back(AttackSuccessDetail{
                    "false notification on " + n.device + " for key " + key_hex.substr(0, 8) +
                    "... caused by " + attacker + " at interval " +
                    std::to_string(record.interval)});
            }
        }
    }

    std::vector<AttackOutcome> out;
    for (auto& [threat, outcome] : by_threat) {
        outcome.successes = static_cast<int>(outcome.details.size());
        out.push_back(std::move(outcome));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cross-app upload, coercion, store breach
// ---------------------------------------------------------------------------

AttackOutcome cross_app_outcome(const SimTrace& trace) {
    AttackOutcome outcome;
    outcome.threat_id = "ST004";
    for (const auto& attempt : trace.cross_app_attempts) {
        if (!attempt.accepted) continue;
        outcome.details.push_back(AttackSuccessDetail{
            "upload by " + attempt.attacker + " accepted at interval " +
            std::to_string(attempt.at_interval) + " with a code issued to another app"});
    }
    outcome.successes = static_cast<int>(outcome.details.size());
    return outcome;
}

std::vector<AttackOutcome> coercion_outcomes(const SimTrace& trace) {
    if (trace.coercions.empty()) return {};
    std::vector<AttackSuccessDetail> details;
    for (const auto& view : trace.coercions) {
        if (view.infected) {
            details.push_back(AttackSuccessDetail{"infection status of " + view.device});
        }
        for (const auto& e : view.exposures) {
            details.push_back(AttackSuccessDetail{
                "exposure details of " + view.device + " (interval " +
                std::to_string(e.interval) + ")"});
        }
        for (const auto& entry : view.log_entries) {
            details.push_back(AttackSuccessDetail{
                "contact log entry of " + view.device + " at interval " +
                std::to_string(entry.interval)});
        }
    }
    // One coercion mechanic backs three catalog threats; report each.
    std::vector<AttackOutcome> out;
    for (const char* threat : {"CA001", "CA003", "DD001"}) {
        out.push_back(AttackOutcome{threat, static_cast<int>(details.size()), details});
    }
    return out;
}

std::vector<AttackOutcome> breach_outcomes(const SimTrace& trace) {
    AttackOutcome key_server{"DD003", 0, {}};
    AttackOutcome telemetry{"DD002", 0, {}};
    bool saw_key_server = false;
    bool saw_telemetry = false;

    for (const auto& breach : trace.breaches) {
        if (breach.node == "key-server") {
            saw_key_server = true;
            for (const auto& record : breach.uploads) {
                for (const auto& tek : record.teks) {
                    key_server.details.push_back(AttackSuccessDetail{
                        "stored key " + to_hex(tek.key).substr(0, 8) + "... received at interval " +
                        std::to_string(record.received_at)});
                }
                if (record.source_address != "anonymized") {
                    key_server.details.push_back(AttackSuccessDetail{
                        "stored source address " + record.source_address + " from interval " +
                        std::to_string(record.received_at)});
                }
            }
            for (const auto& [node, peers] : breach.contact_graph) {
                for (const auto& peer : peers) {
                    key_server.details.push_back(
                        AttackSuccessDetail{"contact graph edge " + node + " -> " + peer});
                }
            }
        } else if (breach.node == "telemetry-sink") {
            saw_telemetry = true;
            for (const auto& record : breach.telemetry) {
                telemetry.details.push_back(AttackSuccessDetail{
                    "telemetry record for " + record.device_id + " at interval " +
                    std::to_string(record.received_at) + " [device information, user details]"});
            }
        }
    }

    std::vector<AttackOutcome> out;
    if (saw_telemetry) {
        telemetry.successes = static_cast<int>(telemetry.details.size());
        out.push_back(std::move(telemetry));
    }
    if (saw_key_server) {
        key_server.successes = static_cast<int>(key_server.details.size());
        out.push_back(std::move(key_server));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregate
// ---------------------------------------------------------------------------

std::vector<AttackOutcome> compute_attack_outcomes(const Scenario& scenario,
                                                   const SimTrace& trace) {
    std::vector<AttackOutcome> outcomes;

    bool has_sniffer = false;
    bool has_observer = false;
    bool observer_on_path = false;
    bool has_cross_app = false;
    for (const auto& a : scenario.attackers) {
        if (a.type == "sniffer") has_sniffer = true;
        if (a.type == "upload-observer") {
            has_observer = true;
            observer_on_path = observer_on_path || a.on_path;
        }
        if (a.type == "cross-app-upload") has_cross_app = true;
    }

    if (has_observer) {
        outcomes.push_back(observe_uploads(trace.transcripts, observer_on_path));
    }

    if (has_sniffer) {
        const std::vector<PublishedKey> publication = trace.all_published_keys();
        const std::vector<MovementProfile> profiles = linkage_attack(trace.sightings, publication);
        for (const char* threat : {"EV002", "EV003"}) {
            AttackOutcome outcome{threat, 0, {}};
            for (const auto& p : profiles) {
                std::string description =
                    "movement profile for key " + to_hex(p.tek_key).substr(0, 8) + "... across " +
                    std::to_string(p.distinct_positions.size()) + " sniffer positions:";
                for (const auto& pos : p.distinct_positions) {
                    description +=
                        " (" + std::to_string(pos.x) + "," + std::to_string(pos.y) + ")";
                }
                outcome.details.push_back(AttackSuccessDetail{description});
            }
            outcome.successes = static_cast<int>(outcome.details.size());
            outcomes.push_back(std::move(outcome));
        }
        AttackOutcome ev004{"EV004", 0, {}};
        for (const auto& chain : mac_correlation(trace.sightings)) {
            ev004.details.push_back(AttackSuccessDetail{
                "address " + chain.mac + " chained " + std::to_string(chain.distinct_rpids) +
                " rotating identifiers over " + std::to_string(chain.sightings.size()) +
                " sightings"});
        }
        ev004.successes = static_cast<int>(ev004.details.size());
        outcomes.push_back(std::move(ev004));
    }

    for (auto& outcome : relay_outcomes(scenario, trace)) outcomes.push_back(std::move(outcome));
    if (has_cross_app) outcomes.push_back(cross_app_outcome(trace));
    for (auto& outcome : coercion_outcomes(trace)) outcomes.push_back(std::move(outcome));
    for (auto& outcome : breach_outcomes(trace)) outcomes.push_back(std::move(outcome));

    std::sort(outcomes.begin(), outcomes.end(),
              [](const AttackOutcome& a, const AttackOutcome& b) { return a.threat_id < b.threat_id; });
    return outcomes;
}

}  // namespace privlab
