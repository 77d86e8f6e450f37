#pragma once

#include <string>
#include <vector>

#include "privlab/sim.hpp"

namespace privlab {

// Measured result of one attack family against one trace. The invariant
// successes == details.size() holds everywhere.
struct AttackSuccessDetail {
    std::string description;
};

struct AttackOutcome {
    std::string threat_id;
    int successes = 0;
    std::vector<AttackSuccessDetail> details;
};

// ---------------------------------------------------------------------------
// Analysis attacks: pure post-processing over attacker-visible artifacts
// (sightings, publications, transcripts, breached stores). None of them read
// simulator ground truth.
// ---------------------------------------------------------------------------

// Movement profile linkage: re-derive every identifier of every published
// key, join against sniffer sightings, and keep keys seen at two or more
// distinct sniffer positions.
struct MovementProfile {
    Bytes16 tek_key{};
    std::vector<Sighting> trajectory;        // matched sightings, time order
    std::vector<Position> distinct_positions;
};

std::vector<MovementProfile> linkage_attack(const std::vector<Sighting>& sightings,
                                            const std::vector<PublishedKey>& publication);

// Address-based chaining: sightings sharing a link-layer address across
// identifier rotations betray one device without any published key.
struct MacChain {
    std::string mac;
    std::vector<Sighting> sightings;  // time order
    int distinct_rpids = 0;
};

std::vector<MacChain> mac_correlation(const std::vector<Sighting>& sightings);

// Upload metadata observation: an on-path observer learns source-to-key
// associations from cleartext payloads; the receiving endpoint learns them
// from stored source addresses.
AttackOutcome observe_upload(const UploadTranscript& transcript, bool on_path);
AttackOutcome observe_uploads(const std::vector<UploadTranscript>& transcripts, bool on_path);

// ---------------------------------------------------------------------------
// Scoring of in-simulation attacks. These read the trace as the experiment
// record (including ground-truth positions) to decide which notifications
// were false alarms and who caused them.
// ---------------------------------------------------------------------------

std::vector<AttackOutcome> relay_outcomes(const Scenario& scenario, const SimTrace& trace);
AttackOutcome cross_app_outcome(const SimTrace& trace);
std::vector<AttackOutcome> coercion_outcomes(const SimTrace& trace);   // CA001, CA003, DD001
std::vector<AttackOutcome> breach_outcomes(const SimTrace& trace);     // DD002 and/or DD003

// Every attack outcome the scenario's attacker placements produce, one entry
// per threat id, ordered by threat id.
std::vector<AttackOutcome> compute_attack_outcomes(const Scenario& scenario,
                                                   const SimTrace& trace);

}  // namespace privlab
