#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "privlab/protocol.hpp"

#include <nlohmann/json_fwd.hpp>

namespace privlab {

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct Position {
    int x = 0;
    int y = 0;

    bool operator==(const Position&) const = default;
};

// Chebyshev distance on the grid stands in for radio reach.
bool within_range(Position a, Position b, int radio_range);

struct Waypoint {
    int interval = 0;
    int x = 0;
    int y = 0;

    bool operator==(const Waypoint&) const = default;
};

struct DeviceSpec {
    std::string id;
    std::string app_id = "app-main";
    std::vector<Waypoint> trajectory;  // sorted by interval, hold-last semantics

    bool operator==(const DeviceSpec&) const = default;
};

struct DiagnosisEvent {
    std::string device_id;
    int interval = 0;
    std::optional<int> upload_interval;  // default: interval + 2

    bool operator==(const DiagnosisEvent&) const = default;
};

enum class RelayMode { RangeExtender, ActiveRelay, Wormhole };
std::string to_string(RelayMode m);
RelayMode relay_mode_from_string(const std::string& s);

// One attacker placement. `type` selects which members apply:
//   sniffer          — position
//   relay            — mode, from, to, delay_intervals (active-relay only),
//                      start/end interval window
//   upload-observer  — on_path
//   store-breach     — node ("key-server" or "telemetry-sink"), at_interval
//   coercion         — device_id, at_interval
//   cross-app-upload — device_id (victim whose code is redeemed), app_id,
//                      at_interval
struct AttackerSpec {
    std::string id;
    std::string type;
    Position position{};
    RelayMode mode = RelayMode::Wormhole;
    Position from{};
    Position to{};
    int delay_intervals = 0;
    int start_interval = 0;
    int end_interval = -1;  // exclusive; -1 = scenario end
    bool on_path = true;
    std::string node;
    int at_interval = 0;
    std::string device_id;
    std::string app_id;

    bool operator==(const AttackerSpec&) const = default;
};

constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    int duration_intervals = 0;
    int grid_width = 0;
    int grid_height = 0;
    int radio_range = 0;
    int min_overlap_intervals = 1;
    ArchitectureKind architecture = ArchitectureKind::PartiallyDecentralized;
    std::string profile;  // optional mitigation profile path, relative to the scenario file
    std::vector<DeviceSpec> devices;
    std::vector<DiagnosisEvent> diagnoses;
    std::vector<AttackerSpec> attackers;

    const DeviceSpec* find_device(const std::string& id) const;

    bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario(const std::string& text);
nlohmann::json serialize_scenario(const Scenario& scenario);

// Structural checks beyond parsing: waypoints sorted and on the grid,
// diagnosis/attacker references resolvable, intervals inside the run.
// Throws ValidationError; run_scenario calls it before simulating.
void validate_scenario(const Scenario& scenario);

// ---------------------------------------------------------------------------
// Mitigation toggles driving simulation behavior
// ---------------------------------------------------------------------------

struct MitigationConfig {
    bool tls_on = false;
    bool header_stripping = false;
    bool hmac_tags = false;
    bool sync_rotation = false;
    std::optional<int> retention_days;  // nullopt = indefinite; one day = one period
    bool data_minimization = false;
    bool telemetry_default_on = true;
    bool verification_binding = false;
    bool perturbation_on = false;

    bool operator==(const MitigationConfig&) const = default;
};

nlohmann::json mitigation_config_json(const MitigationConfig& config);
MitigationConfig mitigation_config_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

struct Sighting {
    std::string sniffer_id;
    Position pos{};
    int interval = 0;
    Bytes16 rpid{};
    std::string mac;
};

struct TraceBroadcast {
    std::string device;
    Bytes16 rpid{};
    std::string mac;
    std::optional<int> tag_interval;
};

struct TraceReception {
    std::string receiver;
    Bytes16 rpid{};
    std::string mac;
    std::optional<int> tag_interval;
    bool injected = false;
    std::string attacker;  // empty for genuine receptions
};

struct TraceInjection {
    std::string attacker;
    Position pos{};
    Bytes16 rpid{};
    std::string mac;
    std::optional<int> tag_interval;
};

struct TraceUpload {
    std::string uploader;  // device or attacker id
    std::vector<Bytes16> teks;
    bool accepted = false;
    UploadRejectReason reject_reason = UploadRejectReason::None;
    std::string source_address;
};

struct TraceNotification {
    std::string device;
    Bytes16 tek_key{};
    int matched_intervals = 0;
};

struct TracePublication {
    int period = 0;
    std::vector<PublishedKey> keys;
};

struct IntervalRecord {
    int interval = 0;
    std::map<std::string, Position> positions;
    std::vector<TraceBroadcast> broadcasts;
    std::vector<TraceReception> receptions;
    std::vector<TraceInjection> injections;
    std::vector<TraceUpload> uploads;
    std::vector<TracePublication> publications;
    std::vector<TraceNotification> notifications;
};

struct BreachRecord {
    std::string attacker;
    std::string node;
    int at_interval = 0;
    std::vector<UploadRecord> uploads;        // key-server view
    std::vector<TelemetryRecord> telemetry;   // telemetry-sink view
    std::map<std::string, std::set<std::string>> contact_graph;
};

struct CoercionRecord {
    std::string attacker;
    std::string device;
    int at_interval = 0;
    bool infected = false;
    std::vector<ExposureEvent> exposures;
    std::vector<ContactLogEntry> log_entries;  // post-minimization view
    bool metadata_included = false;            // macs present in the log view
};

struct CrossAppRecord {
    std::string attacker;
    int at_interval = 0;
    bool accepted = false;
    UploadRejectReason reject_reason = UploadRejectReason::None;
};

struct SimTrace {
    std::string scenario_name;
    std::uint64_t seed = 0;
    MitigationConfig config;
    std::vector<IntervalRecord> intervals;

    // Side records consumed by attack analysis.
    std::vector<Sighting> sightings;
    std::vector<UploadTranscript> transcripts;
    std::vector<BreachRecord> breaches;
    std::vector<CoercionRecord> coercions;
    std::vector<CrossAppRecord> cross_app_attempts;

    // Final states, used by oracles and reporting.
    std::map<std::string, DeviceState> final_devices;
    ServerState final_server;

    // Ground-truth key ownership (uploader of each accepted key).
    std::map<std::string, std::string> key_owner;  // key hex -> uploader id

    std::vector<PublishedKey> all_published_keys() const;
    std::optional<Position> position_of(const std::string& device, int interval) const;
};

// Deterministic discrete-event run: per interval, movement, identifier
// rotation, broadcast, reception, attacker actions, scheduled uploads, then
// period-boundary publication, purge and matching.
SimTrace run_scenario(const Scenario& scenario, const MitigationConfig& config);

nlohmann::json trace_json(const SimTrace& trace);
std::string trace_text(const SimTrace& trace);  // one line per event, diff-friendly

}  // namespace privlab
