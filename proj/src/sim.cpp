#include "privlab/sim.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace privlab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

bool within_range(Position a, Position b, int radio_range) {
    const int dx = std::abs(a.x - b.x);
    const int dy = std::abs(a.y - b.y);
    return std::max(dx, dy) <= radio_range;
}

std::string to_string(RelayMode m) {
    switch (m) {
        case RelayMode::RangeExtender: return "range-extender";
        case RelayMode::ActiveRelay: return "active-relay";
        case RelayMode::Wormhole: return "wormhole";
    }
    return "wormhole";
}

RelayMode relay_mode_from_string(const std::string& s) {
    if (s == "range-extender") return RelayMode::RangeExtender;
    if (s == "active-relay") return RelayMode::ActiveRelay;
    if (s == "wormhole") return RelayMode::Wormhole;
    throw ParseError("", "unknown relay mode: \"" + s + "\"");
}

const DeviceSpec* Scenario::find_device(const std::string& id) const {
    for (const auto& d : devices) {
        if (d.id == id) return &d;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Scenario JSON
// ---------------------------------------------------------------------------

namespace {

Position position_from_json(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw ParseError(path, "expected a position [x, y]");
    }
    return Position{v[0].get<int>(), v[1].get<int>()};
}

json position_to_json(Position p) { return json::array({p.x, p.y}); }

int require_int(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key) || !obj.at(key).is_number_integer()) {
        throw ParseError(path + "." + key, "missing integer field");
    }
    return obj.at(key).get<int>();
}

std::string require_str(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        throw ParseError(path + "." + key, "missing string field");
    }
    return obj.at(key).get<std::string>();
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw ParseError("", "scenario document must be a JSON object");
    if (!doc.contains("tptm_scenario_version") ||
        !doc["tptm_scenario_version"].is_number_integer() ||
        doc["tptm_scenario_version"].get<int>() != kScenarioSchemaVersion) {
        throw ParseError("tptm_scenario_version", "missing or unsupported scenario schema version");
    }

    Scenario s;
    s.name = require_str(doc, "name", "");
    if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) {
        throw ParseError("seed", "missing unsigned integer seed");
    }
    s.seed = doc["seed"].get<std::uint64_t>();
    s.duration_intervals = require_int(doc, "duration_intervals", "");
    if (!doc.contains("grid")) throw ParseError("grid", "missing grid");
    s.grid_width = require_int(doc["grid"], "width", "grid");
    s.grid_height = require_int(doc["grid"], "height", "grid");
    s.radio_range = require_int(doc, "radio_range", "");
    s.min_overlap_intervals = doc.value("min_overlap_intervals", 1);
    s.architecture = architecture_from_string(
        doc.value("architecture", std::string("partially-decentralized")));
    s.profile = doc.value("profile", std::string());

    if (!doc.contains("devices") || !doc["devices"].is_array()) {
        throw ParseError("devices", "missing devices array");
    }
    std::size_t idx = 0;
    for (const auto& v : doc["devices"]) {
        const std::string path = "devices[" + std::to_string(idx++) + "]";
        DeviceSpec d;
        d.id = require_str(v, "id", path);
        d.app_id = v.value("app_id", std::string("app-main"));
        if (!v.contains("trajectory") || !v["trajectory"].is_array() || v["trajectory"].empty()) {
            throw ParseError(path + ".trajectory", "missing non-empty trajectory");
        }
        for (const auto& w : v["trajectory"]) {
            if (!w.is_array() || w.size() != 3) {
                throw ParseError(path + ".trajectory", "expected waypoints [interval, x, y]");
            }
            d.trajectory.push_back(
                Waypoint{w[0].get<int>(), w[1].get<int>(), w[2].get<int>()});
        }
        s.devices.push_back(std::move(d));
    }

    if (doc.contains("diagnoses")) {
        idx = 0;
        for (const auto& v : doc["diagnoses"]) {
            const std::string path = "diagnoses[" + std::to_string(idx++) + "]";
            DiagnosisEvent e;
            e.device_id = require_str(v, "device", path);
            e.interval = require_int(v, "interval", path);
            if (v.contains("upload_interval")) {
                e.upload_interval = v["upload_interval"].get<int>();
            }
            s.diagnoses.push_back(std::move(e));
        }
    }

    if (doc.contains("attackers")) {
        idx = 0;
        for (const auto& v : doc["attackers"]) {
            const std::string path = "attackers[" + std::to_string(idx++) + "]";
            AttackerSpec a;
            a.id = require_str(v, "id", path);
            a.type = require_str(v, "type", path);
            if (a.type == "sniffer") {
                a.position = position_from_json(v.at("position"), path + ".position");
            } else if (a.type == "relay") {
                a.mode = relay_mode_from_string(require_str(v, "mode", path));
                a.from = position_from_json(v.at("from"), path + ".from");
                a.to = position_from_json(v.at("to"), path + ".to");
                a.delay_intervals = v.value("delay_intervals", 0);
                a.start_interval = v.value("start_interval", 0);
                a.end_interval = v.value("end_interval", -1);
            } else if (a.type == "upload-observer") {
                a.on_path = v.value("on_path", true);
            } else if (a.type == "store-breach") {
                a.node = require_str(v, "node", path);
                a.at_interval = require_int(v, "at_interval", path);
            } else if (a.type == "coercion") {
                a.device_id = require_str(v, "device", path);
                a.at_interval = require_int(v, "at_interval", path);
            } else if (a.type == "cross-app-upload") {
                a.device_id = require_str(v, "device", path);
                a.app_id = require_str(v, "app_id", path);
                a.at_interval = require_int(v, "at_interval", path);
            } else {
                throw ParseError(path + ".type", "unknown attacker type \"" + a.type + "\"");
            }
            s.attackers.push_back(std::move(a));
        }
    }

    return s;
}

Scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

nlohmann::json serialize_scenario(const Scenario& s) {
    json doc;
    doc["tptm_scenario_version"] = kScenarioSchemaVersion;
    doc["name"] = s.name;
    doc["seed"] = s.seed;
    doc["duration_intervals"] = s.duration_intervals;
    doc["grid"] = {{"width", s.grid_width}, {"height", s.grid_height}};
    doc["radio_range"] = s.radio_range;
    doc["min_overlap_intervals"] = s.min_overlap_intervals;
    doc["architecture"] = to_string(s.architecture);
    if (!s.profile.empty()) doc["profile"] = s.profile;
    json devices = json::array();
    for (const auto& d : s.devices) {
        json trajectory = json::array();
        for (const auto& w : d.trajectory) trajectory.push_back({w.interval, w.x, w.y});
        devices.push_back({{"id", d.id}, {"app_id", d.app_id}, {"trajectory", trajectory}});
    }
    doc["devices"] = devices;
    json diagnoses = json::array();
    for (const auto& e : s.diagnoses) {
        json d = {{"device", e.device_id}, {"interval", e.interval}};
        if (e.upload_interval) d["upload_interval"] = *e.upload_interval;
        diagnoses.push_back(d);
    }
    doc["diagnoses"] = diagnoses;
    json attackers = json::array();
    for (const auto& a : s.attackers) {
        json v = {{"id", a.id}, {"type", a.type}};
        if (a.type == "sniffer") {
            v["position"] = position_to_json(a.position);
        } else if (a.type == "relay") {
            v["mode"] = to_string(a.mode);
            v["from"] = position_to_json(a.from);
            v["to"] = position_to_json(a.to);
            v["delay_intervals"] = a.delay_intervals;
            v["start_interval"] = a.start_interval;
            v["end_interval"] = a.end_interval;
        } else if (a.type == "upload-observer") {
            v["on_path"] = a.on_path;
        } else if (a.type == "store-breach") {
            v["node"] = a.node;
            v["at_interval"] = a.at_interval;
        } else if (a.type == "coercion") {
            v["device"] = a.device_id;
            v["at_interval"] = a.at_interval;
        } else if (a.type == "cross-app-upload") {
            v["device"] = a.device_id;
            v["app_id"] = a.app_id;
            v["at_interval"] = a.at_interval;
        }
        attackers.push_back(v);
    }
    doc["attackers"] = attackers;
    return doc;
}

// ---------------------------------------------------------------------------
// Scenario validation
// ---------------------------------------------------------------------------

void validate_scenario(const Scenario& s) {
    auto fail = [](const std::string& msg) { throw ValidationError("invalid scenario: " + msg); };

    if (s.duration_intervals < 1) fail("duration_intervals must be positive");
    if (s.grid_width < 1 || s.grid_height < 1) fail("grid must be non-empty");
    if (s.radio_range < 0) fail("radio_range must be non-negative");
    if (s.min_overlap_intervals < 1) fail("min_overlap_intervals must be at least 1");

    auto check_position = [&](Position p, const std::string& what) {
        if (p.x < 0 || p.x >= s.grid_width || p.y < 0 || p.y >= s.grid_height) {
            fail(what + " position (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                 ") outside grid");
        }
    };

    std::set<std::string> device_ids;
    for (const auto& d : s.devices) {
        if (!device_ids.insert(d.id).second) fail("duplicate device id \"" + d.id + "\"");
        if (d.trajectory.empty()) fail("device \"" + d.id + "\" has no waypoints");
        int prev = -1;
        for (const auto& w : d.trajectory) {
            if (w.interval <= prev) {
                fail("device \"" + d.id + "\" waypoints not strictly sorted by interval");
            }
            prev = w.interval;
            check_position(Position{w.x, w.y}, "device \"" + d.id + "\" waypoint");
        }
    }

    std::map<std::string, int> first_diagnosis;
    for (const auto& e : s.diagnoses) {
        if (!device_ids.count(e.device_id)) {
            fail("diagnosis references unknown device \"" + e.device_id + "\"");
        }
        if (e.interval < 0 || e.interval >= s.duration_intervals) {
            fail("diagnosis interval out of range for device \"" + e.device_id + "\"");
        }
        const int upload_at = e.upload_interval.value_or(e.interval + 2);
        if (upload_at < e.interval || upload_at >= s.duration_intervals) {
            fail("upload interval out of range for device \"" + e.device_id + "\"");
        }
        if (!first_diagnosis.count(e.device_id)) first_diagnosis[e.device_id] = e.interval;
    }

    std::set<std::string> attacker_ids;
    for (const auto& a : s.attackers) {
        if (!attacker_ids.insert(a.id).second) fail("duplicate attacker id \"" + a.id + "\"");
        if (a.type == "sniffer") {
            check_position(a.position, "sniffer \"" + a.id + "\"");
        } else if (a.type == "relay") {
            check_position(a.from, "relay \"" + a.id + "\" capture endpoint");
            check_position(a.to, "relay \"" + a.id + "\" injection endpoint");
            if (a.delay_intervals < 0) fail("relay \"" + a.id + "\" has negative delay");
            if (a.mode != RelayMode::ActiveRelay && a.delay_intervals != 0) {
                fail("relay \"" + a.id + "\": only active-relay mode supports a delay");
            }
        } else if (a.type == "store-breach") {
            if (a.node != "key-server" && a.node != "telemetry-sink") {
                fail("store-breach \"" + a.id + "\" targets unknown node \"" + a.node + "\"");
            }
            if (a.at_interval < 0 || a.at_interval >= s.duration_intervals) {
                fail("store-breach \"" + a.id + "\" interval out of range");
            }
        } else if (a.type == "coercion") {
            if (!device_ids.count(a.device_id)) {
                fail("coercion \"" + a.id + "\" targets unknown device \"" + a.device_id + "\"");
            }
            if (a.at_interval < 0 || a.at_interval >= s.duration_intervals) {
                fail("coercion \"" + a.id + "\" interval out of range");
            }
        } else if (a.type == "cross-app-upload") {
            if (!device_ids.count(a.device_id)) {
                fail("cross-app-upload \"" + a.id + "\" targets unknown device \"" + a.device_id +
                     "\"");
            }
            auto it = first_diagnosis.find(a.device_id);
            if (it == first_diagnosis.end() || it->second > a.at_interval) {
                fail("cross-app-upload \"" + a.id + "\" fires before any code exists for \"" +
                     a.device_id + "\"");
            }
            if (a.at_interval >= s.duration_intervals) {
                fail("cross-app-upload \"" + a.id + "\" interval out of range");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// MitigationConfig JSON
// ---------------------------------------------------------------------------

nlohmann::json mitigation_config_json(const MitigationConfig& c) {
    json doc;
    doc["tls_on"] = c.tls_on;
    doc["header_stripping"] = c.header_stripping;
    doc["hmac_tags"] = c.hmac_tags;
    doc["sync_rotation"] = c.sync_rotation;
    if (c.retention_days) {
        doc["retention_days"] = *c.retention_days;
    } else {
        doc["retention_days"] = "indefinite";
    }
    doc["data_minimization"] = c.data_minimization;
    doc["telemetry_default_on"] = c.telemetry_default_on;
    doc["verification_binding"] = c.verification_binding;
    doc["perturbation_on"] = c.perturbation_on;
    return doc;
}

MitigationConfig mitigation_config_from_json(const nlohmann::json& doc) {
    MitigationConfig c;
    if (!doc.is_object()) throw ParseError("toggles", "expected an object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "tls_on") c.tls_on = value.get<bool>();
        else if (key == "header_stripping") c.header_stripping = value.get<bool>();
        else if (key == "hmac_tags") c.hmac_tags = value.get<bool>();
        else if (key == "sync_rotation") c.sync_rotation = value.get<bool>();
        else if (key == "retention_days") {
            if (value.is_string() && value.get<std::string>() == "indefinite") {
                c.retention_days = std::nullopt;
            } else if (value.is_number_integer() && value.get<int>() >= 1) {
                c.retention_days = value.get<int>();
            } else {
                throw ParseError("toggles.retention_days",
                                 "expected a positive integer or \"indefinite\"");
            }
        } else if (key == "data_minimization") c.data_minimization = value.get<bool>();
        else if (key == "telemetry_default_on") c.telemetry_default_on = value.get<bool>();
        else if (key == "verification_binding") c.verification_binding = value.get<bool>();
        else if (key == "perturbation_on") c.perturbation_on = value.get<bool>();
        else throw ParseError("toggles." + key, "unknown mitigation toggle");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

Position position_at(const DeviceSpec& spec, int interval) {
    // Hold-last: the waypoint with the greatest interval not after `interval`;
    // before the first waypoint the device sits at the first one.
    Position p{spec.trajectory.front().x, spec.trajectory.front().y};
    for (const auto& w : spec.trajectory) {
        if (w.interval > interval) break;
        p = Position{w.x, w.y};
    }
    return p;
}

struct CapturedPayload {
    BroadcastPayload payload;
    int captured_at = 0;
};

struct PendingUpload {
    std::string device_id;
    std::string code;
    int upload_at = 0;
    bool done = false;
};

bool payload_admissible(const std::optional<int>& tag_interval, int now, bool hmac_on) {
    if (!hmac_on) return true;
    return tag_interval.has_value() && *tag_interval == now;
}

std::string device_pseudonym(const std::string& device_id) {
    Bytes16 zero{};
    std::vector<std::uint8_t> bytes(device_id.begin(), device_id.end());
    return "p-" + to_hex(siphash128(zero, bytes)).substr(0, 8);
}

}  // namespace

SimTrace run_scenario(const Scenario& scenario, const MitigationConfig& config) {
    validate_scenario(scenario);

    SimTrace trace;
    trace.scenario_name = scenario.name;
    trace.seed = scenario.seed;
    trace.config = config;

    Rng rng(scenario.seed);

    std::vector<DeviceState> devices;
    devices.reserve(scenario.devices.size());
    for (const auto& spec : scenario.devices) {
        DeviceState d;
        d.id = spec.id;
        d.app_id = spec.app_id;
        d.mac_seed = rng.next_bytes16();
        devices.push_back(std::move(d));
    }
    auto device_by_id = [&](const std::string& id) -> DeviceState& {
        for (auto& d : devices) {
            if (d.id == id) return d;
        }
        throw Error("internal: unknown device " + id);
    };

    ServerState server;
    server.architecture = scenario.architecture;
    server.retention_periods = config.retention_days;

    std::map<std::string, std::vector<CapturedPayload>> relay_buffers;
    std::vector<PendingUpload> pending_uploads;
    std::map<std::string, std::string> latest_code_for_device;

    const bool has_on_path_observer = std::any_of(
        scenario.attackers.begin(), scenario.attackers.end(),
        [](const AttackerSpec& a) { return a.type == "upload-observer" && a.on_path; });
    (void)has_on_path_observer;  // observer presence is interpreted at analysis time

    trace.intervals.reserve(scenario.duration_intervals);

    for (int t = 0; t < scenario.duration_intervals; ++t) {
        IntervalRecord record;
        record.interval = t;

        // New key period: every device draws a fresh key, scenario order.
        if (t % kIntervalsPerPeriod == 0) {
            const int period = period_of_interval(t);
            for (auto& d : devices) {
                d.teks[period] = generate_tek(rng, period);
            }
        }

        // Movement.
        std::map<std::string, Position> positions;
        for (std::size_t i = 0; i < devices.size(); ++i) {
            positions[devices[i].id] = position_at(scenario.devices[i], t);
        }
        record.positions = positions;

        // Identifier rotation and broadcast.
        std::vector<BroadcastPayload> payloads(devices.size());
        for (std::size_t i = 0; i < devices.size(); ++i) {
            payloads[i] = rotate_identifiers(devices[i], t, config.sync_rotation, config.hmac_tags);
            record.broadcasts.push_back(TraceBroadcast{devices[i].id, payloads[i].rpid.value,
                                                       payloads[i].mac,
                                                       payloads[i].tag_interval});
        }

        // Reception: every ordered pair within radio range.
        for (std::size_t r = 0; r < devices.size(); ++r) {
            for (std::size_t b = 0; b < devices.size(); ++b) {
                if (r == b) continue;
                if (!within_range(positions.at(devices[r].id), positions.at(devices[b].id),
                                  scenario.radio_range)) {
                    continue;
                }
                const BroadcastPayload& p = payloads[b];
                if (!payload_admissible(p.tag_interval, t, config.hmac_tags)) continue;
                devices[r].contact_log.push_back(
                    ContactLogEntry{t, p.rpid.value, p.mac, p.tag_interval});
                record.receptions.push_back(
                    TraceReception{devices[r].id, p.rpid.value, p.mac, p.tag_interval, false, ""});
                if (scenario.architecture == ArchitectureKind::Centralized) {
                    server.contact_graph[device_pseudonym(devices[r].id)].insert(
                        device_pseudonym(devices[b].id));
                }
            }
        }

        // Passive sniffers hear honest broadcasts in range.
        for (const auto& a : scenario.attackers) {
            if (a.type != "sniffer") continue;
            for (std::size_t b = 0; b < devices.size(); ++b) {
                if (!within_range(a.position, positions.at(devices[b].id), scenario.radio_range)) {
                    continue;
                }
                trace.sightings.push_back(Sighting{a.id, a.position, t, payloads[b].rpid.value,
                                                   payloads[b].mac});
            }
        }

        // Relay capture at the capture endpoint, inside the active window.
        for (const auto& a : scenario.attackers) {
            if (a.type != "relay") continue;
            const int window_end =
                a.end_interval < 0 ? scenario.duration_intervals : a.end_interval;
            if (t < a.start_interval || t >= window_end) continue;
            for (std::size_t b = 0; b < devices.size(); ++b) {
                if (!within_range(a.from, positions.at(devices[b].id), scenario.radio_range)) {
                    continue;
                }
                relay_buffers[a.id].push_back(CapturedPayload{payloads[b], t});
            }
        }

        // Relay injection after the configured delay: nearby devices receive
        // the replayed payload, subject to the same admission rule.
        for (const auto& a : scenario.attackers) {
            if (a.type != "relay") continue;
            auto buffer = relay_buffers.find(a.id);
            if (buffer == relay_buffers.end()) continue;
            for (const auto& captured : buffer->second) {
                if (captured.captured_at != t - a.delay_intervals) continue;
                const BroadcastPayload& p = captured.payload;
                record.injections.push_back(
                    TraceInjection{a.id, a.to, p.rpid.value, p.mac, p.tag_interval});
                for (std::size_t r = 0; r < devices.size(); ++r) {
                    if (!within_range(a.to, positions.at(devices[r].id), scenario.radio_range)) {
                        continue;
                    }
                    if (!payload_admissible(p.tag_interval, t, config.hmac_tags)) continue;
                    devices[r].contact_log.push_back(
                        ContactLogEntry{t, p.rpid.value, p.mac, p.tag_interval});
                    record.receptions.push_back(TraceReception{devices[r].id, p.rpid.value, p.mac,
                                                               p.tag_interval, true, a.id});
                }
                for (const auto& sniffer : scenario.attackers) {
                    if (sniffer.type != "sniffer") continue;
                    if (!within_range(sniffer.position, a.to, scenario.radio_range)) continue;
                    trace.sightings.push_back(
                        Sighting{sniffer.id, sniffer.position, t, p.rpid.value, p.mac});
                }
            }
        }

        // Diagnosis events: mark infection, issue a verification code, and
        // schedule the honest upload.
        for (const auto& e : scenario.diagnoses) {
            if (e.interval != t) continue;
            DeviceState& d = device_by_id(e.device_id);
            d.infected = true;
            VerificationCode code = issue_verification_code(server, rng, d.app_id, t);
            latest_code_for_device[d.id] = code.code;
            pending_uploads.push_back(
                PendingUpload{d.id, code.code, e.upload_interval.value_or(e.interval + 2), false});
        }

        // Scheduled attacker actions.
        for (const auto& a : scenario.attackers) {
            if (a.type == "cross-app-upload" && a.at_interval == t) {
                UploadRequest request;
                request.teks = {generate_tek(rng, period_of_interval(t))};
                request.code = latest_code_for_device.at(a.device_id);
                request.app_id = a.app_id;
                request.channel_encrypted = config.tls_on;
                request.source_address = "ip-" + a.id;
                UploadTranscript transcript = upload_diagnosis(
                    server, request, t, config.verification_binding, config.header_stripping);
                trace.transcripts.push_back(transcript);
                trace.cross_app_attempts.push_back(
                    CrossAppRecord{a.id, t, transcript.accepted, transcript.reject_reason});
                std::vector<Bytes16> teks;
                for (const auto& tek : request.teks) teks.push_back(tek.key);
                record.uploads.push_back(TraceUpload{a.id, teks, transcript.accepted,
                                                     transcript.reject_reason,
                                                     request.source_address});
                if (transcript.accepted) {
                    for (const auto& tek : request.teks) trace.key_owner[to_hex(tek.key)] = a.id;
                }
            } else if (a.type == "store-breach" && a.at_interval == t) {
                BreachRecord breach;
                breach.attacker = a.id;
                breach.node = a.node;
                breach.at_interval = t;
                if (a.node == "key-server") {
                    breach.uploads = server.uploads;
                    breach.contact_graph = server.contact_graph;
                } else {
                    breach.telemetry = server.telemetry;
                }
                trace.breaches.push_back(std::move(breach));
            } else if (a.type == "coercion" && a.at_interval == t) {
                const DeviceState& d = device_by_id(a.device_id);
                CoercionRecord view;
                view.attacker = a.id;
                view.device = d.id;
                view.at_interval = t;
                view.infected = d.infected;
                view.exposures = d.exposures;
                view.metadata_included = !config.data_minimization;
                for (const auto& entry : d.contact_log) {
                    if (config.data_minimization && config.retention_days &&
                        t - entry.interval >= *config.retention_days * kIntervalsPerPeriod) {
                        continue;  // aged out of the retention window
                    }
                    ContactLogEntry kept = entry;
                    if (config.data_minimization) {
                        kept.mac.clear();  // redundant metadata withheld
                        kept.tag_interval.reset();
                    }
                    view.log_entries.push_back(std::move(kept));
                }
                trace.coercions.push_back(std::move(view));
            }
        }

        // Scheduled honest uploads.
        for (auto& pending : pending_uploads) {
            if (pending.done || pending.upload_at != t) continue;
            pending.done = true;
            DeviceState& d = device_by_id(pending.device_id);
            UploadRequest request;
            for (const auto& [period, tek] : d.teks) request.teks.push_back(tek);
            request.code = pending.code;
            request.app_id = d.app_id;
            request.channel_encrypted = config.tls_on;
            request.source_address = "ip-" + d.id;
            UploadTranscript transcript = upload_diagnosis(
                server, request, t, config.verification_binding, config.header_stripping);
            trace.transcripts.push_back(transcript);
            std::vector<Bytes16> teks;
            for (const auto& tek : request.teks) teks.push_back(tek.key);
            record.uploads.push_back(TraceUpload{d.id, teks, transcript.accepted,
                                                 transcript.reject_reason,
                                                 request.source_address});
            if (transcript.accepted) {
                for (const auto& tek : request.teks) trace.key_owner[to_hex(tek.key)] = d.id;
            }
        }

        // Period boundary: publish, emit telemetry, purge, then let every
        // device match against the fresh publication.
        if ((t + 1) % kIntervalsPerPeriod == 0 || t + 1 == scenario.duration_intervals) {
            const int period = period_of_interval(t);
            const std::vector<PublishedKey>& publication = publish_keys(server, period);
            record.publications.push_back(TracePublication{period, publication});

            if (config.telemetry_default_on) {
                for (const auto& d : devices) {
                    server.telemetry.push_back(TelemetryRecord{d.id, t, "operation-report"});
                }
            }

            purge_expired(server, period + 1);

            for (auto& d : devices) {
                for (const auto& match :
                     match_exposure(d.contact_log, publication, scenario.min_overlap_intervals)) {
                    if (d.owns_key(match.tek_key)) continue;
                    if (d.notified_keys.count(match.tek_key)) continue;
                    d.notified_keys.insert(match.tek_key);
                    d.exposures.push_back(ExposureEvent{
                        t, match.tek_key, static_cast<int>(match.matched_log_intervals.size())});
                    record.notifications.push_back(TraceNotification{
                        d.id, match.tek_key,
                        static_cast<int>(match.matched_log_intervals.size())});
                }
            }
        }

        trace.intervals.push_back(std::move(record));
    }

    for (const auto& d : devices) trace.final_devices[d.id] = d;
    trace.final_server = std::move(server);
    return trace;
}

// ---------------------------------------------------------------------------
// Trace views
// ---------------------------------------------------------------------------

std::vector<PublishedKey> SimTrace::all_published_keys() const {
    std::vector<PublishedKey> keys;
    std::set<std::string> seen;
    for (const auto& record : intervals) {
        for (const auto& pub : record.publications) {
            for (const auto& key : pub.keys) {
                if (seen.insert(to_hex(key.key)).second) keys.push_back(key);
            }
        }
    }
    return keys;
}

std::optional<Position> SimTrace::position_of(const std::string& device, int interval) const {
    if (interval < 0 || interval >= static_cast<int>(intervals.size())) return std::nullopt;
    const auto& positions = intervals[interval].positions;
    auto it = positions.find(device);
    if (it == positions.end()) return std::nullopt;
    return it->second;
}

namespace {

json opt_interval_json(const std::optional<int>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

nlohmann::json trace_json(const SimTrace& trace) {
    json doc;
    doc["tptm_trace_version"] = 1;
    doc["scenario"] = trace.scenario_name;
    doc["seed"] = trace.seed;
    doc["config"] = mitigation_config_json(trace.config);

    json intervals = json::array();
    for (const auto& r : trace.intervals) {
        json rec;
        rec["t"] = r.interval;
        json positions = json::object();
        for (const auto& [id, pos] : r.positions) positions[id] = json::array({pos.x, pos.y});
        rec["positions"] = positions;
        json broadcasts = json::array();
        for (const auto& b : r.broadcasts) {
            broadcasts.push_back({{"device", b.device},
                                  {"rpid", to_hex(b.rpid)},
                                  {"mac", b.mac},
                                  {"tag", opt_interval_json(b.tag_interval)}});
        }
        rec["broadcasts"] = broadcasts;
        json receptions = json::array();
        for (const auto& x : r.receptions) {
            receptions.push_back({{"receiver", x.receiver},
                                  {"rpid", to_hex(x.rpid)},
                                  {"mac", x.mac},
                                  {"tag", opt_interval_json(x.tag_interval)},
                                  {"injected", x.injected},
                                  {"attacker", x.attacker}});
        }
        rec["receptions"] = receptions;
        json injections = json::array();
        for (const auto& x : r.injections) {
            injections.push_back({{"attacker", x.attacker},
                                  {"pos", json::array({x.pos.x, x.pos.y})},
                                  {"rpid", to_hex(x.rpid)},
                                  {"mac", x.mac},
                                  {"tag", opt_interval_json(x.tag_interval)}});
        }
        rec["injections"] = injections;
        json uploads = json::array();
        for (const auto& u : r.uploads) {
            json teks = json::array();
            for (const auto& k : u.teks) teks.push_back(to_hex(k));
            uploads.push_back({{"uploader", u.uploader},
                               {"teks", teks},
                               {"accepted", u.accepted},
                               {"reject_reason", to_string(u.reject_reason)},
                               {"source_address", u.source_address}});
        }
        rec["uploads"] = uploads;
        json publications = json::array();
        for (const auto& p : r.publications) {
            json keys = json::array();
            for (const auto& k : p.keys) {
                keys.push_back({{"key", to_hex(k.key)}, {"period", k.period_index}});
            }
            publications.push_back({{"period", p.period}, {"keys", keys}});
        }
        rec["publications"] = publications;
        json notifications = json::array();
        for (const auto& n : r.notifications) {
            notifications.push_back({{"device", n.device},
                                     {"tek", to_hex(n.tek_key)},
                                     {"matched_intervals", n.matched_intervals}});
        }
        rec["notifications"] = notifications;
        intervals.push_back(std::move(rec));
    }
    doc["intervals"] = intervals;

    json sightings = json::array();
    for (const auto& s : trace.sightings) {
        sightings.push_back({{"sniffer", s.sniffer_id},
                             {"pos", json::array({s.pos.x, s.pos.y})},
                             {"t", s.interval},
                             {"rpid", to_hex(s.rpid)},
                             {"mac", s.mac}});
    }
    doc["sightings"] = sightings;
    return doc;
}

std::string trace_text(const SimTrace& trace) {
    std::ostringstream out;
    out << "scenario " << trace.scenario_name << " seed " << trace.seed << "\n";
    for (const auto& r : trace.intervals) {
        for (const auto& b : r.broadcasts) {
            out << r.interval << " broadcast " << b.device << " rpid=" << to_hex(b.rpid)
                << " mac=" << b.mac;
            if (b.tag_interval) out << " tag=" << *b.tag_interval;
            out << "\n";
        }
        for (const auto& x : r.receptions) {
            out << r.interval << " reception " << x.receiver << " rpid=" << to_hex(x.rpid)
                << " mac=" << x.mac;
            if (x.injected) out << " injected-by=" << x.attacker;
            out << "\n";
        }
        for (const auto& x : r.injections) {
            out << r.interval << " injection " << x.attacker << " at=(" << x.pos.x << ","
                << x.pos.y << ") rpid=" << to_hex(x.rpid) << "\n";
        }
        for (const auto& u : r.uploads) {
            out << r.interval << " upload " << u.uploader << " teks=" << u.teks.size() << " "
                << (u.accepted ? "accepted" : "rejected:" + to_string(u.reject_reason)) << "\n";
        }
        for (const auto& p : r.publications) {
            out << r.interval << " publication period=" << p.period << " keys=" << p.keys.size()
                << "\n";
        }
        for (const auto& n : r.notifications) {
            out << r.interval << " notification " << n.device << " tek=" << to_hex(n.tek_key)
                << " matched=" << n.matched_intervals << "\n";
        }
    }
    return out.str();
}

}  // namespace privlab
