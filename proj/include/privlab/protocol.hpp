#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "privlab/model.hpp"
#include "privlab/util.hpp"

namespace privlab {

// One interval = 10 simulated minutes; one key period = 144 intervals (a day).
constexpr int kIntervalsPerPeriod = 144;

inline int period_of_interval(int interval) { return interval / kIntervalsPerPeriod; }

// Deterministic RNG stream; all protocol randomness flows through one of
// these so equal seeds give equal runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    Bytes16 next_bytes16() {
        Bytes16 out{};
        std::uint64_t a = gen_();
        std::uint64_t b = gen_();
        for (int i = 0; i < 8; ++i) {
            out[i] = static_cast<std::uint8_t>(a >> (8 * i));
            out[8 + i] = static_cast<std::uint8_t>(b >> (8 * i));
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Key schedule
// ---------------------------------------------------------------------------

struct TemporaryExposureKey {
    Bytes16 key{};
    int period_index = 0;

    bool operator==(const TemporaryExposureKey&) const = default;
};

struct RollingProximityId {
    Bytes16 value{};
    int interval = 0;

    bool operator==(const RollingProximityId&) const = default;
};

TemporaryExposureKey generate_tek(Rng& rng, int period_index);

// PRF(tek.key, interval); the interval must fall inside the key's period.
RollingProximityId derive_rpid(const TemporaryExposureKey& tek, int interval);

// MAC rotation: synchronized rotation changes the address every interval;
// otherwise the address holds for 3 intervals with offset 1, so one address
// straddles identifier rotations.
int mac_epoch(int interval, bool sync_rotation);
std::string derive_mac(const Bytes16& mac_seed, int epoch);

struct BroadcastPayload {
    RollingProximityId rpid;
    std::string aemd;  // opaque associated metadata blob
    std::string mac;
    std::optional<int> tag_interval;  // interval-bound authenticator, present when hmac is on

    bool operator==(const BroadcastPayload&) const = default;
};

// ---------------------------------------------------------------------------
// Device state
// ---------------------------------------------------------------------------

struct ContactLogEntry {
    int interval = 0;
    Bytes16 rpid{};
    std::string mac;
    std::optional<int> tag_interval;

    bool operator==(const ContactLogEntry&) const = default;
};

struct ExposureEvent {
    int interval = 0;
    Bytes16 tek_key{};
    int matched_intervals = 0;

    bool operator==(const ExposureEvent&) const = default;
};

struct DeviceState {
    std::string id;
    std::string app_id = "app-main";
    std::map<int, TemporaryExposureKey> teks;  // by period index
    Bytes16 mac_seed{};
    bool infected = false;
    std::vector<ExposureEvent> exposures;
    std::vector<ContactLogEntry> contact_log;
    std::set<Bytes16> notified_keys;

    const TemporaryExposureKey* find_tek(int period) const;
    bool owns_key(const Bytes16& key) const;
};

// Payload for the device's current interval. Requires the TEK covering the
// interval's period to exist in the device state.
BroadcastPayload rotate_identifiers(const DeviceState& device, int interval, bool sync_rotation,
                                    bool attach_tag);

// ---------------------------------------------------------------------------
// Server state: verification, uploads, publication, telemetry
// ---------------------------------------------------------------------------

struct VerificationCode {
    std::string code;
    std::string issued_for_app;
    int expiry_interval = 0;
    bool consumed = false;

    bool operator==(const VerificationCode&) const = default;
};

struct PublishedKey {
    Bytes16 key{};
    int period_index = 0;

    bool operator==(const PublishedKey&) const = default;
};

struct UploadRecord {
    std::vector<TemporaryExposureKey> teks;
    int received_at = 0;
    std::string source_address;  // "anonymized" when header stripping was on
    std::string app_id;
};

struct TelemetryRecord {
    std::string device_id;
    int received_at = 0;
    std::string info;
};

enum class UploadRejectReason { None, Consumed, Expired, AppMismatch };
std::string to_string(UploadRejectReason r);

// Wire-observable record of one upload exchange. The source address and
// payload size leak regardless of encryption; payload content only leaks in
// the clear.
struct UploadTranscript {
    int interval = 0;
    std::string source_address;
    std::size_t size_bytes = 0;
    bool payload_visible = false;
    std::vector<Bytes16> visible_teks;  // populated only when payload_visible
    bool accepted = false;
    UploadRejectReason reject_reason = UploadRejectReason::None;
    std::string server_recorded_source;  // what the server stored; empty on reject
};

struct ServerState {
    ArchitectureKind architecture = ArchitectureKind::PartiallyDecentralized;
    std::optional<int> retention_periods;  // nullopt = indefinite
    std::vector<VerificationCode> codes;
    std::vector<UploadRecord> uploads;
    std::map<int, std::vector<PublishedKey>> publications;
    std::vector<TelemetryRecord> telemetry;
    // Centralized deployments keep a pseudonymous contact graph; absent for
    // the other architectures.
    std::map<std::string, std::set<std::string>> contact_graph;

    VerificationCode* find_code(const std::string& code);
};

VerificationCode issue_verification_code(ServerState& server, Rng& rng, const std::string& app_id,
                                         int now_interval);

struct UploadRequest {
    std::vector<TemporaryExposureKey> teks;
    std::string code;
    std::string app_id;
    bool channel_encrypted = false;
    std::string source_address;
};

// Verifies the code (single-use, unexpired, and app-bound when enforcement is
// on), stores the keys on acceptance, and returns the observable transcript.
// Unknown codes raise NotFoundError.
UploadTranscript upload_diagnosis(ServerState& server, const UploadRequest& request,
                                  int now_interval, bool binding_enforced, bool header_stripping);

// All keys uploaded during the period, sorted by key bytes so upload order
// does not leak. Recorded into server.publications.
const std::vector<PublishedKey>& publish_keys(ServerState& server, int period_index);

// Drop stored uploads and telemetry older than the retention window; no-op
// with indefinite retention. Called at period boundaries.
void purge_expired(ServerState& server, int current_period);

struct ExposureMatch {
    Bytes16 tek_key{};
    int tek_period = 0;
    std::vector<int> matched_log_intervals;  // distinct, ascending
};

// Exposure event per published key whose derived identifiers appear in the
// log at min_overlap_intervals or more distinct intervals.
std::vector<ExposureMatch> match_exposure(const std::vector<ContactLogEntry>& contact_log,
                                          const std::vector<PublishedKey>& publication,
                                          int min_overlap_intervals);

}  // namespace privlab
