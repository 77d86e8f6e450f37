#include "privlab/protocol.hpp"

#include <algorithm>
#include <unordered_map>

namespace privlab {

// ---------------------------------------------------------------------------
// Key schedule
// ---------------------------------------------------------------------------

TemporaryExposureKey generate_tek(Rng& rng, int period_index) {
    if (period_index < 0) throw DomainError("period_index must be non-negative");
    return TemporaryExposureKey{rng.next_bytes16(), period_index};
}

RollingProximityId derive_rpid(const TemporaryExposureKey& tek, int interval) {
    const int first = tek.period_index * kIntervalsPerPeriod;
    if (interval < first || interval >= first + kIntervalsPerPeriod) {
        throw DomainError("interval " + std::to_string(interval) + " outside period " +
                          std::to_string(tek.period_index));
    }
    return RollingProximityId{siphash128_u64(tek.key, static_cast<std::uint64_t>(interval)),
                              interval};
}

int mac_epoch(int interval, bool sync_rotation) {
    if (sync_rotation) return interval;
    // Stride 3, offset 1: the address changes at intervals 1, 4, 7, ...
    return (interval + 2) / 3;
}

std::string derive_mac(const Bytes16& mac_seed, int epoch) {
    Bytes16 h = siphash128_u64(mac_seed, static_cast<std::uint64_t>(epoch));
    return to_hex(std::span<const std::uint8_t>(h.data(), 6));
}

// ---------------------------------------------------------------------------
// Device
// ---------------------------------------------------------------------------

const TemporaryExposureKey* DeviceState::find_tek(int period) const {
    auto it = teks.find(period);
    return it == teks.end() ? nullptr : &it->second;
}

bool DeviceState::owns_key(const Bytes16& key) const {
    for (const auto& [period, tek] : teks) {
        if (tek.key == key) return true;
    }
    return false;
}

BroadcastPayload rotate_identifiers(const DeviceState& device, int interval, bool sync_rotation,
                                    bool attach_tag) {
    const TemporaryExposureKey* tek = device.find_tek(period_of_interval(interval));
    if (!tek) {
        throw DomainError("device " + device.id + " has no key for period " +
                          std::to_string(period_of_interval(interval)));
    }
    BroadcastPayload payload;
    payload.rpid = derive_rpid(*tek, interval);
    // Opaque metadata blob, derived but never interpreted.
    payload.aemd = to_hex(std::span<const std::uint8_t>(
        siphash128_u64(tek->key, 0xae3d0000u + static_cast<std::uint64_t>(interval)).data(), 4));
    payload.mac = derive_mac(device.mac_seed, mac_epoch(interval, sync_rotation));
    if (attach_tag) payload.tag_interval = interval;
    return payload;
}

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

std::string to_string(UploadRejectReason r) {
    switch (r) {
        case UploadRejectReason::None: return "none";
        case UploadRejectReason::Consumed: return "consumed";
        case UploadRejectReason::Expired: return "expired";
        case UploadRejectReason::AppMismatch: return "app-mismatch";
    }
    return "none";
}

VerificationCode* ServerState::find_code(const std::string& code) {
    for (auto& c : codes) {
        if (c.code == code) return &c;
    }
    return nullptr;
}

VerificationCode issue_verification_code(ServerState& server, Rng& rng, const std::string& app_id,
                                         int now_interval) {
    VerificationCode code;
    code.code = to_hex(rng.next_bytes16());
    code.issued_for_app = app_id;
    code.expiry_interval = now_interval + kIntervalsPerPeriod;
    code.consumed = false;
    server.codes.push_back(code);
    return code;
}

UploadTranscript upload_diagnosis(ServerState& server, const UploadRequest& request,
                                  int now_interval, bool binding_enforced,
                                  bool header_stripping) {
    VerificationCode* code = server.find_code(request.code);
    if (!code) throw NotFoundError("unknown verification code");

    UploadTranscript transcript;
    transcript.interval = now_interval;
    transcript.source_address = request.source_address;
    transcript.size_bytes = 16 * request.teks.size() + request.code.size();
    transcript.payload_visible = !request.channel_encrypted;
    if (transcript.payload_visible) {
        for (const auto& tek : request.teks) transcript.visible_teks.push_back(tek.key);
    }

    UploadRejectReason reason = UploadRejectReason::None;
    if (code->consumed) {
        reason = UploadRejectReason::Consumed;
    } else if (now_interval >= code->expiry_interval) {
        reason = UploadRejectReason::Expired;
    } else if (binding_enforced && code->issued_for_app != request.app_id) {
        reason = UploadRejectReason::AppMismatch;
    }

    if (reason != UploadRejectReason::None) {
        transcript.accepted = false;
        transcript.reject_reason = reason;
        return transcript;
    }

    code->consumed = true;
    UploadRecord record;
    record.teks = request.teks;
    record.received_at = now_interval;
    record.source_address = header_stripping ? "anonymized" : request.source_address;
    record.app_id = request.app_id;
    server.uploads.push_back(record);

    transcript.accepted = true;
    transcript.server_recorded_source = record.source_address;
    return transcript;
}

const std::vector<PublishedKey>& publish_keys(ServerState& server, int period_index) {
    std::vector<PublishedKey> publication;
    for (const auto& record : server.uploads) {
        if (period_of_interval(record.received_at) != period_index) continue;
        for (const auto& tek : record.teks) {
            publication.push_back(PublishedKey{tek.key, tek.period_index});
        }
    }
    std::sort(publication.begin(), publication.end(),
              [](const PublishedKey& a, const PublishedKey& b) { return a.key < b.key; });
    return server.publications[period_index] = std::move(publication);
}

void purge_expired(ServerState& server, int current_period) {
    if (!server.retention_periods) return;
    const int window = *server.retention_periods;
    auto too_old = [&](int received_at) {
        return current_period - period_of_interval(received_at) > window;
    };
    std::erase_if(server.uploads,
                  [&](const UploadRecord& r) { return too_old(r.received_at); });
    std::erase_if(server.telemetry,
                  [&](const TelemetryRecord& r) { return too_old(r.received_at); });
}

// ---------------------------------------------------------------------------
// Exposure matching
// ---------------------------------------------------------------------------

std::vector<ExposureMatch> match_exposure(const std::vector<ContactLogEntry>& contact_log,
                                          const std::vector<PublishedKey>& publication,
                                          int min_overlap_intervals) {
    if (min_overlap_intervals < 1) {
        throw DomainError("min_overlap_intervals must be at least 1");
    }

    // Index every identifier derivable from the publication. Matching is by
    // identifier value, not log timestamp, which is what lets replayed and
    // relayed payloads count.
    std::unordered_map<std::string, std::size_t> rpid_to_key;
    for (std::size_t i = 0; i < publication.size(); ++i) {
        const PublishedKey& pk = publication[i];
        TemporaryExposureKey tek{pk.key, pk.period_index};
        const int first = pk.period_index * kIntervalsPerPeriod;
        for (int interval = first; interval < first + kIntervalsPerPeriod; ++interval) {
            rpid_to_key.emplace(to_hex(derive_rpid(tek, interval).value), i);
        }
    }

    std::vector<std::set<int>> hit_intervals(publication.size());
    for (const auto& entry : contact_log) {
        auto it = rpid_to_key.find(to_hex(entry.rpid));
        if (it != rpid_to_key.end()) hit_intervals[it->second].insert(entry.interval);
    }

    std::vector<ExposureMatch> matches;
    for (std::size_t i = 0; i < publication.size(); ++i) {
        if (static_cast<int>(hit_intervals[i].size()) < min_overlap_intervals) continue;
        ExposureMatch m;
        m.tek_key = publication[i].key;
        m.tek_period = publication[i].period_index;
        m.matched_log_intervals.assign(hit_intervals[i].begin(), hit_intervals[i].end());
        matches.push_back(std::move(m));
    }
    return matches;
}

}  // namespace privlab
