#include "privlab/catalog.hpp"

namespace privlab {

// The built-in ENS target privacy threat model. Threat ids keep their
// group prefixes: CA coercion, DD data disclosure, EV eavesdropping,
// ST spoofing/tracing/replay.

namespace {

using TC = ThreatCategory;
using AC = AttackerCapability;
using IK = IdentifierKind;
using ME = MitigationEffect;
using SG = StrategyGroup;

CitedIdentifier cited(const char* name, IK kind) { return CitedIdentifier{name, kind}; }

Catalog make_builtin() {
    Catalog c;

    c.categories = {TC::Surveillance, TC::StoredDataCompromise, TC::Misattribution,
                    TC::SecondaryUse, TC::Exclusion, TC::Linkability, TC::Identification,
                    TC::Detection, TC::NonRepudiation, TC::IntegrityCompromise};

    c.capabilities = {AC::Coercion, AC::DataDisclosure, AC::Eavesdropping,
                      AC::Replay, AC::Spoofing, AC::Tampering};

    c.identifiers = {
        {"name", IK::Direct},
        {"address", IK::Direct},
        {"user email", IK::Direct},
        {"phone IMEI", IK::Direct},
        {"IP address", IK::Direct},
        {"MAC address", IK::Direct},
        {"user details", IK::Direct},
        {"location data", IK::Indirect},
        {"local public health agency", IK::Indirect},
        {"age of the user", IK::Indirect},
        {"infection status", IK::Indirect},
        {"device model / version", IK::Indirect},
        {"gender", IK::Indirect},
        {"date of interview", IK::Indirect},
        {"TEK", IK::Indirect},
        {"AEMD", IK::Indirect},
        {"pseudonyms", IK::Indirect},
        {"exposure details", IK::Indirect},
        {"device information", IK::Indirect},
        {"other personal information", IK::Indirect},
    };

    // -- Coercion ------------------------------------------------------------
    c.threats.push_back(ThreatEntry{
        "CA001",
        "Infection status or exposure revealed in the app under coercion",
        AC::Coercion,
        {TC::StoredDataCompromise, TC::Identification},
        {"authorities", "organizations", "employers", "assailants"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect)},
        "An attacker with leverage over the user (employer, official, assailant) forces them "
        "to open the app and show their infection status or exposure history.",
        "flow-exists(*, device, *)"});
    c.threats.push_back(ThreatEntry{
        "CA002",
        "No workable way to withdraw consent in the app",
        AC::Coercion,
        {TC::SecondaryUse},
        {"authorities", "organizations"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect)},
        "When the app gives no practical way to withdraw previously granted consent, "
        "processing continues against the user's will and the collected data is open to "
        "secondary use.",
        "not flag(consent_withdrawal_supported) or not flag(per_function_consent)"});
    c.threats.push_back(ThreatEntry{
        "CA003",
        "Legal compulsion discloses data held in the app",
        AC::Coercion,
        {TC::StoredDataCompromise, TC::Identification},
        {"authorities", "hackers", "assailants"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect)},
        "A legal instrument such as a subpoena compels disclosure of data stored in the "
        "mobile app, revealing the user's social interactions.",
        "flow-exists(*, device, *)"});
    c.threats.push_back(ThreatEntry{
        "CA004",
        "Users given insufficient information about the app",
        AC::Coercion,
        {TC::StoredDataCompromise, TC::Identification},
        {"authorities", "hackers", "assailants"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect),
         cited("other personal information", IK::Indirect)},
        "Misinformation about what the app does can push users into uploading private data "
        "to a server, exposing personal information.",
        "not flag(user_notice_provided)"});

    // -- Data disclosure -----------------------------------------------------
    c.threats.push_back(ThreatEntry{
        "DD001",
        "Loss of device control exposes personal health data",
        AC::DataDisclosure,
        {TC::StoredDataCompromise, TC::Identification},
        {"hackers", "organizers", "assailants"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect)},
        "Whoever gains control of a seized or unlocked phone can read everything the app "
        "stores: infection status, exposure events, and the contact log.",
        "flow-exists(*, device, *)"});
    c.threats.push_back(ThreatEntry{
        "DD002",
        "Third-party tools and telemetry leak private data",
        AC::DataDisclosure,
        {TC::StoredDataCompromise, TC::Identification, TC::Linkability},
        {"authorities", "hackers", "assailants"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect),
         cited("user details", IK::Direct)},
        "Third-party tooling attached to the app or backend (diagnostics and usage "
        "telemetry enabled by default) ships operational data to outside parties.",
        "flag(telemetry_default_on)"});
    c.threats.push_back(ThreatEntry{
        "DD003",
        "Indefinite data storage enables later linkage",
        AC::DataDisclosure,
        {TC::StoredDataCompromise, TC::Identification, TC::Linkability},
        {"authorities", "hackers", "assailants"},
        {cited("infection status", IK::Direct), cited("exposure details", IK::Indirect),
         cited("user details", IK::Direct)},
        "Records kept on servers with no retention limit can be joined retroactively with "
        "other datasets to de-anonymize users.",
        "retention_days = indefinite"});

    // -- Eavesdropping ---------------------------------------------------------
    c.threats.push_back(ThreatEntry{
        "EV001",
        "User identification from upload communication metadata",
        AC::Eavesdropping,
        {TC::Identification, TC::Surveillance, TC::Linkability},
        {"authorities", "organizations", "hackers"},
        {cited("TEK", IK::Direct), cited("IP address", IK::Indirect),
         cited("device information", IK::Indirect)},
        "The operator receiving a key upload, or an on-path observer of an unencrypted one, "
        "can tie communication metadata such as the source IP address to the uploaded keys "
        "and thus to a person.",
        "flow-exists(device, *, IP address)"});
    c.threats.push_back(ThreatEntry{
        "EV002",
        "Movement profiling from captured rolling proximity identifiers",
        AC::Eavesdropping,
        {TC::Identification, TC::Surveillance, TC::Linkability},
        {"authorities", "organizations", "hackers"},
        {cited("TEK", IK::Direct), cited("IP address", IK::Indirect),
         cited("device information", IK::Indirect), cited("location data", IK::Indirect)},
        "Stationary BLE sniffers record broadcast identifiers; once daily keys are "
        "published, every identifier of a diagnosed user re-derives, and sightings at known "
        "places join into a movement profile.",
        "flow-exists(device, device, pseudonyms)"});
    c.threats.push_back(ThreatEntry{
        "EV003",
        "Movement profiling from captured rolling proximity identifiers",
        AC::Eavesdropping,
        {TC::Identification, TC::Surveillance, TC::Linkability},
        {"authorities", "organizations", "hackers"},
        {cited("TEK", IK::Direct), cited("IP address", IK::Indirect),
         cited("device information", IK::Indirect), cited("location data", IK::Indirect)},
        "Stationary BLE sniffers record broadcast identifiers; once daily keys are "
        "published, every identifier of a diagnosed user re-derives, and sightings at known "
        "places join into a movement profile.",
        "flow-exists(device, device, pseudonyms)"});
    c.threats.push_back(ThreatEntry{
        "EV004",
        "Device tracing via the Bluetooth MAC address",
        AC::Eavesdropping,
        {TC::Identification, TC::Surveillance, TC::Linkability},
        {"authorities", "organizations", "hackers"},
        {cited("IP address", IK::Indirect), cited("device information", IK::Indirect),
         cited("location data", IK::Indirect)},
        "A Bluetooth MAC address that outlives identifier rotation links otherwise "
        "unlinkable broadcasts, letting an observer trace a device across locations without "
        "any published key.",
        "flow-exists(device, device, MAC address)"});

    // -- Spoofing, tracing, and replay ----------------------------------------
    c.threats.push_back(ThreatEntry{
        "ST001",
        "BLE range extenders fabricate proximity",
        AC::Spoofing,
        {TC::IntegrityCompromise},
        {"hackers", "authorities", "organizations", "employers", "assailants"},
        {cited("infection status", IK::Direct), cited("location data", IK::Indirect)},
        "A range extender rebroadcasts advertisements beyond their physical reach, so "
        "devices log contact events with people who were never nearby.",
        "flow-exists(device, device, pseudonyms)"});
    c.threats.push_back(ThreatEntry{
        "ST002",
        "False alarms through active relays",
        AC::Replay,
        {TC::IntegrityCompromise},
        {"hackers", "authorities", "organizations", "employers", "assailants"},
        {cited("infection status", IK::Direct), cited("location data", IK::Indirect)},
        "Captured advertisements relayed in near real time to another location cause "
        "recipients there to be falsely alerted once the source user is diagnosed.",
        "flow-exists(device, device, pseudonyms)"});
    c.threats.push_back(ThreatEntry{
        "ST003",
        "Wormhole relay duplicates presence at distant locations",
        AC::Replay,
        {TC::IntegrityCompromise, TC::Misattribution, TC::Exclusion},
        {"hackers", "authorities", "organizations", "employers", "assailants"},
        {cited("infection status", IK::Direct), cited("location data", IK::Indirect)},
        "Sniffed identifiers are tunneled to distant locations and replayed within the same "
        "interval, duplicating an infected person's presence across many places at once.",
        "flow-exists(device, device, pseudonyms)"});
    c.threats.push_back(ThreatEntry{
        "ST004",
        "Verification code redeemed through another app",
        AC::Spoofing,
        {TC::StoredDataCompromise, TC::Identification},
        {"authorities", "service provider", "employers", "hackers"},
        {cited("infection status", IK::Direct)},
        "A verification code issued for an infected person is redeemed by a different app "
        "or party, planting upload data that does not belong to them.",
        "flow-exists(device, verification-server, *)"});

    // -- Mitigation strategies -------------------------------------------------
    c.strategies.push_back(MitigationStrategy{
        "data-minimization",
        SG::PrivacyByDesign,
        "Collect only the attributes the function needs, destroy identifiers once no longer "
        "required, and keep broadcast tokens valid for the shortest interval, continuously "
        "replacing them.",
        {{"DD002", ME::Mitigates}, {"DD003", ME::Mitigates}},
        {"data_minimization", "retention_days"}});
    c.strategies.push_back(MitigationStrategy{
        "data-separation",
        SG::PrivacyByDesign,
        "Isolate and distribute processing of personal data across components, including "
        "keeping verification activities separate from exposure notification handling.",
        {{"DD002", ME::Mitigates}},
        {"verification_binding", "telemetry_default_on"}});
    c.strategies.push_back(MitigationStrategy{
        "data-perturbation",
        SG::PrivacyByDesign,
        "Aggregate and perturb data at the source before upload, using standard mechanisms "
        "such as differential privacy.",
        {{"DD002", ME::Mitigates}, {"DD003", ME::Mitigates}},
        {"perturbation_on"}});
    c.strategies.push_back(MitigationStrategy{
        "inform",
        SG::PrivacyByDesign,
        "Tell users and data subjects, promptly and in detail, how their personal data is "
        "processed.",
        {{"CA004", ME::Mitigates}},
        {}});
    c.strategies.push_back(MitigationStrategy{
        "control",
        SG::PrivacyByDesign,
        "Give users control over the processing of their personal data, with easy-to-use "
        "opt-outs from data sharing.",
        {{"CA001", ME::Minimizes},
         {"CA002", ME::Minimizes},
         {"CA003", ME::Minimizes},
         {"DD001", ME::Minimizes}},
        {}});
    c.strategies.push_back(MitigationStrategy{
        "visibility",
        SG::PrivacyByDesign,
        "Make visible how personal data is processed and which privacy-enhancing techniques "
        "are in place.",
        {},
        {}});
    c.strategies.push_back(MitigationStrategy{
        "regulation",
        SG::PrivacyByDesign,
        "Impose strict institutional data processing rules and role-based access control.",
        {},
        {}});
    c.strategies.push_back(MitigationStrategy{
        "ssl-certificates",
        SG::SecureCommunication,
        "Encrypt all data-in-transit communication with TLS.",
        {{"EV001", ME::Mitigates}},
        {"tls_on"}});
    c.strategies.push_back(MitigationStrategy{
        "header-stripping",
        SG::SecureCommunication,
        "Strip identifying HTTP headers (for example Authorization) from requests to reduce "
        "linkability.",
        {{"EV001", ME::Mitigates}},
        {"header_stripping"}});
    c.strategies.push_back(MitigationStrategy{
        "hmac-enhancements",
        SG::SecureCommunication,
        "Bind broadcast payloads to their interval with message authentication tags so "
        "relayed or replayed payloads from other intervals are rejected.",
        {{"EV002", ME::Minimizes},
         {"EV003", ME::Minimizes},
         {"ST002", ME::Minimizes},
         {"ST001", ME::Minimizes}},
        {"hmac_tags"}});
    c.strategies.push_back(MitigationStrategy{
        "reference-architecture-adoption",
        SG::ReferenceArchitecture,
        "Follow proven reference architecture guidance: separation of processing, "
        "authentication, and related controls.",
        {{"EV002", ME::Minimizes}, {"EV003", ME::Minimizes}, {"ST004", ME::Mitigates}},
        {}});
    c.strategies.push_back(MitigationStrategy{
        "keep-components-current",
        SG::ReferenceArchitecture,
        "Keep mobile apps and server components current with the latest APIs, patches, and "
        "OS upgrades.",
        {{"EV004", ME::Mitigates}},
        {"sync_rotation"}});
    c.strategies.push_back(MitigationStrategy{
        "security-assessment",
        SG::ReferenceArchitecture,
        "Run end-to-end security and vulnerability assessments across all system "
        "components.",
        {{"ST001", ME::Minimizes}, {"ST002", ME::Minimizes}, {"ST004", ME::Minimizes}},
        {}});

    // -- Privacy principles ----------------------------------------------------
    // Principles without a machine-checkable criterion carry an empty rule and
    // are reported as not machine-auditable.
    c.principles = {
        {PrincipleName::Lawful, ""},
        {PrincipleName::InformedConsent,
         "flag(consent_withdrawal_supported) and flag(per_function_consent)"},
        {PrincipleName::PurposeBinding, ""},
        {PrincipleName::IdentityControl, ""},
        {PrincipleName::Transparency, "flag(user_notice_provided)"},
        {PrincipleName::Accountability, ""},
        {PrincipleName::Proportionality, ""},
        {PrincipleName::DataRetention, "not (retention_days = indefinite)"},
    };

    return c;
}

}  // namespace

const Catalog& builtin_catalog() {
    static const Catalog catalog = make_builtin();
    return catalog;
}

}  // namespace privlab
