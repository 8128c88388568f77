#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egov/engine.hpp"

namespace egov {

// ---------------------------------------------------------------------------
// Scenario 2: wearable vitals under patient-owned keys, the
// request -> decision -> access workflow, and the audit trail.
// ---------------------------------------------------------------------------

struct VitalsReading {
    std::string deviceId;
    int64_t at = 0;
    std::optional<int64_t> heartRateBpm;
    std::optional<int64_t> systolicMmHg;
    std::optional<int64_t> diastolicMmHg;

    bool has_any_vital() const {
        return heartRateBpm || systolicMmHg || diastolicMmHg;
    }
    Bytes signing_body() const;
    Value to_value() const;
    static VitalsReading from_value(const Value& v);
};

std::string key_vitals(const IdentityId& patient, int64_t at);
std::string key_vitals_prefix(const IdentityId& patient);
// The resource prefix one consent approval covers: every record of the patient.
std::string health_resource_prefix(const IdentityId& patient);

// One audit-trail line: everything that touched a patient's prefix, in ledger
// order. Reconstructed entirely from replaying the ledger.
struct AuditEntry {
    uint64_t seqNo = 0;
    IdentityId actor;
    std::string action;   // consent.request / consent.approve / ... / health.read
    std::string outcome;  // committed / failed(PermissionError) / aborted
    int64_t at = 0;
};

// Audit query over an execution log. `caller` must be the patient or the
// authority; anyone else gets Errc::permission.
std::vector<AuditEntry> audit_trail(const std::vector<TxRecord>& log, const IdentityId& patient,
                                    const IdentityId& caller, const IdentityId& authority);

// Post-run sweep for the consent-precedes-access property: for every
// successful non-owner read of a guarded prefix there must be an earlier
// request and approval with no revocation in between. Returns human-readable
// violations (empty = sound).
std::vector<std::string> audit_access_soundness(const std::vector<TxRecord>& log);

// Registers the health contract:
//   health.ingest  {deviceId, at, heartRateBpm?, systolicMmHg?, diastolicMmHg?, deviceSig}
//   health.request {patient, purpose}     (role doctor)
//   health.decide  {consentId, decision}  (the subject patient)
//   health.revoke  {consentId}            (the subject patient)
//   health.read    {patient}              (consent-gated)
void register_health_contracts(ContractRegistry& reg);

}  // namespace egov
