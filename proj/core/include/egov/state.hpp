#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egov/crypto.hpp"
#include "egov/value.hpp"

namespace egov {

// ---------------------------------------------------------------------------
// Versioned key->value world state with per-key access control.
// ---------------------------------------------------------------------------

constexpr uint8_t kPermRead = 0x1;
constexpr uint8_t kPermWrite = 0x2;

// Access-control list. The all-zero identity is a wildcard principal: a grant
// to it applies to every registered identity (used for world-readable keys).
using Acl = std::map<IdentityId, uint8_t>;

constexpr IdentityId kAnyone{};

// What a transaction writes for a key: the value plus ownership metadata.
// Versioning is applied by the state on commit, not chosen by contracts.
struct EntryContent {
    Bytes value;
    IdentityId owner;
    Acl acl;

    Value to_value() const;
    static EntryContent from_value(const Value& v);
    bool operator==(const EntryContent&) const = default;
};

struct StateEntry {
    Bytes value;
    IdentityId owner;
    Acl acl;
    uint64_t version = 0;  // strictly increases; 0 means "never written"

    EntryContent content() const { return {value, owner, acl}; }
};

class WorldState {
public:
    const StateEntry* find(const std::string& key) const;
    uint64_t version(const std::string& key) const;  // 0 for absent keys

    // Applies a write: version bumps by exactly 1.
    void apply(const std::string& key, const EntryContent& content);

    // Visits entries with the given key prefix in ascending key order.
    // Visitor returns false to stop early.
    void scan_prefix(const std::string& prefix,
                     const std::function<bool(const std::string&, const StateEntry&)>& fn) const;

    // SHA-256 over the canonical encoding of the full sorted state.
    Hash root() const;

    size_t size() const { return entries_.size(); }
    const std::map<std::string, StateEntry>& entries() const { return entries_; }

    // Test-only fault injection: overwrite an entry's value bytes in place
    // without bumping the version.
    void corrupt(const std::string& key, Bytes raw);

private:
    std::map<std::string, StateEntry> entries_;
};

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

enum class Role { authority, prosumer, patient, doctor, notary, taxService, oracle };

std::string_view role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);

struct Identity {
    IdentityId id;  // sha256 of publicKey
    std::string label;
    Role role;
    PublicKey publicKey{};
    std::array<uint8_t, 64> credential{};  // authority signature over (id, role)
    std::string districtId;                // prosumers only; empty otherwise

    Value to_value() const;
    static Identity from_value(const Value& v);

    // The credential's signed body.
    static Bytes credential_body(const IdentityId& id, Role role);
};

// State-key layout. Namespaces are "/"-separated UTF-8 strings.
std::string key_identity(const IdentityId& id);          // id/<hex>
std::string key_identity_label(const std::string& lbl);  // id/label/<label>
inline constexpr const char* kKeyAuthority = "net/authority";

// ---------------------------------------------------------------------------
// Consent records
// ---------------------------------------------------------------------------

enum class ConsentStatus { requested, approved, denied, revoked };

std::string_view consent_status_name(ConsentStatus s);
std::optional<ConsentStatus> consent_status_from_name(std::string_view name);

// Legal transitions: requested->approved, requested->denied, approved->revoked.
bool consent_transition_legal(ConsentStatus from, ConsentStatus to);

struct ConsentRecord {
    Hash consentId;
    IdentityId requester;
    IdentityId subject;
    std::string resourceKey;  // key prefix the consent covers
    std::string purpose;
    ConsentStatus status = ConsentStatus::requested;
    int64_t requestedAt = 0;
    int64_t decidedAt = 0;

    Value to_value() const;
    static ConsentRecord from_value(const Value& v);
};

// Consent state-key layout. The full history of each record is kept under
// numbered transition keys; head and the per-(requester,subject,resource) open
// index are mutable pointers into it.
std::string key_consent_record(const Hash& consentId, uint64_t transition);
std::string key_consent_head(const Hash& consentId);
std::string key_consent_open(const IdentityId& requester, const IdentityId& subject,
                             const std::string& resourceKey);
std::string key_consent_open_prefix(const IdentityId& requester);

}  // namespace egov
