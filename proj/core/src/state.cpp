#include "egov/state.hpp"

namespace egov {

Value EntryContent::to_value() const {
    Value::Map acl_map;
    for (const auto& [who, perm] : acl)
        acl_map.emplace(who.hex(), Value(static_cast<int64_t>(perm)));
    Value::Map m;
    m.emplace("acl", Value(std::move(acl_map)));
    m.emplace("owner", Value(Bytes(owner.bytes.begin(), owner.bytes.end())));
    m.emplace("value", Value(value));
    return Value(std::move(m));
}

EntryContent EntryContent::from_value(const Value& v) {
    EntryContent c;
    c.value = v.at("value").as_bytes();
    const Bytes& ob = v.at("owner").as_bytes();
    if (ob.size() != 32) throw Error(Errc::encoding, "owner id must be 32 bytes");
    std::copy(ob.begin(), ob.end(), c.owner.bytes.begin());
    for (const auto& [hex, perm] : v.at("acl").as_map()) {
        auto id = Hash::from_hex(hex);
        if (!id) throw Error(Errc::encoding, "bad acl identity hex");
        int64_t p = perm.as_int();
        if (p < 0 || p > (kPermRead | kPermWrite))
            throw Error(Errc::encoding, "bad acl permission bits");
        c.acl.emplace(*id, static_cast<uint8_t>(p));
    }
    return c;
}

const StateEntry* WorldState::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

uint64_t WorldState::version(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.version;
}

void WorldState::apply(const std::string& key, const EntryContent& content) {
    StateEntry& e = entries_[key];
    e.value = content.value;
    e.owner = content.owner;
    e.acl = content.acl;
    e.version += 1;
}

void WorldState::scan_prefix(
    const std::string& prefix,
    const std::function<bool(const std::string&, const StateEntry&)>& fn) const {
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) break;
        if (!fn(it->first, it->second)) break;
    }
}

Hash WorldState::root() const {
    // Root = sha256(encode(map key -> {acl, owner, value, version})). Streamed
    // entry by entry; each entry map is small so per-entry encode is cheap.
    Sha256 hasher;
    Bytes header;
    header.push_back(0x07);  // map tag, mirrors value.cpp wire format
    uint64_t n = entries_.size();
    header.push_back(static_cast<uint8_t>(n >> 24));
    header.push_back(static_cast<uint8_t>(n >> 16));
    header.push_back(static_cast<uint8_t>(n >> 8));
    header.push_back(static_cast<uint8_t>(n));
    hasher.update(header);

    Bytes buf;
    for (const auto& [key, e] : entries_) {
        buf.clear();
        uint64_t klen = key.size();
        buf.push_back(static_cast<uint8_t>(klen >> 24));
        buf.push_back(static_cast<uint8_t>(klen >> 16));
        buf.push_back(static_cast<uint8_t>(klen >> 8));
        buf.push_back(static_cast<uint8_t>(klen));
        buf.insert(buf.end(), key.begin(), key.end());
        Value::Map m = e.content().to_value().as_map();
        m.emplace("version", Value(static_cast<int64_t>(e.version)));
        encode_into(Value(std::move(m)), buf);
        hasher.update(buf);
    }
    return hasher.finish();
}

void WorldState::corrupt(const std::string& key, Bytes raw) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(Errc::not_found, "no such key: " + key);
    it->second.value = std::move(raw);
}

std::string_view role_name(Role r) {
    switch (r) {
        case Role::authority: return "authority";
        case Role::prosumer: return "prosumer";
        case Role::patient: return "patient";
        case Role::doctor: return "doctor";
        case Role::notary: return "notary";
        case Role::taxService: return "taxService";
        case Role::oracle: return "oracle";
    }
    return "?";
}

std::optional<Role> role_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(Role::oracle); ++i) {
        auto r = static_cast<Role>(i);
        if (role_name(r) == name) return r;
    }
    return std::nullopt;
}

Value Identity::to_value() const {
    Value::Map m;
    m.emplace("credential", Value(Bytes(credential.begin(), credential.end())));
    m.emplace("district", Value(districtId));
    m.emplace("id", Value(Bytes(id.bytes.begin(), id.bytes.end())));
    m.emplace("label", Value(label));
    m.emplace("publicKey", Value(Bytes(publicKey.begin(), publicKey.end())));
    m.emplace("role", Value(std::string(role_name(role))));
    return Value(std::move(m));
}

Identity Identity::from_value(const Value& v) {
    Identity id;
    const Bytes& ib = v.at("id").as_bytes();
    const Bytes& pk = v.at("publicKey").as_bytes();
    const Bytes& cr = v.at("credential").as_bytes();
    if (ib.size() != 32 || pk.size() != 32 || cr.size() != 64)
        throw Error(Errc::encoding, "malformed identity record");
    std::copy(ib.begin(), ib.end(), id.id.bytes.begin());
    std::copy(pk.begin(), pk.end(), id.publicKey.begin());
    std::copy(cr.begin(), cr.end(), id.credential.begin());
    id.label = v.at("label").as_string();
    id.districtId = v.at("district").as_string();
    auto role = role_from_name(v.at("role").as_string());
    if (!role) throw Error(Errc::encoding, "unknown role");
    id.role = *role;
    return id;
}

Bytes Identity::credential_body(const IdentityId& id, Role role) {
    Value::Map m;
    m.emplace("id", Value(Bytes(id.bytes.begin(), id.bytes.end())));
    m.emplace("role", Value(std::string(role_name(role))));
    return encode(Value(std::move(m)));
}

std::string key_identity(const IdentityId& id) {
    return "id/" + id.hex();
}

std::string key_identity_label(const std::string& lbl) {
    return "id/label/" + lbl;
}

std::string_view consent_status_name(ConsentStatus s) {
    switch (s) {
        case ConsentStatus::requested: return "requested";
        case ConsentStatus::approved: return "approved";
        case ConsentStatus::denied: return "denied";
        case ConsentStatus::revoked: return "revoked";
    }
    return "?";
}

std::optional<ConsentStatus> consent_status_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(ConsentStatus::revoked); ++i) {
        auto s = static_cast<ConsentStatus>(i);
        if (consent_status_name(s) == name) return s;
    }
    return std::nullopt;
}

bool consent_transition_legal(ConsentStatus from, ConsentStatus to) {
    if (from == ConsentStatus::requested)
        return to == ConsentStatus::approved || to == ConsentStatus::denied;
    if (from == ConsentStatus::approved) return to == ConsentStatus::revoked;
    return false;
}

Value ConsentRecord::to_value() const {
    Value::Map m;
    m.emplace("consentId", Value(Bytes(consentId.bytes.begin(), consentId.bytes.end())));
    m.emplace("decidedAt", Value(decidedAt));
    m.emplace("purpose", Value(purpose));
    m.emplace("requestedAt", Value(requestedAt));
    m.emplace("requester", Value(Bytes(requester.bytes.begin(), requester.bytes.end())));
    m.emplace("resourceKey", Value(resourceKey));
    m.emplace("status", Value(std::string(consent_status_name(status))));
    m.emplace("subject", Value(Bytes(subject.bytes.begin(), subject.bytes.end())));
    return Value(std::move(m));
}

ConsentRecord ConsentRecord::from_value(const Value& v) {
    ConsentRecord r;
    auto read_hash = [&](const char* field, Hash& out) {
        const Bytes& b = v.at(field).as_bytes();
        if (b.size() != 32) throw Error(Errc::encoding, "malformed consent record");
        std::copy(b.begin(), b.end(), out.bytes.begin());
    };
    read_hash("consentId", r.consentId);
    read_hash("requester", r.requester);
    read_hash("subject", r.subject);
    r.resourceKey = v.at("resourceKey").as_string();
    r.purpose = v.at("purpose").as_string();
    r.requestedAt = v.at("requestedAt").as_int();
    r.decidedAt = v.at("decidedAt").as_int();
    auto st = consent_status_from_name(v.at("status").as_string());
    if (!st) throw Error(Errc::encoding, "unknown consent status");
    r.status = *st;
    return r;
}

std::string key_consent_record(const Hash& consentId, uint64_t transition) {
    return "consent/rec/" + consentId.hex() + "/" + std::to_string(transition);
}

std::string key_consent_head(const Hash& consentId) {
    return "consent/head/" + consentId.hex();
}

std::string key_consent_open(const IdentityId& requester, const IdentityId& subject,
                             const std::string& resourceKey) {
    return "consent/open/" + requester.hex() + "/" + subject.hex() + "/" + resourceKey;
}

std::string key_consent_open_prefix(const IdentityId& requester) {
    return "consent/open/" + requester.hex() + "/";
}

}  // namespace egov
