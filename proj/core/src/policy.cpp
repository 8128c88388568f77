#include "egov/engine.hpp"

#include "consent_ops.hpp"

namespace egov {

namespace {

Hash hash_arg(const Value& v, const char* what) {
    const Bytes& b = v.as_bytes();
    if (b.size() != 32) throw ContractError(Errc::validation, std::string("bad hash arg: ") + what);
    Hash h;
    std::copy(b.begin(), b.end(), h.bytes.begin());
    return h;
}

Value id_bytes(const Hash& h) {
    return Value(Bytes(h.bytes.begin(), h.bytes.end()));
}

// --- identity ---------------------------------------------------------------

Value identity_register(TxContext& ctx, const Value& args) {
    const StateEntry* auth = ctx.get_raw(kKeyAuthority);
    bool bootstrap = auth == nullptr;
    if (!bootstrap && !ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "only the authority registers identities");

    Identity id;
    const Bytes& pk = args.at("publicKey").as_bytes();
    const Bytes& cred = args.at("credential").as_bytes();
    if (pk.size() != 32 || cred.size() != 64)
        throw ContractError(Errc::validation, "malformed key or credential");
    std::copy(pk.begin(), pk.end(), id.publicKey.begin());
    std::copy(cred.begin(), cred.end(), id.credential.begin());
    id.id = sha256(ByteSpan(pk.data(), pk.size()));
    id.label = args.at("label").as_string();
    if (id.label.empty() || id.label.find('/') != std::string::npos)
        throw ContractError(Errc::validation, "labels are non-empty and slash-free");
    auto role = role_from_name(args.at("role").as_string());
    if (!role) throw ContractError(Errc::validation, "unknown role");
    id.role = *role;
    if (const Value* d = args.find("district")) id.districtId = d->as_string();
    if (id.role != Role::prosumer && !id.districtId.empty())
        throw ContractError(Errc::validation, "districts apply to prosumers only");

    if (id.role == Role::authority && !bootstrap)
        throw ContractError(Errc::permission, "exactly one authority per network");

    if (ctx.get_raw(key_identity(id.id)))
        throw ContractError(Errc::duplicate_identity, "public key already registered");
    if (ctx.get_raw(key_identity_label(id.label)))
        throw ContractError(Errc::duplicate_identity, "label already registered");

    // Identity records are world-readable membership facts.
    Acl worldRead{{kAnyone, kPermRead}};
    ctx.put_owned(key_identity(id.id), id.to_value(), ctx.authority(), worldRead);
    ctx.put_owned(key_identity_label(id.label), Value(Bytes(id.id.bytes.begin(), id.id.bytes.end())),
                  ctx.authority(), worldRead);
    if (bootstrap)
        ctx.put_owned(kKeyAuthority, Value(Bytes(id.id.bytes.begin(), id.id.bytes.end())),
                      id.id, worldRead);
    ctx.emit("identity/registered", Value(Value::Map{{"id", id_bytes(id.id)},
                                                     {"label", Value(id.label)},
                                                     {"role", Value(std::string(role_name(id.role)))}}));
    return Value(Value::Map{{"id", id_bytes(id.id)}});
}

// --- device registry (meter / wearable keys bound to an owner identity) -----

Value device_register(TxContext& ctx, const Value& args) {
    if (!ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "only the authority registers devices");
    std::string deviceId = args.at("deviceId").as_string();
    std::string kind = args.at("kind").as_string();
    if (kind != "meter" && kind != "wearable")
        throw ContractError(Errc::validation, "device kind must be meter or wearable");
    auto owner = ctx.identity_by_label(args.at("owner").as_string());
    if (!owner) throw ContractError(Errc::not_found, "device owner not registered");
    const Bytes& pk = args.at("publicKey").as_bytes();
    if (pk.size() != 32) throw ContractError(Errc::validation, "bad device key");
    std::string key = "dev/" + deviceId;
    if (ctx.get_raw(key)) throw ContractError(Errc::duplicate_identity, "device already registered");
    Value::Map rec;
    rec.emplace("kind", Value(kind));
    rec.emplace("owner", id_bytes(owner->id));
    rec.emplace("publicKey", Value(pk));
    ctx.put_owned(key, Value(std::move(rec)), owner->id, Acl{{kAnyone, kPermRead}});
    return Value(nullptr);
}

// --- config ------------------------------------------------------------------

Value config_set(TxContext& ctx, const Value& args) {
    if (!ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "only the authority sets configuration");
    const std::string& key = args.at("key").as_string();
    if (key.rfind("config/", 0) != 0)
        throw ContractError(Errc::validation, "config keys live under config/");
    ctx.put_owned(key, args.at("value"), ctx.authority(), Acl{{kAnyone, kPermRead}});
    return Value(nullptr);
}

// --- data (generic permissioned key/value access) ----------------------------

Value data_create(TxContext& ctx, const Value& args) {
    const std::string& key = args.at("key").as_string();
    if (ctx.get_raw(key)) throw ContractError(Errc::validation, "key already exists");
    Acl acl;
    if (const Value* a = args.find("acl")) {
        for (const auto& [hex, perm] : a->as_map()) {
            auto who = Hash::from_hex(hex);
            if (!who) throw ContractError(Errc::validation, "bad acl identity");
            acl.emplace(*who, static_cast<uint8_t>(perm.as_int()));
        }
    }
    ctx.put_owned(key, args.at("value"), ctx.invoker(), std::move(acl));
    return Value(nullptr);
}

Value data_get(TxContext& ctx, const Value& args) {
    return ctx.read_checked(args.at("key").as_string());
}

Value data_put(TxContext& ctx, const Value& args) {
    const std::string& key = args.at("key").as_string();
    ctx.put(key, args.at("value"));
    // Writes within one transaction coalesce; the handler may be called with a
    // list to exercise exactly that.
    if (const Value* more = args.find("also")) {
        for (const Value& v : more->as_list()) ctx.put(key, v);
    }
    return Value(nullptr);
}

Value data_grant(TxContext& ctx, const Value& args) {
    const std::string& key = args.at("key").as_string();
    const StateEntry* e = ctx.get_raw(key);
    if (!e) throw ContractError(Errc::not_found, "no such key: " + key);
    Acl acl = e->acl;
    auto grantee = hash_arg(args.at("grantee"), "grantee");
    acl[grantee] = static_cast<uint8_t>(args.at("perms").as_int());
    ctx.set_acl(key, std::move(acl));
    return Value(nullptr);
}

// --- consent ------------------------------------------------------------------

ConsentRecord load_consent(TxContext& ctx, const Hash& consentId) {
    const StateEntry* head = ctx.get_raw(key_consent_head(consentId));
    if (!head) throw ContractError(Errc::not_found, "unknown consent record");
    return ConsentRecord::from_value(decode(head->value));
}

uint64_t consent_transition_count(TxContext& ctx, const Hash& consentId) {
    const StateEntry* head = ctx.get_raw(key_consent_head(consentId));
    if (!head) return 0;
    ConsentRecord rec = ConsentRecord::from_value(decode(head->value));
    // requested -> 1 transition written, decided -> 2, revoked -> 3
    switch (rec.status) {
        case ConsentStatus::requested: return 1;
        case ConsentStatus::approved:
        case ConsentStatus::denied: return 2;
        case ConsentStatus::revoked: return 3;
    }
    return 0;
}

void write_consent(TxContext& ctx, const ConsentRecord& rec, uint64_t transition) {
    // History entry (never overwritten) plus the mutable head pointer.
    Acl readable{{rec.requester, kPermRead}, {rec.subject, kPermRead}};
    ctx.put_owned(key_consent_record(rec.consentId, transition), rec.to_value(), rec.subject,
                  readable);
    ctx.put_owned(key_consent_head(rec.consentId), rec.to_value(), rec.subject, readable);
    std::string openKey = key_consent_open(rec.requester, rec.subject, rec.resourceKey);
    bool open = rec.status == ConsentStatus::requested || rec.status == ConsentStatus::approved;
    ctx.put_owned(openKey,
                  open ? Value(Bytes(rec.consentId.bytes.begin(), rec.consentId.bytes.end()))
                       : Value(Bytes{}),
                  rec.subject, readable);
}

}  // namespace

namespace consent_ops {

Value request(TxContext& ctx, const Identity& subject, const std::string& resourceKey,
              std::string purpose) {
    if (resourceKey.empty()) throw ContractError(Errc::validation, "empty resource key");

    std::string openKey = key_consent_open(ctx.invoker(), subject.id, resourceKey);
    const StateEntry* open = ctx.get_raw(openKey);
    if (open && !open->value.empty())
        throw ContractError(Errc::duplicate_request,
                            "an open request already exists for this resource");

    ConsentRecord rec;
    rec.requester = ctx.invoker();
    rec.subject = subject.id;
    rec.resourceKey = resourceKey;
    rec.purpose = std::move(purpose);
    rec.status = ConsentStatus::requested;
    rec.requestedAt = ctx.logical_time();
    rec.decidedAt = ctx.logical_time();
    Value::Map seed;
    seed.emplace("requestedAt", Value(rec.requestedAt));
    seed.emplace("requester", id_bytes(rec.requester));
    seed.emplace("resourceKey", Value(rec.resourceKey));
    seed.emplace("seqNo", Value(static_cast<int64_t>(ctx.tx().seqNo)));
    seed.emplace("subject", id_bytes(rec.subject));
    rec.consentId = sha256(encode(Value(std::move(seed))));

    write_consent(ctx, rec, 0);
    ctx.emit("consent/request", Value(Value::Map{{"consentId", id_bytes(rec.consentId)},
                                                 {"requester", id_bytes(rec.requester)},
                                                 {"resourceKey", Value(rec.resourceKey)},
                                                 {"subject", id_bytes(rec.subject)}}));
    return Value(Value::Map{{"consentId", id_bytes(rec.consentId)}});
}

Value transition(TxContext& ctx, const Hash& consentId, ConsentStatus to) {
    ConsentRecord rec = load_consent(ctx, consentId);
    if (ctx.invoker() != rec.subject)
        throw ContractError(Errc::permission, "only the data subject decides consent");
    if (!consent_transition_legal(rec.status, to))
        throw ContractError(Errc::consent_state,
                            std::string("illegal transition ") +
                                std::string(consent_status_name(rec.status)) + " -> " +
                                std::string(consent_status_name(to)));
    uint64_t transition = consent_transition_count(ctx, rec.consentId);
    rec.status = to;
    rec.decidedAt = ctx.logical_time();
    write_consent(ctx, rec, transition);
    ctx.emit("consent/" + std::string(consent_status_name(to)),
             Value(Value::Map{{"consentId", id_bytes(rec.consentId)},
                              {"requester", id_bytes(rec.requester)},
                              {"resourceKey", Value(rec.resourceKey)},
                              {"subject", id_bytes(rec.subject)}}));
    return Value(Value::Map{{"status", Value(std::string(consent_status_name(to)))}});
}

}  // namespace consent_ops

void register_policy_contracts(ContractRegistry& reg) {
    Contract identity{"identity", Category::dynamic, {}};
    identity.operations["register"] = identity_register;
    reg.add(std::move(identity));

    Contract device{"device", Category::dynamic, {}};
    device.operations["register"] = device_register;
    reg.add(std::move(device));

    Contract config{"config", Category::dynamic, {}};
    config.operations["set"] = config_set;
    reg.add(std::move(config));

    Contract data{"data", Category::dynamic, {}};
    data.operations["create"] = data_create;
    data.operations["get"] = data_get;
    data.operations["put"] = data_put;
    data.operations["grant"] = data_grant;
    reg.add(std::move(data));

    Contract consent{"consent", Category::dynamic, {}};
    consent.operations["request"] = [](TxContext& ctx, const Value& args) {
        auto subject = ctx.identity_by_label(args.at("subject").as_string());
        if (!subject) throw ContractError(Errc::not_found, "subject not registered");
        return consent_ops::request(ctx, *subject, args.at("resourceKey").as_string(),
                                    args.at("purpose").as_string());
    };
    auto transition_op = [](ConsentStatus to) {
        return [to](TxContext& ctx, const Value& args) {
            return consent_ops::transition(ctx, hash_arg(args.at("consentId"), "consentId"), to);
        };
    };
    consent.operations["approve"] = transition_op(ConsentStatus::approved);
    consent.operations["deny"] = transition_op(ConsentStatus::denied);
    consent.operations["revoke"] = transition_op(ConsentStatus::revoked);
    reg.add(std::move(consent));
}

}  // namespace egov
