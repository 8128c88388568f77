#include "egov/engine.hpp"

#include <algorithm>
#include <future>
#include <set>

namespace egov {

std::string_view category_name(Category c) {
    switch (c) {
        case Category::static_: return "static";
        case Category::dynamic: return "dynamic";
        case Category::oracleDriven: return "oracleDriven";
    }
    return "?";
}

std::string_view commit_kind_name(CommitOutcome::Kind k) {
    switch (k) {
        case CommitOutcome::Kind::committed: return "committed";
        case CommitOutcome::Kind::failed: return "failed";
        case CommitOutcome::Kind::aborted: return "aborted";
    }
    return "?";
}

void ContractRegistry::add(Contract c) {
    std::string name = c.name;
    contracts_[name] = std::move(c);
}

const Contract* ContractRegistry::find(const std::string& name) const {
    auto it = contracts_.find(name);
    return it == contracts_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// ExecutionResult
// ---------------------------------------------------------------------------

Bytes ExecutionResult::canonical_encoding() const {
    Value::List reads;
    for (const auto& r : readSet) {
        Value::Map m;
        m.emplace("key", Value(r.key));
        m.emplace("version", Value(static_cast<int64_t>(r.version)));
        reads.push_back(Value(std::move(m)));
    }
    Value::List writes;
    for (const auto& w : writeSet) {
        Value::Map m = w.content.to_value().as_map();
        m.emplace("key", Value(w.key));
        writes.push_back(Value(std::move(m)));
    }
    Value::List evs;
    for (const auto& e : events) {
        Value::Map m;
        m.emplace("name", Value(e.name));
        m.emplace("payload", Value(e.payload));
        evs.push_back(Value(std::move(m)));
    }
    Value::Map m;
    m.emplace("error", Value(error ? std::string(errc_name(*error)) : std::string()));
    m.emplace("events", Value(std::move(evs)));
    m.emplace("readSet", Value(std::move(reads)));
    m.emplace("returnValue", Value(returnValue));
    m.emplace("writeSet", Value(std::move(writes)));
    return encode(Value(std::move(m)));
}

// ---------------------------------------------------------------------------
// TxContext
// ---------------------------------------------------------------------------

TxContext::TxContext(const WorldState& snapshot, const Transaction& tx, const Identity& invoker,
                     const IdentityId& authority)
    : snapshot_(snapshot), tx_(tx), invokerIdentity_(invoker), authority_(authority) {}

const StateEntry* TxContext::base_get(const std::string& key) {
    readSet_.try_emplace(key, snapshot_.version(key));
    return snapshot_.find(key);
}

const StateEntry* TxContext::get_raw(const std::string& key) {
    auto ov = overlay_.find(key);
    if (ov != overlay_.end()) {
        // Reads of our own writes resolve from the overlay. The base version is
        // still recorded if the entry existed before (a read-modify-write
        // depends on what it modified).
        base_get(key);
        StateEntry& view = overlayView_[key];
        view = StateEntry{ov->second.content.value, ov->second.content.owner,
                          ov->second.content.acl, snapshot_.version(key) + 1};
        return &view;
    }
    return base_get(key);
}

std::optional<Value> TxContext::get_decoded(const std::string& key) {
    const StateEntry* e = get_raw(key);
    if (!e) return std::nullopt;
    return decode(e->value);
}

void TxContext::scan_raw(const std::string& prefix,
                         const std::function<bool(const std::string&, const StateEntry&)>& fn) {
    // Merge committed entries with the overlay so handlers see their own
    // writes in scans too. Keys visited are recorded as reads.
    std::map<std::string, const StateEntry*> merged;
    snapshot_.scan_prefix(prefix, [&](const std::string& k, const StateEntry& e) {
        merged[k] = &e;
        return true;
    });
    std::map<std::string, StateEntry> overlayView;
    for (const auto& [k, ov] : overlay_) {
        if (k.compare(0, prefix.size(), prefix) != 0) continue;
        overlayView[k] = StateEntry{ov.content.value, ov.content.owner, ov.content.acl,
                                    snapshot_.version(k) + 1};
    }
    for (const auto& [k, e] : overlayView) merged[k] = &e;
    for (const auto& [k, e] : merged) {
        readSet_.try_emplace(k, snapshot_.version(k));
        if (!fn(k, *e)) break;
    }
}

bool TxContext::consent_covers(const IdentityId& reader, const std::string& key) {
    bool covered = false;
    scan_raw(key_consent_open_prefix(reader), [&](const std::string&, const StateEntry& e) {
        if (e.value.empty()) return true;  // tombstoned open-index entry
        Hash cid;
        if (e.value.size() != 32) return true;
        std::copy(e.value.begin(), e.value.end(), cid.bytes.begin());
        const StateEntry* head = get_raw(key_consent_head(cid));
        if (!head) return true;
        ConsentRecord rec = ConsentRecord::from_value(decode(head->value));
        if (rec.status == ConsentStatus::approved &&
            key.compare(0, rec.resourceKey.size(), rec.resourceKey) == 0) {
            covered = true;
            return false;
        }
        return true;
    });
    return covered;
}

bool TxContext::may_read(const std::string& key, const StateEntry& entry,
                         const IdentityId& reader) {
    if (reader == authority_) return true;  // authority bypasses ACLs
    if (entry.owner == reader) return true;
    auto grant = entry.acl.find(reader);
    if (grant != entry.acl.end() && (grant->second & kPermRead)) return true;
    auto anyone = entry.acl.find(kAnyone);
    if (anyone != entry.acl.end() && (anyone->second & kPermRead)) return true;
    return consent_covers(reader, key);
}

Value TxContext::read_checked(const std::string& key) {
    const StateEntry* e = get_raw(key);
    if (!e) throw ContractError(Errc::not_found, "no such key: " + key);
    if (!may_read(key, *e, invoker()))
        throw ContractError(Errc::permission, "read denied on " + key);
    return decode(e->value);
}

void TxContext::put(const std::string& key, const Value& value) {
    const StateEntry* e = get_raw(key);
    if (key.rfind("oracle/", 0) == 0 && invokerIdentity_.role != Role::oracle)
        throw ContractError(Errc::permission, "oracle namespace is oracle-only");
    if (e) {
        bool allowed = invoker_is_authority() || e->owner == invoker();
        if (!allowed) {
            auto grant = e->acl.find(invoker());
            allowed = grant != e->acl.end() && (grant->second & kPermWrite);
        }
        if (!allowed) throw ContractError(Errc::permission, "write denied on " + key);
        overlay_[key] = OverlayEntry{EntryContent{encode(value), e->owner, e->acl}, false};
    } else {
        overlay_[key] = OverlayEntry{EntryContent{encode(value), invoker(), {}}, true};
    }
}

void TxContext::put_owned(const std::string& key, const Value& value, const IdentityId& owner,
                          Acl acl) {
    const StateEntry* e = get_raw(key);
    if (key.rfind("oracle/", 0) == 0 && invokerIdentity_.role != Role::oracle)
        throw ContractError(Errc::permission, "oracle namespace is oracle-only");
    if (e && !invoker_is_authority() && e->owner != invoker())
        throw ContractError(Errc::permission, "write denied on " + key);
    overlay_[key] = OverlayEntry{EntryContent{encode(value), owner, std::move(acl)}, e == nullptr};
}

void TxContext::set_acl(const std::string& key, Acl acl) {
    const StateEntry* e = get_raw(key);
    if (!e) throw ContractError(Errc::not_found, "no such key: " + key);
    if (!invoker_is_authority() && e->owner != invoker())
        throw ContractError(Errc::permission, "only owner or authority may modify acl");
    overlay_[key] = OverlayEntry{EntryContent{e->value, e->owner, std::move(acl)}, false};
}

void TxContext::emit(const std::string& name, const Value& payload) {
    events_.push_back(Event{name, encode(payload)});
}

std::optional<Identity> TxContext::identity_by_id(const IdentityId& id) {
    const StateEntry* e = get_raw(key_identity(id));
    if (!e) return std::nullopt;
    return Identity::from_value(decode(e->value));
}

std::optional<Identity> TxContext::identity_by_label(const std::string& label) {
    const StateEntry* e = get_raw(key_identity_label(label));
    if (!e) return std::nullopt;
    Hash id;
    if (e->value.size() != 32) return std::nullopt;
    std::copy(e->value.begin(), e->value.end(), id.bytes.begin());
    return identity_by_id(id);
}

void TxContext::require_role(Role role, const char* what) {
    if (invokerIdentity_.role != role)
        throw ContractError(Errc::permission, std::string(what) + " requires role " +
                                                  std::string(role_name(role)));
}

ExecutionResult TxContext::take_result(Value returnValue) {
    ExecutionResult r;
    for (const auto& [key, version] : readSet_) r.readSet.push_back({key, version});
    for (const auto& [key, ov] : overlay_) r.writeSet.push_back({key, ov.content});
    r.events = std::move(events_);
    r.returnValue = encode(returnValue);
    return r;
}

ExecutionResult TxContext::take_error(const ContractError& err) {
    // Failed transactions leave no writes and no events; the read set is kept
    // so commit-time MVCC still sees what the decision depended on.
    ExecutionResult r;
    for (const auto& [key, version] : readSet_) r.readSet.push_back({key, version});
    r.error = err.code();
    return r;
}

// ---------------------------------------------------------------------------
// Preflight + execution
// ---------------------------------------------------------------------------

namespace {

bool is_bootstrap_registration(const WorldState& snapshot, const Transaction& tx) {
    return snapshot.find(kKeyAuthority) == nullptr && tx.contract == "identity" &&
           tx.operation == "register";
}

Identity resolve_invoker(const WorldState& snapshot, const Transaction& tx) {
    if (is_bootstrap_registration(snapshot, tx)) {
        // First transaction of a network: the authority registers itself with a
        // self-signed credential. Validated field-by-field right here.
        Value args = decode(tx.args);
        Identity self;
        const Bytes& pk = args.at("publicKey").as_bytes();
        const Bytes& cred = args.at("credential").as_bytes();
        if (pk.size() != 32 || cred.size() != 64)
            throw Error(Errc::validation, "malformed bootstrap registration");
        std::copy(pk.begin(), pk.end(), self.publicKey.begin());
        std::copy(cred.begin(), cred.end(), self.credential.begin());
        self.id = sha256(ByteSpan(pk.data(), pk.size()));
        self.label = args.at("label").as_string();
        auto role = role_from_name(args.at("role").as_string());
        if (!role || *role != Role::authority)
            throw Error(Errc::permission, "bootstrap registration must carry role authority");
        self.role = *role;
        if (self.id != tx.invoker)
            throw Error(Errc::permission, "bootstrap invoker must be the registered key");
        Bytes body = Identity::credential_body(self.id, self.role);
        if (!verify_signature(body, self.credential, self.publicKey))
            throw Error(Errc::permission, "bootstrap credential does not self-verify");
        return self;
    }

    const StateEntry* rec = snapshot.find(key_identity(tx.invoker));
    if (!rec) throw Error(Errc::permission, "unknown invoker identity");
    Identity id = Identity::from_value(decode(rec->value));

    const StateEntry* authRec = snapshot.find(kKeyAuthority);
    if (!authRec) throw Error(Errc::permission, "network has no authority");
    if (authRec->value.size() != 32) throw Error(Errc::internal, "malformed authority record");
    Hash authId;
    std::copy(authRec->value.begin(), authRec->value.end(), authId.bytes.begin());
    const StateEntry* authIdent = snapshot.find(key_identity(authId));
    if (!authIdent) throw Error(Errc::permission, "authority identity missing");
    Identity authority = Identity::from_value(decode(authIdent->value));

    Bytes body = Identity::credential_body(id.id, id.role);
    if (!verify_signature(body, id.credential, authority.publicKey))
        throw Error(Errc::permission, "invoker credential invalid");
    return id;
}

IdentityId authority_id(const WorldState& snapshot, const Transaction& tx) {
    const StateEntry* authRec = snapshot.find(kKeyAuthority);
    if (!authRec) {
        // Bootstrap: the registering identity is the authority.
        return tx.invoker;
    }
    Hash authId;
    if (authRec->value.size() != 32) throw Error(Errc::internal, "malformed authority record");
    std::copy(authRec->value.begin(), authRec->value.end(), authId.bytes.begin());
    return authId;
}

}  // namespace

void preflight(const WorldState& snapshot, const Transaction& tx, const ContractRegistry& reg) {
    Identity invoker = resolve_invoker(snapshot, tx);
    if (tx.signature.signer != tx.invoker)
        throw Error(Errc::permission, "signature signer differs from invoker");
    if (!verify_signature(tx.body_encoding(), tx.signature.bytes, invoker.publicKey))
        throw Error(Errc::permission, "invalid transaction signature");
    const Contract* c = reg.find(tx.contract);
    if (!c) throw Error(Errc::dispatch, "unknown contract " + tx.contract);
    if (!c->operations.contains(tx.operation))
        throw Error(Errc::dispatch, "unknown operation " + tx.contract + "." + tx.operation);
}

ExecutionResult execute_transaction(const WorldState& snapshot, const Transaction& tx,
                                    const ContractRegistry& reg) {
    Identity invoker = resolve_invoker(snapshot, tx);
    if (tx.signature.signer != tx.invoker)
        throw Error(Errc::permission, "signature signer differs from invoker");
    if (!verify_signature(tx.body_encoding(), tx.signature.bytes, invoker.publicKey))
        throw Error(Errc::permission, "invalid transaction signature");
    const Contract* c = reg.find(tx.contract);
    if (!c) throw Error(Errc::dispatch, "unknown contract " + tx.contract);
    auto op = c->operations.find(tx.operation);
    if (op == c->operations.end())
        throw Error(Errc::dispatch, "unknown operation " + tx.contract + "." + tx.operation);

    TxContext ctx(snapshot, tx, invoker, authority_id(snapshot, tx));
    try {
        Value ret = op->second(ctx, decode(tx.args));
        return ctx.take_result(std::move(ret));
    } catch (const ContractError& err) {
        return ctx.take_error(err);
    }
}

// ---------------------------------------------------------------------------
// Endorsement
// ---------------------------------------------------------------------------

EndorsementDecision endorse(const Transaction& tx,
                            std::span<const WorldState* const> peerSnapshots, size_t k,
                            const ContractRegistry& reg) {
    if (k == 0 || k > peerSnapshots.size())
        throw Error(Errc::validation, "quorum k out of range");

    Hash root0 = peerSnapshots[0]->root();
    for (const WorldState* peer : peerSnapshots.subspan(1))
        if (peer->root() != root0)
            throw Error(Errc::state_divergence, "peers at differing state roots");

    // Each execution works on its own immutable snapshot; run them in
    // parallel and gather in peer order.
    std::vector<std::future<ExecutionResult>> futures;
    futures.reserve(peerSnapshots.size());
    for (const WorldState* peer : peerSnapshots)
        futures.push_back(std::async(std::launch::async, [peer, &tx, &reg] {
            return execute_transaction(*peer, tx, reg);
        }));

    std::vector<ExecutionResult> results;
    std::vector<Bytes> encodings;
    for (auto& f : futures) {
        results.push_back(f.get());
        encodings.push_back(results.back().canonical_encoding());
    }

    // Largest cluster of byte-identical results.
    size_t bestIdx = 0, bestCount = 0;
    for (size_t i = 0; i < encodings.size(); ++i) {
        size_t count = 0;
        for (const Bytes& other : encodings)
            if (other == encodings[i]) ++count;
        if (count > bestCount) {
            bestCount = count;
            bestIdx = i;
        }
    }

    EndorsementDecision d;
    d.matching = bestCount;
    if (bestCount >= k) {
        d.accepted = true;
        d.result = std::move(results[bestIdx]);
    } else {
        d.divergence = "only " + std::to_string(bestCount) + " of " +
                       std::to_string(peerSnapshots.size()) + " peers agree (need " +
                       std::to_string(k) + ")";
    }
    return d;
}

// ---------------------------------------------------------------------------
// Commit, apply, replay
// ---------------------------------------------------------------------------

void commit(WorldState& state, const ExecutionResult& result, const Transaction& tx) {
    for (const ReadSetEntry& r : result.readSet) {
        if (state.version(r.key) != r.version)
            throw Error(Errc::mvcc_conflict,
                        "stale read of " + r.key + " in tx " + tx.txId.hex());
    }
    if (result.ok())
        for (const WriteSetEntry& w : result.writeSet) state.apply(w.key, w.content);
}

CommitOutcome apply_transaction(WorldState& state, const Transaction& tx,
                                const ContractRegistry& reg) {
    // 1. MVCC validation against the embedded read set.
    for (const ReadSetEntry& r : tx.readSet) {
        if (state.version(r.key) != r.version)
            return CommitOutcome{CommitOutcome::Kind::aborted, {}};
    }

    // 2. Deterministic re-execution; must reproduce the ordered read/write sets.
    ExecutionResult result = execute_transaction(state, tx, reg);
    if (result.readSet != tx.readSet || result.writeSet != tx.writeSet)
        throw Error(Errc::replay_divergence,
                    "re-execution diverges from recorded sets in tx " + tx.txId.hex());

    // 3. Apply.
    if (!result.ok()) return CommitOutcome{CommitOutcome::Kind::failed, std::move(result)};
    for (const WriteSetEntry& w : result.writeSet) state.apply(w.key, w.content);
    return CommitOutcome{CommitOutcome::Kind::committed, std::move(result)};
}

CommitOutcome apply_transaction_logged(WorldState& state, const Transaction& tx,
                                       const ContractRegistry& reg, uint64_t blockHeight,
                                       std::vector<TxRecord>& log) {
    CommitOutcome outcome = apply_transaction(state, tx, reg);
    TxRecord rec;
    rec.seqNo = tx.seqNo;
    rec.txId = tx.txId;
    rec.blockHeight = blockHeight;
    rec.logicalTime = tx.logicalTime;
    rec.invoker = tx.invoker;
    rec.contract = tx.contract;
    rec.operation = tx.operation;
    rec.args = decode(tx.args);
    rec.outcome = outcome.kind;
    rec.error = outcome.result.error;
    rec.returnValue = outcome.result.returnValue;
    rec.events = outcome.result.events;
    log.push_back(std::move(rec));
    return outcome;
}

ReplayResult replay_from_genesis(const Ledger& ledger, const ContractRegistry& reg) {
    ReplayResult out;

    std::vector<const Block*> order;
    if (ledger.mode() == LedgerMode::chain) {
        order.reserve(ledger.blocks().size());
        for (const Block& b : ledger.blocks()) order.push_back(&b);
    } else {
        order = linearize(ledger);
    }

    // File-order index, for the DAG prefix-stability rule.
    std::map<Hash, size_t> fileIndex;
    for (size_t i = 0; i < ledger.blocks().size(); ++i)
        fileIndex.emplace(ledger.blocks()[i].blockHash, i);

    std::set<Hash> emitted;
    for (const Block* b : order) {
        for (const Transaction& tx : b->transactions)
            apply_transaction_logged(out.state, tx, reg, b->height, out.log);

        // The recorded root is authoritative when the set of blocks replayed
        // before this one equals the set appended before it. For chains that
        // is always true; a DAG sibling whose order flipped after append keeps
        // a provisional root and is skipped.
        size_t myIdx = fileIndex.at(b->blockHash);
        bool prefixStable = emitted.size() == myIdx;
        if (prefixStable) {
            for (const Hash& h : emitted) {
                if (fileIndex.at(h) >= myIdx) {
                    prefixStable = false;
                    break;
                }
            }
        }
        if (prefixStable && out.state.root() != b->stateRoot)
            throw Error(Errc::replay_divergence,
                        "state root mismatch at block height " + std::to_string(b->height) +
                            " (" + b->blockHash.hex().substr(0, 12) + ")");
        emitted.insert(b->blockHash);
    }
    out.finalRoot = out.state.root();
    return out;
}

}  // namespace egov
