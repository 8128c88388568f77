#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egov/ledger.hpp"
#include "egov/state.hpp"

namespace egov {

// ---------------------------------------------------------------------------
// Contracts
// ---------------------------------------------------------------------------

enum class Category { static_, dynamic, oracleDriven };

std::string_view category_name(Category c);

class TxContext;
using Handler = std::function<Value(TxContext&, const Value& args)>;

// A deterministic state-transition program. Handlers are pure functions of
// (state snapshot, args, logicalTime, invoker): no wall clock, no randomness,
// no I/O. Oracle-driven contracts read external facts only from "oracle/" keys.
struct Contract {
    std::string name;
    Category category = Category::dynamic;
    std::map<std::string, Handler> operations;
};

class ContractRegistry {
public:
    void add(Contract c);
    const Contract* find(const std::string& name) const;

private:
    std::map<std::string, Contract> contracts_;
};

// Populates the full built-in contract set (identity, config, data, consent,
// oracle, law, diploma, thermostat, land, energy, health).
ContractRegistry builtin_registry();

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct Event {
    std::string name;
    Bytes payload;

    bool operator==(const Event&) const = default;
};

struct ExecutionResult {
    std::vector<ReadSetEntry> readSet;    // sorted by key
    std::vector<WriteSetEntry> writeSet;  // sorted by key; empty on failure
    std::vector<Event> events;            // empty on failure
    Bytes returnValue;
    std::optional<Errc> error;  // nullopt = success; set = contractError(code)

    bool ok() const { return !error.has_value(); }
    // Endorsement compares these bytes; they cover everything deterministic.
    Bytes canonical_encoding() const;
};

// Handler-facing execution context. Reads are captured in the read set with
// the version they observed (0 for absent keys); writes accumulate in an
// overlay that later reads see, so a transaction reading its own write does
// not add a spurious dependency.
class TxContext {
public:
    TxContext(const WorldState& snapshot, const Transaction& tx, const Identity& invoker,
              const IdentityId& authority);

    const IdentityId& invoker() const { return invokerIdentity_.id; }
    const Identity& invoker_identity() const { return invokerIdentity_; }
    const IdentityId& authority() const { return authority_; }
    bool invoker_is_authority() const { return invokerIdentity_.id == authority_; }
    int64_t logical_time() const { return tx_.logicalTime; }
    const Transaction& tx() const { return tx_; }

    // Raw reads: recorded in the read set, no permission check. Policy-layer
    // helpers below build on these.
    const StateEntry* get_raw(const std::string& key);
    std::optional<Value> get_decoded(const std::string& key);
    void scan_raw(const std::string& prefix,
                  const std::function<bool(const std::string&, const StateEntry&)>& fn);

    // Permission-checked read: owner, authority, acl grant, or an approved
    // un-revoked consent covering the key. Throws ContractError(permission) /
    // (not_found).
    Value read_checked(const std::string& key);
    bool may_read(const std::string& key, const StateEntry& entry, const IdentityId& reader);
    // True if an approved un-revoked consent held by `reader` covers `key`.
    bool consent_covers(const IdentityId& reader, const std::string& key);

    // Permission-checked write to an existing key (owner/authority/acl) or
    // creation with owner = invoker.
    void put(const std::string& key, const Value& value);
    // Creation/overwrite with explicit ownership; owner or authority only.
    void put_owned(const std::string& key, const Value& value, const IdentityId& owner,
                   Acl acl);
    void set_acl(const std::string& key, Acl acl);

    void emit(const std::string& name, const Value& payload);

    // Identity helpers.
    std::optional<Identity> identity_by_id(const IdentityId& id);
    std::optional<Identity> identity_by_label(const std::string& label);
    void require_role(Role role, const char* what);

    ExecutionResult take_result(Value returnValue);
    ExecutionResult take_error(const ContractError& err);

private:
    struct OverlayEntry {
        EntryContent content;
        bool creates = false;
    };

    const StateEntry* base_get(const std::string& key);

    const WorldState& snapshot_;
    const Transaction& tx_;
    Identity invokerIdentity_;
    IdentityId authority_;
    std::map<std::string, uint64_t> readSet_;
    std::map<std::string, OverlayEntry> overlay_;
    // Stable-address view of overlay entries handed out by get_raw.
    std::map<std::string, StateEntry> overlayView_;
    std::vector<Event> events_;
};

// Registers the state-policy contracts: identity, config, data, consent.
void register_policy_contracts(ContractRegistry& reg);

// Preflight checks a transaction must pass before it may execute or be
// ordered: registered invoker with a valid authority credential, valid
// signature over the body, known contract and operation. Violations throw
// (Errc::permission / not_found / dispatch / validation) and the transaction
// is rejected outright — it never reaches the ledger. The sole exception is
// the network-bootstrap self-registration of the authority.
void preflight(const WorldState& snapshot, const Transaction& tx, const ContractRegistry& reg);

// Executes without mutating the snapshot. Preflight violations throw;
// handler failures come back as contractError results.
ExecutionResult execute_transaction(const WorldState& snapshot, const Transaction& tx,
                                    const ContractRegistry& reg);

// ---------------------------------------------------------------------------
// Endorsement
// ---------------------------------------------------------------------------

struct EndorsementDecision {
    bool accepted = false;
    ExecutionResult result;    // the agreed result when accepted
    size_t matching = 0;       // size of the largest identical-result cluster
    std::string divergence;    // populated on rejection
};

// Executes the transaction on every peer snapshot (concurrently) and accepts
// iff at least k produce byte-identical results. Peers must sit at the same
// state root; anything else is a simulation bug (Errc::state_divergence).
EndorsementDecision endorse(const Transaction& tx,
                            std::span<const WorldState* const> peerSnapshots, size_t k,
                            const ContractRegistry& reg);

// ---------------------------------------------------------------------------
// Commit and replay
// ---------------------------------------------------------------------------

struct CommitOutcome {
    enum class Kind { committed, failed, aborted };
    Kind kind = Kind::committed;
    ExecutionResult result;

    bool wrote() const { return kind == Kind::committed; }
};

std::string_view commit_kind_name(CommitOutcome::Kind k);

// MVCC commit: validates that every read-set version is still current, then
// applies the write set atomically. Stale reads throw Errc::mvcc_conflict.
void commit(WorldState& state, const ExecutionResult& result, const Transaction& tx);

// The deterministic block-application step shared by the ordering authority,
// every replica, and replay:
//   1. embedded read set stale against `state`  -> aborted, no writes
//   2. re-execute; result must match the embedded read/write sets
//      (divergence means ledger corruption or nondeterminism -> throws)
//   3. contractError -> failed (recorded, no writes); else writes applied
CommitOutcome apply_transaction(WorldState& state, const Transaction& tx,
                                const ContractRegistry& reg);

// Per-transaction record of an applied block, the source for audit queries
// and run reports. Reconstructed exactly by replay.
struct TxRecord {
    uint64_t seqNo = 0;
    Hash txId;
    uint64_t blockHeight = 0;
    int64_t logicalTime = 0;
    IdentityId invoker;
    std::string contract;
    std::string operation;
    Value args;
    CommitOutcome::Kind outcome = CommitOutcome::Kind::committed;
    std::optional<Errc> error;
    Bytes returnValue;
    std::vector<Event> events;
};

CommitOutcome apply_transaction_logged(WorldState& state, const Transaction& tx,
                                       const ContractRegistry& reg, uint64_t blockHeight,
                                       std::vector<TxRecord>& log);

struct ReplayResult {
    Hash finalRoot;
    WorldState state;
    std::vector<TxRecord> log;
};

// Re-executes every transaction from an empty genesis state, in file order
// for chains and linearized order for DAGs. Recorded per-block stateRoots are
// checked wherever the block's linearized prefix equals its append-time
// ledger (always, for chains); a mismatch throws Errc::replay_divergence
// naming the block. Unmerged DAG siblings carry append-time provisional roots
// and are exempt until a descendant re-joins them.
ReplayResult replay_from_genesis(const Ledger& ledger, const ContractRegistry& reg);

}  // namespace egov
