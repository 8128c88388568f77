#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egov/crypto.hpp"
#include "egov/state.hpp"
#include "egov/value.hpp"

namespace egov {

// ---------------------------------------------------------------------------
// Transactions
// ---------------------------------------------------------------------------

struct ReadSetEntry {
    std::string key;
    uint64_t version;  // 0 = key was absent when read

    bool operator==(const ReadSetEntry&) const = default;
};

struct WriteSetEntry {
    std::string key;
    EntryContent content;

    bool operator==(const WriteSetEntry&) const = default;
};

struct Transaction {
    Hash txId;
    uint64_t seqNo = 0;
    int64_t logicalTime = 0;  // milliseconds since scenario epoch, never wall clock
    IdentityId invoker;
    std::string contract;
    std::string operation;
    Bytes args;  // canonical encoding of the argument value
    std::vector<ReadSetEntry> readSet;    // sorted by key, no duplicates
    std::vector<WriteSetEntry> writeSet;  // sorted by key, no duplicates
    Signature signature;                  // invoker signature over body_encoding()

    // Canonical encoding of every field except txId and signature.
    // txId = sha256(body); the invoker signs the same bytes.
    Bytes body_encoding() const;
    Hash compute_id() const;

    Value to_value() const;
    static Transaction from_value(const Value& v);

    bool operator==(const Transaction&) const = default;
};

// ---------------------------------------------------------------------------
// Blocks and the ledger file
// ---------------------------------------------------------------------------

enum class LedgerMode : uint8_t { chain = 0, dag = 1 };

std::string_view ledger_mode_name(LedgerMode m);

struct Block {
    uint64_t height = 0;
    LedgerMode mode = LedgerMode::chain;
    std::vector<Hash> parentHashes;  // exactly 1 in chain mode; 0 for genesis; <=2 in dag mode
    std::vector<Transaction> transactions;
    Hash stateRoot;  // post-execution world state root
    Hash blockHash;
    Signature authoritySignature;  // over blockHash.bytes

    // blockHash = sha256(encode({height, mode, parents, stateRoot, txIds})).
    // The mode is bound into the hash so the file's mode flag byte is
    // tamper-evident like everything else.
    Hash compute_hash() const;

    Value to_value() const;
    static Block from_value(const Value& v);
};

// Append-only ledger with optional file persistence.
//
// File layout: magic "EGSL", one mode byte, then records of
// (4-byte big-endian length, canonical block bytes). Bit-exact across
// platforms.
class Ledger {
public:
    explicit Ledger(LedgerMode mode) : mode_(mode) {}

    // Parses an existing file. Structural problems (bad magic, truncation,
    // undecodable records) throw Errc::corrupt_ledger.
    static Ledger open(const std::filesystem::path& file);

    // Starts persisting to `file`; writes header and any blocks already held.
    void attach_file(const std::filesystem::path& file);

    LedgerMode mode() const { return mode_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    bool empty() const { return blocks_.empty(); }

    // Current tip set: blocks without children, in file order.
    std::vector<Hash> tips() const;

    // Appends a block whose parents are the current tip set (empty for
    // genesis). `txs` must be non-empty with seqNos contiguous to the ledger;
    // gaps throw Errc::ordering. The prior tip is re-verified first; a
    // mismatch throws Errc::corrupt_ledger.
    const Block& append(std::vector<Transaction> txs, const Hash& stateRoot,
                        const KeyPair& authority);

    // DAG-mode append with explicit parents (used to build fork topologies in
    // tests). Parents must resolve; 1..=2 of them.
    const Block& append_with_parents(const std::vector<Hash>& parents,
                                     std::vector<Transaction> txs, const Hash& stateRoot,
                                     const KeyPair& authority);

    const Block* block_by_hash(const Hash& h) const;

private:
    const Block& finish_append(Block b, const KeyPair& authority);
    void persist(const Block& b);

    LedgerMode mode_;
    std::vector<Block> blocks_;
    std::map<Hash, size_t> byHash_;
    std::filesystem::path file_;
};

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

using IdentityRegistry = std::map<IdentityId, PublicKey>;

struct BlockCheck {
    uint64_t height = 0;
    Hash blockHash;
    bool hashLink = true;      // parents resolve / chain shape holds
    bool txIds = true;         // every txId matches its body
    bool txSignatures = true;  // every tx signature verifies for its invoker
    bool blockHashOk = true;   // stored hash matches recomputation
    bool authoritySig = true;  // authority signature over blockHash verifies
    bool seqContiguity = true; // seqNos contiguous with the preceding record
    std::string detail;

    bool ok() const {
        return hashLink && txIds && txSignatures && blockHashOk && authoritySig && seqContiguity;
    }
};

struct VerificationReport {
    bool valid = false;
    std::vector<BlockCheck> blocks;
    std::optional<size_t> firstBad;  // index into blocks
    std::string structuralError;     // non-empty if the file itself is malformed

    std::string summary() const;
};

// Per-block hash/signature/ordering verification. Failures are reported, not
// thrown. seqNo contiguity is checked in file order (the order the ordering
// authority assigned them) in both modes.
VerificationReport verify_ledger(const Ledger& ledger, const IdentityRegistry& registry);

// Collects (identity -> public key) from identity-registration write sets so
// a ledger file can be verified standalone.
IdentityRegistry registry_from_ledger(const Ledger& ledger);

// ---------------------------------------------------------------------------
// DAG linearization
// ---------------------------------------------------------------------------

// Deterministic topological order: parents before children, ties broken by
// ascending blockHash bytes (Kahn's algorithm with a min-hash ready set).
// Chain-shaped ledgers linearize to their file order. Cycles, unresolvable
// parents, >2 parents or a second parentless block throw Errc::dag_structure.
std::vector<const Block*> linearize(const Ledger& ledger);

}  // namespace egov
