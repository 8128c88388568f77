#include "egov/ledger.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>

namespace egov {

namespace {

Value hash_value(const Hash& h) {
    return Value(Bytes(h.bytes.begin(), h.bytes.end()));
}

Hash hash_from(const Value& v, const char* what) {
    const Bytes& b = v.as_bytes();
    if (b.size() != 32) throw Error(Errc::encoding, std::string("bad hash field: ") + what);
    Hash h;
    std::copy(b.begin(), b.end(), h.bytes.begin());
    return h;
}

std::array<uint8_t, 64> sig_from(const Value& v, const char* what) {
    const Bytes& b = v.as_bytes();
    if (b.size() != 64) throw Error(Errc::encoding, std::string("bad signature field: ") + what);
    std::array<uint8_t, 64> s{};
    std::copy(b.begin(), b.end(), s.begin());
    return s;
}

}  // namespace

std::string_view ledger_mode_name(LedgerMode m) {
    return m == LedgerMode::chain ? "chain" : "dag";
}

// ---------------------------------------------------------------------------
// Transaction encoding
// ---------------------------------------------------------------------------

Bytes Transaction::body_encoding() const {
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
    Value::Map body;
    body.emplace("args", Value(args));
    body.emplace("contract", Value(contract));
    body.emplace("invoker", hash_value(invoker));
    body.emplace("logicalTime", Value(logicalTime));
    body.emplace("operation", Value(operation));
    body.emplace("readSet", Value(std::move(reads)));
    body.emplace("seqNo", Value(static_cast<int64_t>(seqNo)));
    body.emplace("writeSet", Value(std::move(writes)));
    return encode(Value(std::move(body)));
}

Hash Transaction::compute_id() const {
    return sha256(body_encoding());
}

Value Transaction::to_value() const {
    Value::Map m;
    m.emplace("body", decode(body_encoding()));
    m.emplace("sig", Value(Bytes(signature.bytes.begin(), signature.bytes.end())));
    m.emplace("signer", hash_value(signature.signer));
    m.emplace("txId", hash_value(txId));
    return Value(std::move(m));
}

Transaction Transaction::from_value(const Value& v) {
    Transaction tx;
    const Value& body = v.at("body");
    tx.seqNo = static_cast<uint64_t>(body.at("seqNo").as_int());
    tx.logicalTime = body.at("logicalTime").as_int();
    tx.invoker = hash_from(body.at("invoker"), "invoker");
    tx.contract = body.at("contract").as_string();
    tx.operation = body.at("operation").as_string();
    tx.args = body.at("args").as_bytes();
    std::string prev;
    for (const Value& rv : body.at("readSet").as_list()) {
        ReadSetEntry e{rv.at("key").as_string(),
                       static_cast<uint64_t>(rv.at("version").as_int())};
        if (!tx.readSet.empty() && e.key <= prev)
            throw Error(Errc::encoding, "readSet keys not strictly ascending");
        prev = e.key;
        tx.readSet.push_back(std::move(e));
    }
    prev.clear();
    for (const Value& wv : body.at("writeSet").as_list()) {
        WriteSetEntry e{wv.at("key").as_string(), EntryContent::from_value(wv)};
        if (!tx.writeSet.empty() && e.key <= prev)
            throw Error(Errc::encoding, "writeSet keys not strictly ascending");
        prev = e.key;
        tx.writeSet.push_back(std::move(e));
    }
    tx.txId = hash_from(v.at("txId"), "txId");
    tx.signature.bytes = sig_from(v.at("sig"), "sig");
    tx.signature.signer = hash_from(v.at("signer"), "signer");
    return tx;
}

// ---------------------------------------------------------------------------
// Block encoding
// ---------------------------------------------------------------------------

Hash Block::compute_hash() const {
    Value::List parents;
    for (const Hash& p : parentHashes) parents.push_back(hash_value(p));
    Value::List txIds;
    for (const Transaction& tx : transactions) txIds.push_back(hash_value(tx.txId));
    Value::Map m;
    m.emplace("height", Value(static_cast<int64_t>(height)));
    m.emplace("mode", Value(static_cast<int64_t>(mode)));
    m.emplace("parents", Value(std::move(parents)));
    m.emplace("stateRoot", hash_value(stateRoot));
    m.emplace("txIds", Value(std::move(txIds)));
    return sha256(encode(Value(std::move(m))));
}

Value Block::to_value() const {
    Value::List parents;
    for (const Hash& p : parentHashes) parents.push_back(hash_value(p));
    Value::List txs;
    for (const Transaction& tx : transactions) txs.push_back(tx.to_value());
    Value::Map m;
    m.emplace("authSig", Value(Bytes(authoritySignature.bytes.begin(),
                                     authoritySignature.bytes.end())));
    m.emplace("authSigner", hash_value(authoritySignature.signer));
    m.emplace("blockHash", hash_value(blockHash));
    m.emplace("height", Value(static_cast<int64_t>(height)));
    m.emplace("mode", Value(static_cast<int64_t>(mode)));
    m.emplace("parents", Value(std::move(parents)));
    m.emplace("stateRoot", hash_value(stateRoot));
    m.emplace("txs", Value(std::move(txs)));
    return Value(std::move(m));
}

Block Block::from_value(const Value& v) {
    Block b;
    b.height = static_cast<uint64_t>(v.at("height").as_int());
    int64_t mode = v.at("mode").as_int();
    if (mode != 0 && mode != 1) throw Error(Errc::encoding, "bad ledger mode");
    b.mode = static_cast<LedgerMode>(mode);
    for (const Value& p : v.at("parents").as_list())
        b.parentHashes.push_back(hash_from(p, "parent"));
    for (const Value& t : v.at("txs").as_list())
        b.transactions.push_back(Transaction::from_value(t));
    b.stateRoot = hash_from(v.at("stateRoot"), "stateRoot");
    b.blockHash = hash_from(v.at("blockHash"), "blockHash");
    b.authoritySignature.bytes = sig_from(v.at("authSig"), "authSig");
    b.authoritySignature.signer = hash_from(v.at("authSigner"), "authSigner");
    return b;
}

// ---------------------------------------------------------------------------
// Ledger file
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[4] = {'E', 'G', 'S', 'L'};
}

Ledger Ledger::open(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(Errc::corrupt_ledger, "cannot open " + file.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 5 || std::memcmp(data.data(), kMagic, 4) != 0)
        throw Error(Errc::corrupt_ledger, "bad magic");
    if (data[4] > 1) throw Error(Errc::corrupt_ledger, "bad mode flag");
    Ledger ledger(static_cast<LedgerMode>(data[4]));

    size_t pos = 5;
    while (pos < data.size()) {
        if (data.size() - pos < 4) throw Error(Errc::corrupt_ledger, "truncated record length");
        uint32_t len = (uint32_t(data[pos]) << 24) | (uint32_t(data[pos + 1]) << 16) |
                       (uint32_t(data[pos + 2]) << 8) | uint32_t(data[pos + 3]);
        pos += 4;
        if (data.size() - pos < len) throw Error(Errc::corrupt_ledger, "truncated record");
        Block b;
        try {
            b = Block::from_value(decode(ByteSpan(data.data() + pos, len)));
        } catch (const Error& e) {
            throw Error(Errc::corrupt_ledger, e.what());
        }
        pos += len;
        if (ledger.byHash_.contains(b.blockHash))
            throw Error(Errc::corrupt_ledger, "duplicate block hash");
        ledger.byHash_.emplace(b.blockHash, ledger.blocks_.size());
        ledger.blocks_.push_back(std::move(b));
    }
    return ledger;
}

void Ledger::attach_file(const std::filesystem::path& file) {
    file_ = file;
    std::ofstream out(file_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::corrupt_ledger, "cannot create " + file_.string());
    out.write(kMagic, 4);
    char mode = static_cast<char>(mode_);
    out.write(&mode, 1);
    out.close();
    for (const Block& b : blocks_) persist(b);
}

void Ledger::persist(const Block& b) {
    if (file_.empty()) return;
    Bytes rec = encode(b.to_value());
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::corrupt_ledger, "cannot append to " + file_.string());
    uint8_t len[4] = {static_cast<uint8_t>(rec.size() >> 24), static_cast<uint8_t>(rec.size() >> 16),
                      static_cast<uint8_t>(rec.size() >> 8), static_cast<uint8_t>(rec.size())};
    out.write(reinterpret_cast<const char*>(len), 4);
    out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
}

std::vector<Hash> Ledger::tips() const {
    std::set<Hash> referenced;
    for (const Block& b : blocks_)
        for (const Hash& p : b.parentHashes) referenced.insert(p);
    std::vector<Hash> out;
    for (const Block& b : blocks_)
        if (!referenced.contains(b.blockHash)) out.push_back(b.blockHash);
    return out;
}

const Block* Ledger::block_by_hash(const Hash& h) const {
    auto it = byHash_.find(h);
    return it == byHash_.end() ? nullptr : &blocks_[it->second];
}

const Block& Ledger::append(std::vector<Transaction> txs, const Hash& stateRoot,
                            const KeyPair& authority) {
    Block b;
    b.mode = mode_;
    b.parentHashes = tips();
    if (mode_ == LedgerMode::chain && b.parentHashes.size() > 1)
        throw Error(Errc::corrupt_ledger, "chain ledger has multiple tips");
    if (b.parentHashes.size() > 2)
        throw Error(Errc::dag_structure, "tip set exceeds the two-parent cap");
    if (blocks_.empty()) {
        b.height = 0;
        b.parentHashes.clear();
    } else {
        uint64_t maxParent = 0;
        for (const Hash& p : b.parentHashes)
            maxParent = std::max(maxParent, blocks_[byHash_.at(p)].height);
        b.height = maxParent + 1;
    }
    b.transactions = std::move(txs);
    b.stateRoot = stateRoot;
    return finish_append(std::move(b), authority);
}

const Block& Ledger::append_with_parents(const std::vector<Hash>& parents,
                                         std::vector<Transaction> txs, const Hash& stateRoot,
                                         const KeyPair& authority) {
    if (mode_ != LedgerMode::dag)
        throw Error(Errc::dag_structure, "explicit parents require dag mode");
    if (parents.empty() || parents.size() > 2)
        throw Error(Errc::dag_structure, "dag blocks take 1..=2 parents");
    Block b;
    b.mode = mode_;
    uint64_t maxParent = 0;
    for (const Hash& p : parents) {
        auto it = byHash_.find(p);
        if (it == byHash_.end()) throw Error(Errc::dag_structure, "unknown parent " + p.hex());
        maxParent = std::max(maxParent, blocks_[it->second].height);
    }
    b.parentHashes = parents;
    b.height = maxParent + 1;
    b.transactions = std::move(txs);
    b.stateRoot = stateRoot;
    return finish_append(std::move(b), authority);
}

const Block& Ledger::finish_append(Block b, const KeyPair& authority) {
    if (b.transactions.empty()) throw Error(Errc::ordering, "blocks must carry transactions");

    uint64_t expected = 0;
    if (!blocks_.empty()) {
        const Block& prev = blocks_.back();
        expected = prev.transactions.back().seqNo + 1;
        // Re-verify the prior tip record before extending it.
        if (prev.compute_hash() != prev.blockHash)
            throw Error(Errc::corrupt_ledger, "prior tip fails re-verification");
    }
    for (const Transaction& tx : b.transactions) {
        if (tx.seqNo != expected)
            throw Error(Errc::ordering, "seqNo gap: expected " + std::to_string(expected) +
                                            ", got " + std::to_string(tx.seqNo));
        ++expected;
    }

    b.blockHash = b.compute_hash();
    b.authoritySignature = authority.sign_as(ByteSpan(b.blockHash.bytes.data(), 32));
    byHash_.emplace(b.blockHash, blocks_.size());
    blocks_.push_back(std::move(b));
    persist(blocks_.back());
    return blocks_.back();
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

IdentityRegistry registry_from_ledger(const Ledger& ledger) {
    IdentityRegistry reg;
    for (const Block& b : ledger.blocks()) {
        for (const Transaction& tx : b.transactions) {
            for (const WriteSetEntry& w : tx.writeSet) {
                if (w.key.rfind("id/", 0) != 0 || w.key.rfind("id/label/", 0) == 0) continue;
                try {
                    Identity id = Identity::from_value(decode(w.content.value));
                    reg.emplace(id.id, id.publicKey);
                } catch (const Error&) {
                    // Not an identity record; verification will flag the block
                    // through signature checks if this matters.
                }
            }
        }
    }
    return reg;
}

VerificationReport verify_ledger(const Ledger& ledger, const IdentityRegistry& registry) {
    VerificationReport report;
    const auto& blocks = ledger.blocks();
    uint64_t expectedSeq = 0;
    const IdentityId* authority = nullptr;

    for (size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        BlockCheck check;
        check.height = b.height;
        check.blockHash = b.blockHash;

        // Link structure.
        if (b.mode != ledger.mode()) {
            check.hashLink = false;
            check.detail = "block mode disagrees with file mode";
        } else if (i == 0) {
            if (b.height != 0 || !b.parentHashes.empty()) {
                check.hashLink = false;
                check.detail = "genesis must have height 0 and no parents";
            }
        } else if (ledger.mode() == LedgerMode::chain) {
            if (b.parentHashes.size() != 1 || b.parentHashes[0] != blocks[i - 1].blockHash ||
                b.height != blocks[i - 1].height + 1) {
                check.hashLink = false;
                check.detail = "chain linkage broken";
            }
        } else {
            if (b.parentHashes.empty() || b.parentHashes.size() > 2) {
                check.hashLink = false;
                check.detail = "dag parent count out of range";
            } else {
                uint64_t maxParent = 0;
                for (const Hash& p : b.parentHashes) {
                    const Block* parent = nullptr;
                    for (size_t j = 0; j < i; ++j)
                        if (blocks[j].blockHash == p) parent = &blocks[j];
                    if (!parent) {
                        check.hashLink = false;
                        check.detail = "parent not found among earlier blocks";
                        break;
                    }
                    maxParent = std::max(maxParent, parent->height);
                }
                if (check.hashLink && b.height != maxParent + 1) {
                    check.hashLink = false;
                    check.detail = "dag height not 1 + max parent height";
                }
            }
        }

        // Transaction integrity.
        for (const Transaction& tx : b.transactions) {
            if (tx.compute_id() != tx.txId) {
                check.txIds = false;
                check.detail = "txId mismatch at seqNo " + std::to_string(tx.seqNo);
            }
            if (tx.signature.signer != tx.invoker) {
                check.txSignatures = false;
                check.detail = "tx signer differs from invoker";
                continue;
            }
            auto it = registry.find(tx.invoker);
            if (it == registry.end() ||
                !verify_signature(tx.body_encoding(), tx.signature.bytes, it->second)) {
                check.txSignatures = false;
                check.detail = "tx signature invalid at seqNo " + std::to_string(tx.seqNo);
            }
            if (tx.seqNo != expectedSeq) {
                check.seqContiguity = false;
                check.detail = "seqNo not contiguous";
            }
            ++expectedSeq;
        }
        if (b.transactions.empty()) {
            check.seqContiguity = false;
            check.detail = "empty block";
        }

        // Block hash and authority signature.
        if (b.compute_hash() != b.blockHash) {
            check.blockHashOk = false;
            check.detail = "blockHash mismatch";
        }
        if (i == 0) authority = &b.authoritySignature.signer;
        auto authIt = registry.find(b.authoritySignature.signer);
        if (authIt == registry.end() ||
            (authority && b.authoritySignature.signer != *authority) ||
            !verify_signature(ByteSpan(b.blockHash.bytes.data(), 32), b.authoritySignature.bytes,
                              authIt->second)) {
            check.authoritySig = false;
            if (check.detail.empty()) check.detail = "authority signature invalid";
        }

        if (!check.ok() && !report.firstBad) report.firstBad = i;
        report.blocks.push_back(std::move(check));
    }

    report.valid = !report.firstBad.has_value();
    return report;
}

std::string VerificationReport::summary() const {
    if (!structuralError.empty()) return "structural error: " + structuralError;
    if (valid) return "valid (" + std::to_string(blocks.size()) + " blocks)";
    const BlockCheck& bad = blocks[*firstBad];
    return "invalid at block " + std::to_string(bad.height) + ": " + bad.detail;
}

// ---------------------------------------------------------------------------
// Linearization
// ---------------------------------------------------------------------------

std::vector<const Block*> linearize(const Ledger& ledger) {
    const auto& blocks = ledger.blocks();
    if (blocks.empty()) return {};

    std::map<Hash, size_t> index;
    for (size_t i = 0; i < blocks.size(); ++i) index.emplace(blocks[i].blockHash, i);

    std::vector<size_t> pendingParents(blocks.size(), 0);
    std::vector<std::vector<size_t>> children(blocks.size());
    size_t parentless = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        if (b.parentHashes.empty()) ++parentless;
        if (b.parentHashes.size() > 2)
            throw Error(Errc::dag_structure, "block has more than two parents");
        for (const Hash& p : b.parentHashes) {
            auto it = index.find(p);
            if (it == index.end())
                throw Error(Errc::dag_structure, "unresolvable parent " + p.hex());
            children[it->second].push_back(i);
            ++pendingParents[i];
        }
    }
    if (parentless != 1)
        throw Error(Errc::dag_structure, "expected exactly one genesis block");

    // Kahn's algorithm; the ready set is ordered by blockHash bytes.
    std::set<std::pair<Hash, size_t>> ready;
    for (size_t i = 0; i < blocks.size(); ++i)
        if (pendingParents[i] == 0) ready.insert({blocks[i].blockHash, i});

    std::vector<const Block*> order;
    order.reserve(blocks.size());
    while (!ready.empty()) {
        auto [hash, i] = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(&blocks[i]);
        for (size_t child : children[i])
            if (--pendingParents[child] == 0) ready.insert({blocks[child].blockHash, child});
    }
    if (order.size() != blocks.size())
        throw Error(Errc::dag_structure, "cycle detected in block references");
    return order;
}

}  // namespace egov
