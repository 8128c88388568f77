#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "egov/bytes.hpp"

namespace egov {

// 32-byte SHA-256 digest. Hex rendering is lowercase, 64 chars.
struct Hash {
    std::array<uint8_t, 32> bytes{};

    std::string hex() const;
    static std::optional<Hash> from_hex(std::string_view hex);
    bool is_zero() const;

    auto operator<=>(const Hash&) const = default;
};

using IdentityId = Hash;

Hash sha256(ByteSpan data);

// Incremental SHA-256, used to hash large state encodings without
// materializing them.
class Sha256 {
public:
    Sha256();
    void update(ByteSpan data);
    Hash finish();

private:
    std::array<uint8_t, 104> state_;  // fits crypto_hash_sha256_state
};

struct Signature {
    std::array<uint8_t, 64> bytes{};
    IdentityId signer;

    bool operator==(const Signature&) const = default;
};

using PublicKey = std::array<uint8_t, 32>;

// Ed25519 key pair. Identities are self-sovereign: the holder generates the
// pair and the network knows them by the hash of the public key.
struct KeyPair {
    PublicKey pub{};
    std::array<uint8_t, 64> sec{};

    static KeyPair generate();
    static KeyPair from_seed(ByteSpan seed32);
    // Deterministic derivation for scripted runs: seed = sha256(runSeed || label).
    static KeyPair derive(uint64_t run_seed, std::string_view label);

    IdentityId id() const;
    std::array<uint8_t, 64> sign(ByteSpan msg) const;
    Signature sign_as(ByteSpan msg) const;
};

bool verify_signature(ByteSpan msg, const std::array<uint8_t, 64>& sig, const PublicKey& pub);

void crypto_init();

}  // namespace egov
