#include "egov/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

#include "egov/errors.hpp"

namespace egov {

static_assert(crypto_hash_sha256_BYTES == 32);
static_assert(crypto_sign_PUBLICKEYBYTES == 32);
static_assert(crypto_sign_SECRETKEYBYTES == 64);
static_assert(crypto_sign_BYTES == 64);

void crypto_init() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

std::string to_hex(ByteSpan bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::string Hash::hex() const {
    return to_hex(bytes);
}

std::optional<Hash> Hash::from_hex(std::string_view hex) {
    auto b = egov::from_hex(hex);
    if (!b || b->size() != 32) return std::nullopt;
    Hash h;
    std::memcpy(h.bytes.data(), b->data(), 32);
    return h;
}

bool Hash::is_zero() const {
    for (uint8_t b : bytes)
        if (b != 0) return false;
    return true;
}

Hash sha256(ByteSpan data) {
    crypto_init();
    Hash out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

Sha256::Sha256() {
    crypto_init();
    static_assert(sizeof(crypto_hash_sha256_state) <= sizeof(state_));
    crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

void Sha256::update(ByteSpan data) {
    crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                              data.data(), data.size());
}

Hash Sha256::finish() {
    Hash out;
    crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                             out.bytes.data());
    return out;
}

KeyPair KeyPair::generate() {
    crypto_init();
    KeyPair kp;
    crypto_sign_keypair(kp.pub.data(), kp.sec.data());
    return kp;
}

KeyPair KeyPair::from_seed(ByteSpan seed32) {
    crypto_init();
    if (seed32.size() != crypto_sign_SEEDBYTES)
        throw Error(Errc::validation, "key seed must be 32 bytes");
    KeyPair kp;
    crypto_sign_seed_keypair(kp.pub.data(), kp.sec.data(), seed32.data());
    return kp;
}

KeyPair KeyPair::derive(uint64_t run_seed, std::string_view label) {
    Bytes material;
    for (int shift = 56; shift >= 0; shift -= 8)
        material.push_back(static_cast<uint8_t>(run_seed >> shift));
    material.insert(material.end(), label.begin(), label.end());
    Hash seed = sha256(material);
    return from_seed(ByteSpan(seed.bytes.data(), seed.bytes.size()));
}

IdentityId KeyPair::id() const {
    return sha256(ByteSpan(pub.data(), pub.size()));
}

std::array<uint8_t, 64> KeyPair::sign(ByteSpan msg) const {
    crypto_init();
    std::array<uint8_t, 64> sig{};
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sec.data());
    return sig;
}

Signature KeyPair::sign_as(ByteSpan msg) const {
    return Signature{sign(msg), id()};
}

bool verify_signature(ByteSpan msg, const std::array<uint8_t, 64>& sig, const PublicKey& pub) {
    crypto_init();
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pub.data()) == 0;
}

}  // namespace egov
