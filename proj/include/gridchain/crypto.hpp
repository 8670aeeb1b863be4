#pragma once

#include <sodium.h>

#include <optional>
#include <stdexcept>

#include "gridchain/common.hpp"

namespace gridchain {

namespace detail {
inline void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}
}  // namespace detail

inline Hash32 sha256(ByteView data) {
    detail::ensure_sodium();
    Hash32 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

inline Hash32 sha256(const Bytes& data) { return sha256(ByteView(data.data(), data.size())); }

// Ed25519 key pair, derived deterministically from a 32-byte seed.
struct KeyPair {
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> secret{};
    PublicKey public_key{};
};

// Account address: low 20 bytes of the SHA-256 of the public key.
inline Address address_of(const PublicKey& pk) {
    Hash32 h = sha256(ByteView(pk.data(), pk.size()));
    Address a;
    std::memcpy(a.value.data(), h.data() + (kHashSize - kAddressSize), kAddressSize);
    return a;
}

inline std::pair<KeyPair, Address> create_account(const Seed& seed) {
    detail::ensure_sodium();
    KeyPair kp;
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret.data(), seed.data());
    return {kp, address_of(kp.public_key)};
}

// Seed input as raw bytes; rejects anything that is not exactly 32 bytes.
inline std::optional<std::pair<KeyPair, Address>> create_account(ByteView seed_bytes) {
    if (seed_bytes.size() != kSeedSize) return std::nullopt;
    Seed seed;
    std::memcpy(seed.data(), seed_bytes.data(), kSeedSize);
    return create_account(seed);
}

inline Signature sign_bytes(ByteView msg, const KeyPair& key) {
    detail::ensure_sodium();
    Signature sig;
    crypto_sign_ed25519_detached(sig.data(), nullptr, msg.data(), msg.size(), key.secret.data());
    return sig;
}

inline bool verify_bytes(ByteView msg, const Signature& sig, const PublicKey& pk) {
    detail::ensure_sodium();
    return crypto_sign_ed25519_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

// Domain separation tags so a transaction signature can never be replayed
// as a block signature or vice versa.
inline Bytes with_domain(const char* tag, ByteView msg) {
    Bytes out;
    const char* p = tag;
    while (*p) out.push_back(std::uint8_t(*p++));
    out.insert(out.end(), msg.begin(), msg.end());
    return out;
}

inline constexpr const char* kTxDomain = "gc.tx.v1:";
inline constexpr const char* kBlockDomain = "gc.blk.v1:";

}  // namespace gridchain
