#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/contracts/state.hpp"
#include "gridchain/crypto.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

// Commitment over the ordered transaction list; length-prefixed per entry so
// no two distinct lists share an image.
inline Hash32 tx_list_hash(const std::vector<Transaction>& txs) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs) w.var_bytes(tx.encode());
    return sha256(std::move(w).take());
}

// The authority's public key is embedded so a ledger file carries its own
// verification material; schedule membership is checked against genesis.
struct Block {
    std::uint64_t height = 0;
    Hash32 prev_hash{};
    std::uint64_t tick = 0;
    Address authority;
    PublicKey authority_pubkey{};
    Hash32 txs_hash{};
    Hash32 state_root{};
    Signature signature{};
    std::vector<Transaction> transactions;

    bool operator==(const Block&) const = default;

    Bytes header_bytes() const {
        ByteWriter w;
        w.u64(height);
        w.fixed(prev_hash);
        w.u64(tick);
        w.address(authority);
        w.fixed(authority_pubkey);
        w.fixed(txs_hash);
        w.fixed(state_root);
        return std::move(w).take();
    }

    Bytes encode() const {
        ByteWriter w;
        w.raw(header_bytes());
        w.fixed(signature);
        w.u32(static_cast<std::uint32_t>(transactions.size()));
        for (const auto& tx : transactions) w.var_bytes(tx.encode());
        return std::move(w).take();
    }

    static std::optional<Block> decode(ByteView bytes) {
        ByteReader r(bytes);
        Block b;
        std::uint32_t count;
        if (!(r.u64(b.height) && r.fixed(b.prev_hash) && r.u64(b.tick) && r.address(b.authority) &&
              r.fixed(b.authority_pubkey) && r.fixed(b.txs_hash) && r.fixed(b.state_root) &&
              r.fixed(b.signature) && r.u32(count)) ||
            count > 1u << 20)
            return std::nullopt;
        b.transactions.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            Bytes tx_bytes;
            if (!r.var_bytes(tx_bytes)) return std::nullopt;
            auto tx = Transaction::decode(tx_bytes);
            if (!tx) return std::nullopt;
            b.transactions.push_back(std::move(*tx));
        }
        if (!r.done()) return std::nullopt;
        return b;
    }

    // Identity covers the signature too, so a re-signed block is a new block.
    Hash32 hash() const {
        ByteWriter w;
        w.raw(header_bytes());
        w.fixed(signature);
        return sha256(std::move(w).take());
    }

    void sign(const KeyPair& keys) {
        authority_pubkey = keys.public_key;
        authority = address_of(keys.public_key);
        signature = sign_bytes(with_domain(kBlockDomain, header_bytes()), keys);
    }

    bool signature_valid() const {
        if (address_of(authority_pubkey) != authority) return false;
        return verify_bytes(with_domain(kBlockDomain, header_bytes()), signature,
                            authority_pubkey);
    }
};

// Height 0 is a constant: no transactions, empty state, null authority, zero
// signature. Every chain starts from these exact bytes, which lets replay
// run from a ledger file alone.
inline Block genesis_block() {
    Block b;
    b.txs_hash = tx_list_hash({});
    b.state_root = WorldState{}.root();
    return b;
}

}  // namespace gridchain
