#pragma once

#include <cstdint>
#include <optional>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/crypto.hpp"

namespace gridchain {

enum class TxKind : std::uint8_t {
    Deploy = 0,
    MeterUpdate = 1,
    DRIssueOrder = 2,
    DRSettle = 3,
    MarketSubmitOrder = 4,
    MarketRecordClearing = 5,
    VPPRegisterAsset = 6,
    VPPRecordDispatch = 7,
    VPPSettle = 8,
    OracleRequest = 9,
    OracleResponse = 10,
};

inline constexpr std::uint8_t kMaxTxKind = static_cast<std::uint8_t>(TxKind::OracleResponse);

inline const char* tx_kind_name(TxKind k) {
    switch (k) {
        case TxKind::Deploy: return "deploy";
        case TxKind::MeterUpdate: return "meter_update";
        case TxKind::DRIssueOrder: return "dr_issue_order";
        case TxKind::DRSettle: return "dr_settle";
        case TxKind::MarketSubmitOrder: return "market_submit_order";
        case TxKind::MarketRecordClearing: return "market_record_clearing";
        case TxKind::VPPRegisterAsset: return "vpp_register_asset";
        case TxKind::VPPRecordDispatch: return "vpp_record_dispatch";
        case TxKind::VPPSettle: return "vpp_settle";
        case TxKind::OracleRequest: return "oracle_request";
        case TxKind::OracleResponse: return "oracle_response";
    }
    return "unknown";
}

// A signed state transition. The sender's public key travels with the
// transaction so a ledger file verifies without any external key registry.
struct Transaction {
    Address sender;
    PublicKey sender_pubkey{};
    Address receiver;          // contract address; null address for deploys
    std::uint64_t nonce = 0;   // per-sender, strictly sequential from 0
    TxKind kind = TxKind::Deploy;
    Bytes payload;
    Signature signature{};

    bool operator==(const Transaction&) const = default;

    // Byte layout every other hash in the system builds on: the signature
    // covers everything before it, the id covers everything including it.
    void encode_unsigned(ByteWriter& w) const {
        w.address(sender);
        w.fixed(sender_pubkey);
        w.address(receiver);
        w.u64(nonce);
        w.u8(static_cast<std::uint8_t>(kind));
        w.var_bytes(payload);
    }

    Bytes unsigned_bytes() const {
        ByteWriter w;
        encode_unsigned(w);
        return std::move(w).take();
    }

    Bytes encode() const {
        ByteWriter w;
        encode_unsigned(w);
        w.fixed(signature);
        return std::move(w).take();
    }

    static std::optional<Transaction> decode(ByteView bytes) {
        ByteReader r(bytes);
        Transaction tx;
        std::uint8_t kind;
        if (!(r.address(tx.sender) && r.fixed(tx.sender_pubkey) && r.address(tx.receiver) &&
              r.u64(tx.nonce) && r.u8(kind) && r.var_bytes(tx.payload) && r.fixed(tx.signature)))
            return std::nullopt;
        if (kind > kMaxTxKind) return std::nullopt;
        if (!r.done()) return std::nullopt;
        tx.kind = static_cast<TxKind>(kind);
        return tx;
    }

    Hash32 id() const { return sha256(encode()); }
};

inline void sign_transaction(Transaction& tx, const KeyPair& keys) {
    tx.sender_pubkey = keys.public_key;
    tx.sender = address_of(keys.public_key);
    tx.signature = sign_bytes(with_domain(kTxDomain, tx.unsigned_bytes()), keys);
}

// Structural validity: the embedded key must hash to the claimed sender and
// the signature must verify under it. Nonce ordering is the chain's job.
inline bool verify_transaction(const Transaction& tx) {
    if (address_of(tx.sender_pubkey) != tx.sender) return false;
    return verify_bytes(with_domain(kTxDomain, tx.unsigned_bytes()), tx.signature,
                        tx.sender_pubkey);
}

}  // namespace gridchain
