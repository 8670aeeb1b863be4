#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/contracts/types.hpp"
#include "gridchain/crypto.hpp"

namespace gridchain {

enum class ContractKind : std::uint8_t { Meter = 0, DR = 1, Market = 2, VPP = 3 };

inline const char* contract_kind_name(ContractKind k) {
    switch (k) {
        case ContractKind::Meter: return "meter";
        case ContractKind::DR: return "dr";
        case ContractKind::Market: return "market";
        case ContractKind::VPP: return "vpp";
    }
    return "unknown";
}

// Fixed at deployment; meter_update cannot touch any of these fields.
struct MeterMetadata {
    std::string device_type;
    std::string measurement_type;
    std::string unit;
    Address owner;

    bool operator==(const MeterMetadata&) const = default;

    void encode(ByteWriter& w) const {
        w.str(device_type);
        w.str(measurement_type);
        w.str(unit);
        w.address(owner);
    }

    static bool decode(ByteReader& r, MeterMetadata& out) {
        return r.str(out.device_type) && r.str(out.measurement_type) && r.str(out.unit) &&
               r.address(out.owner);
    }
};

struct MeterContractState {
    MeterMetadata metadata;
    std::optional<EnergyReading> latest;
    Hash32 readings_root{};  // all-zero before the first accepted reading
    std::uint64_t count = 0;

    bool operator==(const MeterContractState&) const = default;

    void encode(ByteWriter& w) const {
        metadata.encode(w);
        w.u8(latest ? 1 : 0);
        if (latest) latest->encode(w);
        w.fixed(readings_root);
        w.u64(count);
    }

    static bool decode(ByteReader& r, MeterContractState& out) {
        if (!MeterMetadata::decode(r, out.metadata)) return false;
        std::uint8_t has;
        if (!r.u8(has) || has > 1) return false;
        if (has) {
            EnergyReading reading;
            if (!EnergyReading::decode(r, reading)) return false;
            out.latest = reading;
        } else {
            out.latest.reset();
        }
        return r.fixed(out.readings_root) && r.u64(out.count);
    }
};

// Rolling commitment over the full reading history; replayable from the
// MeterUpdate transactions alone.
inline Hash32 fold_reading(const Hash32& root, const EnergyReading& reading) {
    ByteWriter w;
    w.fixed(root);
    reading.encode(w);
    return sha256(std::move(w).take());
}

struct DRContractState {
    Address prosumer;
    Address aggregator;
    BaselineProfile baseline;
    std::vector<FlexibilityOrder> orders;
    std::vector<Settlement> settlements;

    bool operator==(const DRContractState&) const = default;

    const FlexibilityOrder* find_order(std::uint64_t id) const {
        for (const auto& o : orders)
            if (o.id == id) return &o;
        return nullptr;
    }

    bool is_settled(std::uint64_t order_id) const {
        for (const auto& s : settlements)
            if (s.order_id == order_id) return true;
        return false;
    }

    void encode(ByteWriter& w) const {
        w.address(prosumer);
        w.address(aggregator);
        baseline.encode(w);
        w.u32(static_cast<std::uint32_t>(orders.size()));
        for (const auto& o : orders) o.encode(w);
        w.u32(static_cast<std::uint32_t>(settlements.size()));
        for (const auto& s : settlements) s.encode(w);
    }

    static bool decode(ByteReader& r, DRContractState& out) {
        if (!(r.address(out.prosumer) && r.address(out.aggregator) &&
              BaselineProfile::decode(r, out.baseline)))
            return false;
        std::uint32_t n;
        if (!r.u32(n) || n > 65536) return false;
        out.orders.resize(n);
        for (auto& o : out.orders)
            if (!FlexibilityOrder::decode(r, o)) return false;
        if (!r.u32(n) || n > 65536) return false;
        out.settlements.resize(n);
        for (auto& s : out.settlements)
            if (!Settlement::decode(r, s)) return false;
        return true;
    }
};

struct MarketContractState {
    Address oracle;
    std::uint64_t next_order_id = 0;
    std::vector<Order> open_orders;
    std::vector<ClearingResult> clearings;
    std::vector<Trade> trades;

    bool operator==(const MarketContractState&) const = default;

    bool slot_cleared(std::uint64_t slot) const {
        for (const auto& c : clearings)
            if (c.slot == slot) return true;
        return false;
    }

    void encode(ByteWriter& w) const {
        w.address(oracle);
        w.u64(next_order_id);
        w.u32(static_cast<std::uint32_t>(open_orders.size()));
        for (const auto& o : open_orders) o.encode(w);
        w.u32(static_cast<std::uint32_t>(clearings.size()));
        for (const auto& c : clearings) c.encode(w);
        w.u32(static_cast<std::uint32_t>(trades.size()));
        for (const auto& t : trades) t.encode(w);
    }

    static bool decode(ByteReader& r, MarketContractState& out) {
        if (!r.address(out.oracle) || !r.u64(out.next_order_id)) return false;
        std::uint32_t n;
        if (!r.u32(n) || n > 65536) return false;
        out.open_orders.resize(n);
        for (auto& o : out.open_orders)
            if (!Order::decode(r, o)) return false;
        if (!r.u32(n) || n > 65536) return false;
        out.clearings.resize(n);
        for (auto& c : out.clearings)
            if (!ClearingResult::decode(r, c)) return false;
        if (!r.u32(n) || n > 65536) return false;
        out.trades.resize(n);
        for (auto& t : out.trades)
            if (!Trade::decode(r, t)) return false;
        return true;
    }
};

struct VPPContractState {
    Address operator_addr;
    Address oracle;
    std::vector<AssetRecord> assets;
    std::vector<DispatchRecord> dispatches;
    std::vector<VppSettlementRecord> settlements;

    bool operator==(const VPPContractState&) const = default;

    const AssetRecord* find_asset(std::uint64_t id) const {
        for (const auto& a : assets)
            if (a.id == id) return &a;
        return nullptr;
    }

    const DispatchRecord* find_dispatch(std::uint64_t id) const {
        for (const auto& d : dispatches)
            if (d.id == id) return &d;
        return nullptr;
    }

    bool dispatch_settled(std::uint64_t dispatch_id) const {
        for (const auto& s : settlements)
            if (s.dispatch_id == dispatch_id) return true;
        return false;
    }

    void encode(ByteWriter& w) const {
        w.address(operator_addr);
        w.address(oracle);
        w.u32(static_cast<std::uint32_t>(assets.size()));
        for (const auto& a : assets) a.encode(w);
        w.u32(static_cast<std::uint32_t>(dispatches.size()));
        for (const auto& d : dispatches) d.encode(w);
        w.u32(static_cast<std::uint32_t>(settlements.size()));
        for (const auto& s : settlements) s.encode(w);
    }

    static bool decode(ByteReader& r, VPPContractState& out) {
        if (!r.address(out.operator_addr) || !r.address(out.oracle)) return false;
        std::uint32_t n;
        if (!r.u32(n) || n > 65536) return false;
        out.assets.resize(n);
        for (auto& a : out.assets)
            if (!AssetRecord::decode(r, a)) return false;
        if (!r.u32(n) || n > 65536) return false;
        out.dispatches.resize(n);
        for (auto& d : out.dispatches)
            if (!DispatchRecord::decode(r, d)) return false;
        if (!r.u32(n) || n > 65536) return false;
        out.settlements.resize(n);
        for (auto& s : out.settlements)
            if (!VppSettlementRecord::decode(r, s)) return false;
        return true;
    }
};

using ContractState =
    std::variant<MeterContractState, DRContractState, MarketContractState, VPPContractState>;

inline ContractKind contract_kind(const ContractState& s) {
    return static_cast<ContractKind>(s.index());
}

inline void encode_contract_state(ByteWriter& w, const ContractState& s) {
    std::visit([&](const auto& inner) { inner.encode(w); }, s);
}

inline bool decode_contract_state(ByteReader& r, ContractKind kind, ContractState& out) {
    switch (kind) {
        case ContractKind::Meter: {
            MeterContractState s;
            if (!MeterContractState::decode(r, s)) return false;
            out = std::move(s);
            return true;
        }
        case ContractKind::DR: {
            DRContractState s;
            if (!DRContractState::decode(r, s)) return false;
            out = std::move(s);
            return true;
        }
        case ContractKind::Market: {
            MarketContractState s;
            if (!MarketContractState::decode(r, s)) return false;
            out = std::move(s);
            return true;
        }
        case ContractKind::VPP: {
            VPPContractState s;
            if (!VPPContractState::decode(r, s)) return false;
            out = std::move(s);
            return true;
        }
    }
    return false;
}

// Full ledger state between blocks. std::map keeps entries address-sorted,
// which is exactly the order the state root commits to.
struct WorldState {
    std::map<Address, ContractState> contracts;
    std::map<Address, std::uint64_t> nonces;

    bool operator==(const WorldState&) const = default;

    std::uint64_t nonce_of(const Address& a) const {
        auto it = nonces.find(a);
        return it == nonces.end() ? 0 : it->second;
    }

    bool is_contract(const Address& a) const { return contracts.contains(a); }

    Bytes canonical_encoding() const {
        ByteWriter w;
        w.u32(static_cast<std::uint32_t>(contracts.size()));
        for (const auto& [addr, state] : contracts) {
            w.address(addr);
            w.u8(static_cast<std::uint8_t>(contract_kind(state)));
            ByteWriter inner;
            encode_contract_state(inner, state);
            w.var_bytes(std::move(inner).take());
        }
        w.u32(static_cast<std::uint32_t>(nonces.size()));
        for (const auto& [addr, nonce] : nonces) {
            w.address(addr);
            w.u64(nonce);
        }
        return std::move(w).take();
    }

    Hash32 root() const { return sha256(canonical_encoding()); }
};

// Deterministic contract addressing: a sender's nth deploy always lands at
// the same address on every node.
inline Address contract_address(const Address& sender, std::uint64_t nonce) {
    ByteWriter w;
    w.address(sender);
    w.u64(nonce);
    Hash32 h = sha256(std::move(w).take());
    Address out;
    std::copy(h.end() - kAddressSize, h.end(), out.value.begin());
    return out;
}

}  // namespace gridchain
