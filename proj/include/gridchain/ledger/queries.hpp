#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "gridchain/common.hpp"
#include "gridchain/contracts/payloads.hpp"
#include "gridchain/contracts/state.hpp"
#include "gridchain/contracts/types.hpp"
#include "gridchain/ledger/block.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

// Per-slot reading series of one meter, rebuilt from the raw transaction
// stream. Mirrors the contract's acceptance rules exactly (owner sender,
// matching device, strictly increasing slots, bounded magnitude), so the
// result equals what the contract accepted without needing stored receipts.
inline std::map<std::uint64_t, std::int64_t> meter_history(const std::vector<Block>& blocks,
                                                           const Address& meter,
                                                           std::uint64_t up_to_height) {
    std::map<std::uint64_t, std::int64_t> series;
    bool deployed = false;
    Address owner{};
    std::optional<std::uint64_t> last_slot;

    for (const auto& block : blocks) {
        if (block.height > up_to_height) break;
        for (const auto& tx : block.transactions) {
            if (!deployed) {
                if (tx.kind != TxKind::Deploy || !tx.receiver.is_null()) continue;
                if (contract_address(tx.sender, tx.nonce) != meter) continue;
                ByteReader r(tx.payload);
                std::uint8_t kind_tag;
                MeterInit init;
                if (!r.u8(kind_tag) || kind_tag != static_cast<std::uint8_t>(ContractKind::Meter))
                    continue;
                if (!MeterInit::decode(r, init) || !r.done()) continue;
                if (init.metadata.unit != "Wh" || init.metadata.device_type.empty() ||
                    init.metadata.measurement_type.empty())
                    continue;
                deployed = true;
                owner = init.metadata.owner;
                continue;
            }
            if (tx.kind != TxKind::MeterUpdate || tx.receiver != meter) continue;
            if (tx.sender != owner) continue;
            auto payload = MeterUpdatePayload::decode(tx.payload);
            if (!payload) continue;
            const EnergyReading& reading = payload->reading;
            if (reading.device != meter) continue;
            if (reading.energy_wh > kMaxReadingWh || reading.energy_wh < -kMaxReadingWh) continue;
            if (last_slot && reading.slot <= *last_slot) continue;
            last_slot = reading.slot;
            series[reading.slot] = reading.energy_wh;
        }
    }
    return series;
}

// The unique meter contract owned by `owner`, if exactly one exists.
inline std::optional<Address> meter_owned_by(const WorldState& state, const Address& owner) {
    std::optional<Address> found;
    for (const auto& [addr, contract] : state.contracts) {
        const auto* meter = std::get_if<MeterContractState>(&contract);
        if (meter == nullptr || meter->metadata.owner != owner) continue;
        if (found) return std::nullopt;  // ambiguous
        found = addr;
    }
    return found;
}

// The unique demand-response contract naming `prosumer`, if exactly one exists.
inline std::optional<Address> dr_contract_for(const WorldState& state, const Address& prosumer) {
    std::optional<Address> found;
    for (const auto& [addr, contract] : state.contracts) {
        const auto* dr = std::get_if<DRContractState>(&contract);
        if (dr == nullptr || dr->prosumer != prosumer) continue;
        if (found) return std::nullopt;  // ambiguous
        found = addr;
    }
    return found;
}

template <typename State>
inline std::optional<Address> first_contract_of(const WorldState& state) {
    for (const auto& [addr, contract] : state.contracts)
        if (std::holds_alternative<State>(contract)) return addr;
    return std::nullopt;
}

// Flexibility delivered by `owner` against its recorded baseline over a
// half-open slot window, per-slot clamped to [0, cap]. Slots without an
// accepted reading deliver nothing. Both the settlement-producing actor and
// the auditor call this, so a recorded payout can be re-derived exactly.
inline std::int64_t delivered_against_baseline(const std::vector<Block>& blocks,
                                               const WorldState& state, const Address& owner,
                                               std::uint64_t window_start, std::uint64_t window_end,
                                               std::int64_t per_slot_cap,
                                               std::uint64_t up_to_height) {
    const auto meter = meter_owned_by(state, owner);
    const auto dr = dr_contract_for(state, owner);
    if (!meter || !dr) return 0;
    const auto& baseline = std::get<DRContractState>(state.contracts.at(*dr)).baseline;
    if (baseline.slot_wh.empty()) return 0;
    const auto history = meter_history(blocks, *meter, up_to_height);
    std::int64_t delivered = 0;
    for (std::uint64_t slot = window_start; slot < window_end; ++slot) {
        auto it = history.find(slot);
        if (it == history.end()) continue;
        delivered += clamp_i64(baseline.at_slot(slot) - it->second, 0, per_slot_cap);
    }
    return delivered;
}

}  // namespace gridchain
