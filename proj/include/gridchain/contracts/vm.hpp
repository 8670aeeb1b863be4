#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridchain/contracts/payloads.hpp"
#include "gridchain/contracts/state.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

// Execution outcome for one transaction. Failed receipts stay on-chain with
// the nonce consumed; the target contract is left byte-identical.
struct Receipt {
    Hash32 tx_id{};
    bool ok = false;
    std::string error;  // empty on success
    Address contract;   // target (or newly deployed) contract address

    static Receipt success(Hash32 id, Address contract) {
        return Receipt{id, true, {}, contract};
    }
    static Receipt failure(Hash32 id, std::string why, Address contract = {}) {
        return Receipt{id, false, std::move(why), contract};
    }
};

struct ExecContext {
    std::uint64_t block_tick = 0;
};

namespace vm_detail {

inline bool valid_reading(const EnergyReading& r) {
    return r.energy_wh >= -kMaxReadingWh && r.energy_wh <= kMaxReadingWh;
}

inline std::string meter_update(MeterContractState& state, const Address& contract_addr,
                                const Address& sender, const EnergyReading& reading) {
    if (sender != state.metadata.owner) return "sender is not the meter owner";
    if (reading.device != contract_addr) return "reading addressed to a different device";
    if (!valid_reading(reading)) return "reading out of bounds";
    if (state.latest && reading.slot <= state.latest->slot)
        return "reading slot not after latest accepted slot";
    state.latest = reading;
    state.readings_root = fold_reading(state.readings_root, reading);
    state.count += 1;
    return {};
}

inline std::string dr_issue_order(DRContractState& state, const Address& sender,
                                  FlexibilityOrder order, std::uint64_t tick) {
    if (sender != state.aggregator) return "sender is not the contract aggregator";
    if (order.window_start >= order.window_end) return "empty order window";
    if (order.window_start <= tick) return "order window must start in the future";
    if (order.amount_wh <= 0) return "order amount must be positive";
    if (order.incentive_rate < 0 || order.penalty_rate < 0) return "negative rate";
    for (const auto& existing : state.orders)
        if (!state.is_settled(existing.id) &&
            existing.overlaps(order.window_start, order.window_end))
            return "window overlaps an unsettled order";
    order.id = static_cast<std::uint64_t>(state.orders.size());
    state.orders.push_back(std::move(order));
    return {};
}

// Settlement arithmetic shared with the auditor: delivered flexibility is
// the per-slot deviation from baseline, clamped to [0, amount], summed.
inline Settlement settle_order(const FlexibilityOrder& order, const BaselineProfile& baseline,
                               const std::vector<std::int64_t>& metered_by_slot) {
    const std::uint64_t window_len = order.window_end - order.window_start;
    std::int64_t delivered = 0;
    for (std::uint64_t i = 0; i < window_len; ++i) {
        const std::uint64_t slot = order.window_start + i;
        std::int64_t deviation = baseline.at_slot(slot) - metered_by_slot[i];
        if (order.direction == FlexDirection::Increase) deviation = -deviation;
        delivered += clamp_i64(deviation, 0, order.amount_wh);
    }
    const std::int64_t ordered_total = order.amount_wh * static_cast<std::int64_t>(window_len);
    const std::int64_t shortfall = ordered_total - delivered;
    Settlement s;
    s.order_id = order.id;
    s.delivered_wh = delivered;
    s.shortfall_wh = shortfall;
    s.reward = floor_div(order.incentive_rate * delivered, 1000);
    s.penalty = floor_div(order.penalty_rate * shortfall, 1000);
    return s;
}

inline std::string dr_settle(DRContractState& state, const Address& sender,
                             const DRSettlePayload& payload, std::uint64_t tick) {
    if (sender != state.aggregator) return "sender is not the contract aggregator";
    const FlexibilityOrder* order = state.find_order(payload.order_id);
    if (!order) return "unknown order";
    if (state.is_settled(payload.order_id)) return "order already settled";
    if (tick < order->window_end) return "order window has not elapsed";

    const std::uint64_t window_len = order->window_end - order->window_start;
    std::vector<std::int64_t> metered_by_slot(window_len, 0);
    std::vector<bool> seen(window_len, false);
    for (const auto& reading : payload.metered) {
        if (reading.slot < order->window_start || reading.slot >= order->window_end)
            return "metered reading outside the order window";
        const std::uint64_t i = reading.slot - order->window_start;
        if (seen[i]) return "duplicate metered slot";
        if (!valid_reading(reading)) return "metered reading out of bounds";
        seen[i] = true;
        metered_by_slot[i] = reading.energy_wh;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        return "metered readings do not cover the window";

    state.settlements.push_back(settle_order(*order, state.baseline, metered_by_slot));
    return {};
}

inline std::string market_submit_order(MarketContractState& state, const Address& sender,
                                       Order order, std::uint64_t tick) {
    if (order.owner != sender) return "order owner is not the sender";
    if (order.qty_wh <= 0) return "order quantity must be positive";
    if (order.limit_price < 0) return "negative limit price";
    if (order.slot <= tick) return "delivery slot must be in the future";
    if (state.slot_cleared(order.slot)) return "market already cleared for this slot";
    order.id = state.next_order_id++;
    state.open_orders.push_back(std::move(order));
    return {};
}

// Re-derives every feasibility fact from the contract's own book; an oracle
// key compromise cannot push an infeasible clearing past this.
inline std::string market_record_clearing(MarketContractState& state, const Address& sender,
                                          const ClearingResult& result) {
    if (sender != state.oracle) return "sender is not the market oracle";
    if (state.slot_cleared(result.slot)) return "slot already cleared";

    std::map<std::uint64_t, Order*> book;
    for (auto& o : state.open_orders)
        if (o.slot == result.slot) book[o.id] = &o;

    std::map<std::uint64_t, std::int64_t> filled;
    std::int64_t total = 0;
    for (const auto& m : result.matches) {
        if (m.qty_wh <= 0) return "non-positive match quantity";
        auto bid_it = book.find(m.bid_id);
        auto offer_it = book.find(m.offer_id);
        if (bid_it == book.end() || offer_it == book.end())
            return "match references an unknown order";
        const Order& bid = *bid_it->second;
        const Order& offer = *offer_it->second;
        if (bid.side != OrderSide::Bid || offer.side != OrderSide::Offer)
            return "match sides are wrong";
        if (bid.limit_price < result.clearing_price) return "matched bid below clearing price";
        if (offer.limit_price > result.clearing_price) return "matched offer above clearing price";
        filled[m.bid_id] += m.qty_wh;
        filled[m.offer_id] += m.qty_wh;
        if (filled[m.bid_id] > bid.qty_wh || filled[m.offer_id] > offer.qty_wh)
            return "match exceeds open quantity";
        total += m.qty_wh;
    }
    std::int64_t bought = 0, sold = 0;
    for (const auto& [id, qty] : filled) {
        const Order& o = *book[id];
        (o.side == OrderSide::Bid ? bought : sold) += qty;
    }
    if (bought != sold) return "bought and sold quantities differ";
    if (total != result.total_qty_wh) return "total quantity mismatch";
    if (result.clearing_price < 0) return "negative clearing price";

    for (const auto& m : result.matches) {
        Trade t;
        t.buyer = book[m.bid_id]->owner;
        t.seller = book[m.offer_id]->owner;
        t.qty_wh = m.qty_wh;
        t.price = result.clearing_price;
        t.slot = result.slot;
        state.trades.push_back(t);
    }
    state.clearings.push_back(result);
    // The slot's market is closed: matched quantities are consumed and
    // whatever did not clear expires.
    std::erase_if(state.open_orders,
                  [&](const Order& o) { return o.slot == result.slot; });
    return {};
}

inline std::string vpp_register_asset(VPPContractState& state, const Address& sender,
                                      AssetRecord asset) {
    if (asset.owner != sender) return "asset owner is not the sender";
    if (asset.capacity_wh_per_slot <= 0) return "asset capacity must be positive";
    if (asset.cost_rate < 0) return "negative cost rate";
    asset.id = static_cast<std::uint64_t>(state.assets.size());
    state.assets.push_back(std::move(asset));
    return {};
}

inline std::string vpp_record_dispatch(VPPContractState& state, const Address& sender,
                                       DispatchRecord dispatch, std::uint64_t tick) {
    if (sender != state.operator_addr && sender != state.oracle)
        return "sender is neither operator nor oracle";
    if (dispatch.window_start >= dispatch.window_end) return "empty dispatch window";
    if (dispatch.window_start <= tick) return "dispatch window must start in the future";
    if (dispatch.penalty_rate < 0) return "negative penalty rate";
    if (dispatch.members.empty()) return "dispatch has no members";
    const std::uint64_t slots = dispatch.dispatch_slots();
    std::vector<bool> used(state.assets.size(), false);
    for (const auto& m : dispatch.members) {
        const AssetRecord* asset = state.find_asset(m.asset_id);
        if (!asset) return "dispatch member not registered";
        if (used[m.asset_id]) return "duplicate dispatch member";
        used[m.asset_id] = true;
        if (asset->response_time_slots > dispatch.max_response_slots)
            return "member response time exceeds service limit";
        if (asset->max_dispatch_slots < slots) return "member cannot sustain the window";
        if (!dispatch.band.empty() && asset->band != dispatch.band)
            return "member band does not match the service";
        if (m.scheduled_wh_per_slot <= 0 || m.scheduled_wh_per_slot > asset->capacity_wh_per_slot)
            return "scheduled energy outside member capacity";
    }
    dispatch.id = static_cast<std::uint64_t>(state.dispatches.size());
    state.dispatches.push_back(std::move(dispatch));
    return {};
}

// Per-member payout arithmetic shared with the auditor.
inline VppMemberSettlement settle_member(const AssetRecord& asset, const DispatchMember& member,
                                         std::uint64_t window_slots, std::int64_t delivered_wh) {
    VppMemberSettlement row;
    row.asset_id = member.asset_id;
    row.scheduled_wh = member.scheduled_wh_per_slot * static_cast<std::int64_t>(window_slots);
    row.delivered_wh = clamp_i64(delivered_wh, 0, row.scheduled_wh);
    row.shortfall_wh = row.scheduled_wh - row.delivered_wh;
    row.payout = floor_div(asset.cost_rate * row.delivered_wh, 1000);
    return row;
}

inline std::string vpp_settle(VPPContractState& state, const Address& sender,
                              const VPPSettlePayload& payload, std::uint64_t tick) {
    if (sender != state.operator_addr) return "sender is not the VPP operator";
    const DispatchRecord* dispatch = state.find_dispatch(payload.dispatch_id);
    if (!dispatch) return "unknown dispatch";
    if (state.dispatch_settled(payload.dispatch_id)) return "dispatch already settled";
    if (tick < dispatch->window_end) return "dispatch window has not elapsed";

    std::map<std::uint64_t, std::int64_t> delivered;
    for (const auto& d : payload.delivered) {
        if (delivered.contains(d.asset_id)) return "duplicate delivered entry";
        delivered[d.asset_id] = d.delivered_wh;
    }
    for (const auto& m : dispatch->members)
        if (!delivered.contains(m.asset_id)) return "delivered entries do not cover the coalition";
    if (delivered.size() != dispatch->members.size()) return "delivered entry for a non-member";

    VppSettlementRecord record;
    record.dispatch_id = payload.dispatch_id;
    for (const auto& m : dispatch->members) {
        const AssetRecord* asset = state.find_asset(m.asset_id);
        auto row = settle_member(*asset, m, dispatch->dispatch_slots(), delivered[m.asset_id]);
        row.penalty = floor_div(dispatch->penalty_rate * row.shortfall_wh, 1000);
        record.members.push_back(row);
    }
    state.settlements.push_back(std::move(record));
    return {};
}

inline std::string deploy(WorldState& world, const Transaction& tx, Address& contract_addr) {
    ByteReader r(tx.payload);
    std::uint8_t kind_tag;
    if (!r.u8(kind_tag) || kind_tag > static_cast<std::uint8_t>(ContractKind::VPP))
        return "malformed deploy payload";
    const auto kind = static_cast<ContractKind>(kind_tag);
    contract_addr = contract_address(tx.sender, tx.nonce);

    ContractState state;
    switch (kind) {
        case ContractKind::Meter: {
            MeterInit init;
            if (!MeterInit::decode(r, init) || !r.done()) return "malformed meter init";
            if (init.metadata.unit != "Wh") return "meter unit must be Wh";
            if (init.metadata.device_type.empty() || init.metadata.measurement_type.empty())
                return "meter metadata incomplete";
            MeterContractState s;
            s.metadata = std::move(init.metadata);
            state = std::move(s);
            break;
        }
        case ContractKind::DR: {
            DRInit init;
            if (!DRInit::decode(r, init) || !r.done()) return "malformed dr init";
            if (init.baseline.slot_wh.empty()) return "empty baseline profile";
            DRContractState s;
            s.prosumer = init.prosumer;
            s.aggregator = init.aggregator;
            s.baseline = std::move(init.baseline);
            state = std::move(s);
            break;
        }
        case ContractKind::Market: {
            MarketInit init;
            if (!MarketInit::decode(r, init) || !r.done()) return "malformed market init";
            MarketContractState s;
            s.oracle = init.oracle;
            state = std::move(s);
            break;
        }
        case ContractKind::VPP: {
            VPPInit init;
            if (!VPPInit::decode(r, init) || !r.done()) return "malformed vpp init";
            VPPContractState s;
            s.operator_addr = init.operator_addr;
            s.oracle = init.oracle;
            state = std::move(s);
            break;
        }
    }
    // (sender, nonce) pairs never repeat on a valid chain, so the slot is free.
    auto [it, inserted] = world.contracts.emplace(contract_addr, std::move(state));
    if (!inserted) return "contract address already occupied";
    return {};
}

}  // namespace vm_detail

// The single entry point that mutates a WorldState. Signature and nonce
// correctness are the chain's preconditions; everything else that can go
// wrong becomes a failed receipt with the contract map untouched.
inline Receipt exec_transaction(WorldState& world, const Transaction& tx, const ExecContext& ctx) {
    const Hash32 id = tx.id();
    world.nonces[tx.sender] = tx.nonce + 1;

    if (tx.kind == TxKind::Deploy) {
        if (!tx.receiver.is_null())
            return Receipt::failure(id, "deploy receiver must be the null address");
        Address contract_addr;
        if (auto err = vm_detail::deploy(world, tx, contract_addr); !err.empty())
            return Receipt::failure(id, err);
        return Receipt::success(id, contract_addr);
    }

    if (tx.kind == TxKind::OracleRequest || tx.kind == TxKind::OracleResponse) {
        // Pure on-chain records between accounts; contracts are not involved.
        if (world.is_contract(tx.receiver))
            return Receipt::failure(id, "oracle message addressed to a contract");
        return Receipt::success(id, tx.receiver);
    }

    auto it = world.contracts.find(tx.receiver);
    if (it == world.contracts.end()) return Receipt::failure(id, "unknown contract");

    // Mutate a copy so a mid-method failure cannot leave partial writes.
    ContractState scratch = it->second;
    std::string err = "method does not apply to this contract kind";

    switch (tx.kind) {
        case TxKind::MeterUpdate:
            if (auto* s = std::get_if<MeterContractState>(&scratch)) {
                auto p = MeterUpdatePayload::decode(tx.payload);
                err = p ? vm_detail::meter_update(*s, tx.receiver, tx.sender, p->reading)
                        : "malformed payload";
            }
            break;
        case TxKind::DRIssueOrder:
            if (auto* s = std::get_if<DRContractState>(&scratch)) {
                auto p = DRIssueOrderPayload::decode(tx.payload);
                err = p ? vm_detail::dr_issue_order(*s, tx.sender, p->order, ctx.block_tick)
                        : "malformed payload";
            }
            break;
        case TxKind::DRSettle:
            if (auto* s = std::get_if<DRContractState>(&scratch)) {
                auto p = DRSettlePayload::decode(tx.payload);
                err = p ? vm_detail::dr_settle(*s, tx.sender, *p, ctx.block_tick)
                        : "malformed payload";
            }
            break;
        case TxKind::MarketSubmitOrder:
            if (auto* s = std::get_if<MarketContractState>(&scratch)) {
                auto p = MarketSubmitOrderPayload::decode(tx.payload);
                err = p ? vm_detail::market_submit_order(*s, tx.sender, p->order, ctx.block_tick)
                        : "malformed payload";
            }
            break;
        case TxKind::MarketRecordClearing:
            if (auto* s = std::get_if<MarketContractState>(&scratch)) {
                auto p = MarketRecordClearingPayload::decode(tx.payload);
                err = p ? vm_detail::market_record_clearing(*s, tx.sender, p->result)
                        : "malformed payload";
            }
            break;
        case TxKind::VPPRegisterAsset:
            if (auto* s = std::get_if<VPPContractState>(&scratch)) {
                auto p = VPPRegisterAssetPayload::decode(tx.payload);
                err = p ? vm_detail::vpp_register_asset(*s, tx.sender, p->asset)
                        : "malformed payload";
            }
            break;
        case TxKind::VPPRecordDispatch:
            if (auto* s = std::get_if<VPPContractState>(&scratch)) {
                auto p = VPPRecordDispatchPayload::decode(tx.payload);
                err = p ? vm_detail::vpp_record_dispatch(*s, tx.sender, p->dispatch, ctx.block_tick)
                        : "malformed payload";
            }
            break;
        case TxKind::VPPSettle:
            if (auto* s = std::get_if<VPPContractState>(&scratch)) {
                auto p = VPPSettlePayload::decode(tx.payload);
                err = p ? vm_detail::vpp_settle(*s, tx.sender, *p, ctx.block_tick)
                        : "malformed payload";
            }
            break;
        default:
            err = "unsupported transaction kind";
            break;
    }

    if (!err.empty()) return Receipt::failure(id, err, tx.receiver);
    it->second = std::move(scratch);
    return Receipt::success(id, tx.receiver);
}

}  // namespace gridchain
