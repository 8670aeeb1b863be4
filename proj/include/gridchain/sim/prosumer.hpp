#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridchain/contracts/payloads.hpp"
#include "gridchain/ledger/chain.hpp"
#include "gridchain/ledger/queries.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

// Dispatchable-asset terms a prosumer registers with an aggregation
// contract; capacity 0 means the prosumer owns no such asset.
struct AssetParams {
    std::int64_t capacity_wh_per_slot = 0;
    std::uint64_t response_time_slots = 0;
    std::uint64_t sync_time_slots = 0;
    std::uint64_t max_dispatch_slots = 0;
    std::string band;
    std::int64_t cost_rate = 0;  // milli-currency per kWh delivered
};

struct ProsumerConfig {
    std::uint64_t id = 0;
    Seed account_seed{};
    std::vector<std::int64_t> consumption_wh;  // per trace slot
    std::vector<std::int64_t> generation_wh;
    std::int64_t bid_price = 0;  // milli-currency per kWh
    std::int64_t ask_price = 0;
    std::uint32_t dr_compliance_milli = 1000;  // 0..1000
    std::int64_t flex_capacity_wh = 0;         // per-slot offerable reduction
    std::int64_t flex_cost_rate = 0;           // asking price per kWh of flexibility
    AssetParams asset;

    std::int64_t trace_net_wh(std::uint64_t trace_slot) const {
        return consumption_wh[trace_slot] - generation_wh[trace_slot];
    }
};

// Which ticks mean what. Slot numbers and tick numbers share one axis: the
// energy of slot s is metered at tick s+1. Slots below first_slot form the
// setup runway where contracts deploy; first_slot stays a multiple of
// slots_per_day so slot-of-day indexing is unaffected by the runway.
struct SimSchedule {
    std::uint64_t first_slot = 0;
    std::uint64_t end_slot = 0;  // exclusive
    std::uint64_t order_lead_slots = 4;
    bool trade = true;
    bool dr = true;
    bool vpp = true;

    std::uint64_t trace_slot(std::uint64_t slot) const { return slot - first_slot; }
    bool in_range(std::uint64_t slot) const { return slot >= first_slot && slot < end_slot; }
};

struct ProsumerState {
    KeyPair keys;
    Address address;
    std::uint64_t next_nonce = 0;
    bool meter_deploy_sent = false;
    bool asset_registration_sent = false;
    std::uint64_t next_meter_slot = 0;

    // Chain-derived mirror, refreshed every step; reporting cross-checks it
    // against independently computed settlement totals.
    std::int64_t mirror_trade_net = 0;
    std::int64_t mirror_dr_net = 0;
    std::int64_t mirror_vpp_net = 0;
    std::vector<std::uint64_t> open_order_ids;
};

inline ProsumerState init_prosumer_state(const ProsumerConfig& config,
                                         const SimSchedule& schedule) {
    ProsumerState state;
    auto [keys, address] = create_account(config.account_seed);
    state.keys = std::move(keys);
    state.address = address;
    state.next_meter_slot = schedule.first_slot;
    return state;
}

namespace prosumer_detail {

inline std::int64_t compliance_part(std::int64_t amount_wh, std::uint32_t compliance_milli) {
    return floor_div(amount_wh * static_cast<std::int64_t>(compliance_milli), 1000);
}

// Net load change this prosumer applies at `slot`, positive = consume less.
// Demand-response orders on its own contract and dispatches naming its
// assets both contribute, scaled by the compliance setting.
inline std::int64_t obligation_adjustment_wh(const WorldState& tip, const Address& self,
                                             std::uint64_t slot,
                                             std::uint32_t compliance_milli) {
    std::int64_t adjust = 0;
    for (const auto& [addr, contract] : tip.contracts) {
        if (const auto* dr = std::get_if<DRContractState>(&contract)) {
            if (dr->prosumer != self) continue;
            for (const auto& order : dr->orders) {
                if (slot < order.window_start || slot >= order.window_end) continue;
                const std::int64_t part = compliance_part(order.amount_wh, compliance_milli);
                adjust += order.direction == FlexDirection::Reduce ? part : -part;
            }
        } else if (const auto* vpp = std::get_if<VPPContractState>(&contract)) {
            for (const auto& dispatch : vpp->dispatches) {
                if (slot < dispatch.window_start || slot >= dispatch.window_end) continue;
                for (const auto& member : dispatch.members) {
                    const AssetRecord* asset = vpp->find_asset(member.asset_id);
                    if (asset == nullptr || asset->owner != self) continue;
                    adjust += compliance_part(member.scheduled_wh_per_slot, compliance_milli);
                }
            }
        }
    }
    return adjust;
}

inline void refresh_mirror(ProsumerState& state, const WorldState& tip) {
    state.mirror_trade_net = 0;
    state.mirror_dr_net = 0;
    state.mirror_vpp_net = 0;
    state.open_order_ids.clear();
    for (const auto& [addr, contract] : tip.contracts) {
        if (const auto* market = std::get_if<MarketContractState>(&contract)) {
            for (const auto& trade : market->trades) {
                if (trade.seller == state.address) state.mirror_trade_net += trade.payment();
                if (trade.buyer == state.address) state.mirror_trade_net -= trade.payment();
            }
            for (const auto& order : market->open_orders)
                if (order.owner == state.address) state.open_order_ids.push_back(order.id);
        } else if (const auto* dr = std::get_if<DRContractState>(&contract)) {
            if (dr->prosumer != state.address) continue;
            for (const auto& settlement : dr->settlements)
                state.mirror_dr_net += settlement.net();
        } else if (const auto* vpp = std::get_if<VPPContractState>(&contract)) {
            for (const auto& record : vpp->settlements) {
                for (const auto& row : record.members) {
                    const AssetRecord* asset = vpp->find_asset(row.asset_id);
                    if (asset && asset->owner == state.address) state.mirror_vpp_net += row.net();
                }
            }
        }
    }
}

}  // namespace prosumer_detail

// Recomputes the earnings mirror from a committed state. The step does this
// on its own; callers use it to bring mirrors up to the final tip.
inline void refresh_prosumer_mirror(ProsumerState& state, const WorldState& tip) {
    prosumer_detail::refresh_mirror(state, tip);
}

// One prosumer tick: catch up on metering (one reading per elapsed slot,
// obligation-adjusted), place the order for the slot order_lead away, and
// handle one-time setup. Every decision reads the chain view only, so the
// step is a pure function of (config, state, tick, view).
inline std::vector<Transaction> prosumer_step(const ProsumerConfig& config, ProsumerState& state,
                                              std::uint64_t tick, const Chain& view,
                                              const SimSchedule& schedule) {
    std::vector<Transaction> out;
    auto emit = [&](const Address& to, TxKind kind, Bytes payload) {
        Transaction tx;
        tx.receiver = to;
        tx.nonce = state.next_nonce++;
        tx.kind = kind;
        tx.payload = std::move(payload);
        sign_transaction(tx, state.keys);
        out.push_back(std::move(tx));
    };
    const WorldState& tip = view.tip_state();

    if (!state.meter_deploy_sent) {
        MeterInit init;
        init.metadata = {"smart-meter", "net-energy", "Wh", state.address};
        emit(Address{}, TxKind::Deploy, encode_deploy(ContractKind::Meter, init));
        state.meter_deploy_sent = true;
    }

    if (schedule.vpp && config.asset.capacity_wh_per_slot > 0 && !state.asset_registration_sent) {
        if (auto vpp = first_contract_of<VPPContractState>(tip)) {
            AssetRecord asset;
            asset.owner = state.address;
            asset.capacity_wh_per_slot = config.asset.capacity_wh_per_slot;
            asset.response_time_slots = config.asset.response_time_slots;
            asset.sync_time_slots = config.asset.sync_time_slots;
            asset.max_dispatch_slots = config.asset.max_dispatch_slots;
            asset.band = config.asset.band;
            asset.cost_rate = config.asset.cost_rate;
            emit(*vpp, TxKind::VPPRegisterAsset, VPPRegisterAssetPayload{asset}.encode());
            state.asset_registration_sent = true;
        }
    }

    if (auto meter = meter_owned_by(tip, state.address)) {
        while (state.next_meter_slot < tick && state.next_meter_slot < schedule.end_slot) {
            const std::uint64_t slot = state.next_meter_slot;
            std::int64_t net = config.trace_net_wh(schedule.trace_slot(slot));
            net -= prosumer_detail::obligation_adjustment_wh(tip, state.address, slot,
                                                             config.dr_compliance_milli);
            MeterUpdatePayload payload;
            payload.reading = {slot, net, *meter};
            emit(*meter, TxKind::MeterUpdate, payload.encode());
            ++state.next_meter_slot;
        }
    }

    if (schedule.trade) {
        const std::uint64_t slot = tick + schedule.order_lead_slots;
        if (schedule.in_range(slot)) {
            if (auto market = first_contract_of<MarketContractState>(tip)) {
                const std::int64_t net = config.trace_net_wh(schedule.trace_slot(slot));
                if (net != 0) {
                    Order order;
                    order.owner = state.address;
                    order.slot = slot;
                    if (net > 0) {
                        order.side = OrderSide::Bid;
                        order.qty_wh = net;
                        order.limit_price = config.bid_price;
                    } else {
                        order.side = OrderSide::Offer;
                        order.qty_wh = -net;
                        order.limit_price = config.ask_price;
                    }
                    emit(*market, TxKind::MarketSubmitOrder,
                         MarketSubmitOrderPayload{order}.encode());
                }
            }
        }
    }

    prosumer_detail::refresh_mirror(state, tip);
    return out;
}

}  // namespace gridchain
