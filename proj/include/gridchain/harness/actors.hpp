#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gridchain/contracts/payloads.hpp"
#include "gridchain/harness/config.hpp"
#include "gridchain/ledger/chain.hpp"
#include "gridchain/ledger/queries.hpp"
#include "gridchain/oracle/service.hpp"
#include "gridchain/sim/prosumer.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

struct ActorNote {
    std::uint64_t tick = 0;
    std::string text;
};

// Everything a scripted actor needs besides its own keys: the run knobs,
// the tick layout, the oracle account, and the prosumer address roster
// (index-aligned with cfg->prosumers).
struct ActorEnv {
    const SimConfig* cfg = nullptr;
    SimSchedule sched;
    Address oracle;
    std::vector<Address> prosumers;
};

// Oracle responses addressed to `me`, newest run is small enough that a
// full scan per tick is cheap. The oracle never answers a request twice,
// so the first hit per id wins.
inline std::map<std::uint64_t, OracleResponsePayload> oracle_responses_to(
    const std::vector<Block>& blocks, const Address& oracle, const Address& me) {
    std::map<std::uint64_t, OracleResponsePayload> out;
    for (const auto& block : blocks) {
        for (const auto& tx : block.transactions) {
            if (tx.kind != TxKind::OracleResponse || tx.sender != oracle || tx.receiver != me)
                continue;
            if (auto p = OracleResponsePayload::decode(tx.payload); p && p->requester == me)
                out.emplace(p->request_id, std::move(*p));
        }
    }
    return out;
}

class ScriptedActor {
  public:
    explicit ScriptedActor(KeyPair keys)
        : keys_(std::move(keys)), address_(address_of(keys_.public_key)) {}

    const Address& address() const { return address_; }
    const PublicKey& public_key() const { return keys_.public_key; }
    const std::vector<ActorNote>& notes() const { return notes_; }

  protected:
    Transaction build(const Address& to, TxKind kind, Bytes payload) {
        Transaction tx;
        tx.receiver = to;
        tx.nonce = nonce_++;
        tx.kind = kind;
        tx.payload = std::move(payload);
        sign_transaction(tx, keys_);
        return tx;
    }

    void note(std::uint64_t tick, std::string text) { notes_.push_back({tick, std::move(text)}); }

    KeyPair keys_;
    Address address_;
    std::uint64_t nonce_ = 0;
    std::vector<ActorNote> notes_;
};

// Deploys the trading venue and asks the oracle to clear each slot at the
// same tick the prosumers place their orders for it, so one block carries
// the complete book the clearing will be checked against.
class MarketOperator : public ScriptedActor {
  public:
    using ScriptedActor::ScriptedActor;

    const Address& market_address() const { return market_addr_; }

    std::vector<Transaction> step(std::uint64_t tick, const Chain& view, const ActorEnv& env) {
        std::vector<Transaction> out;
        if (!deploy_sent_) {
            MarketInit init;
            init.oracle = env.oracle;
            market_addr_ = contract_address(address_, nonce_);
            out.push_back(build(Address{}, TxKind::Deploy, encode_deploy(ContractKind::Market, init)));
            deploy_sent_ = true;
        }
        if (!view.tip_state().contracts.contains(market_addr_)) return out;
        const std::uint64_t slot = tick + env.sched.order_lead_slots;
        if (env.sched.in_range(slot)) {
            ClearingParams params;
            params.market = market_addr_;
            params.slot = slot;
            out.push_back(build(env.oracle, TxKind::OracleRequest,
                                OracleRequestPayload::make(OracleServiceKind::Clearing, slot, params)
                                    .encode()));
        }
        return out;
    }

  private:
    bool deploy_sent_ = false;
    Address market_addr_;
};

// Deploys one demand-response contract per prosumer (day-0 trace net as the
// baseline), turns congestion events into flexibility selections via the
// oracle, issues the chosen orders, and settles each window from committed
// meter readings once they are all in.
class DrAggregator : public ScriptedActor {
  public:
    using ScriptedActor::ScriptedActor;

    std::vector<Transaction> step(std::uint64_t tick, const Chain& view, const ActorEnv& env) {
        std::vector<Transaction> out;
        const WorldState& tip = view.tip_state();
        const SimConfig& cfg = *env.cfg;

        if (!deploys_sent_) {
            for (std::size_t i = 0; i < cfg.prosumers.size(); ++i) {
                DRInit init;
                init.prosumer = env.prosumers[i];
                init.aggregator = address_;
                init.baseline.slot_wh.resize(cfg.slots_per_day);
                for (std::uint64_t s = 0; s < cfg.slots_per_day; ++s)
                    init.baseline.slot_wh[s] = cfg.prosumers[i].trace_net_wh(s);
                out.push_back(
                    build(Address{}, TxKind::Deploy, encode_deploy(ContractKind::DR, init)));
            }
            deploys_sent_ = true;
        }

        if (cfg.dr_enabled()) {
            request_flexibility(tick, tip, env, out);
            issue_selected_orders(tick, view, env, out);
        }
        settle_elapsed_windows(tick, view, env, out);
        return out;
    }

  private:
    void request_flexibility(std::uint64_t tick, const WorldState& tip, const ActorEnv& env,
                             std::vector<Transaction>& out) {
        const SimConfig& cfg = *env.cfg;
        for (std::size_t k = 0; k < cfg.congestion_events.size(); ++k) {
            const CongestionEvent& ev = cfg.congestion_events[k];
            if (ev.tick != tick) continue;
            FlexParams params;
            params.criteria = kCriteriaMinCost;
            params.target_wh = ev.required_flex_wh;
            for (std::size_t i = 0; i < cfg.prosumers.size(); ++i) {
                const ProsumerConfig& pc = cfg.prosumers[i];
                if (pc.flex_capacity_wh <= 0) continue;
                if (!dr_contract_for(tip, env.prosumers[i])) continue;
                FlexCandidate c;
                c.id = i;
                c.flex_wh = pc.flex_capacity_wh;
                c.cost = floor_div(pc.flex_cost_rate * pc.flex_capacity_wh, 1000);
                params.candidates.push_back(c);
            }
            if (params.candidates.empty()) {
                note(tick, "congestion event " + std::to_string(k) +
                               ": no flexibility candidates on chain yet");
                continue;
            }
            out.push_back(build(env.oracle, TxKind::OracleRequest,
                                OracleRequestPayload::make(OracleServiceKind::Flexibility, k, params)
                                    .encode()));
        }
    }

    void issue_selected_orders(std::uint64_t tick, const Chain& view, const ActorEnv& env,
                               std::vector<Transaction>& out) {
        const SimConfig& cfg = *env.cfg;
        const WorldState& tip = view.tip_state();
        const auto responses = oracle_responses_to(view.blocks, env.oracle, address_);
        for (const auto& [rid, resp] : responses) {
            if (rid >= cfg.congestion_events.size() || handled_events_.contains(rid)) continue;
            handled_events_.insert(rid);
            const CongestionEvent& ev = cfg.congestion_events[rid];
            if (!resp.ok) {
                note(tick, "congestion event " + std::to_string(rid) + ": oracle error: " +
                               std::string(resp.body.begin(), resp.body.end()));
                continue;
            }
            ByteReader r(resp.body);
            FlexSelection selection;
            if (!FlexSelection::decode(r, selection) || !r.done()) {
                note(tick, "congestion event " + std::to_string(rid) + ": unreadable selection");
                continue;
            }
            if (!selection.feasible) {
                note(tick, "congestion event " + std::to_string(rid) + ": target " +
                               std::to_string(ev.required_flex_wh) +
                               " Wh exceeds the flexibility on offer");
                continue;
            }
            const std::uint64_t start = ev.tick + cfg.dr.lead_slots;
            const std::uint64_t end = start + cfg.dr.window_slots;
            for (const std::uint64_t chosen : selection.chosen) {
                if (chosen >= env.prosumers.size()) continue;
                const auto dr = dr_contract_for(tip, env.prosumers[chosen]);
                if (!dr) {
                    note(tick, "prosumer " + std::to_string(cfg.prosumers[chosen].id) +
                                   " has no demand-response contract");
                    continue;
                }
                if (window_taken(tip, *dr, start, end)) {
                    note(tick, "congestion event " + std::to_string(rid) + ": prosumer " +
                                   std::to_string(cfg.prosumers[chosen].id) +
                                   " already committed over [" + std::to_string(start) + ", " +
                                   std::to_string(end) + ")");
                    continue;
                }
                FlexibilityOrder order;
                order.window_start = start;
                order.window_end = end;
                order.direction = FlexDirection::Reduce;
                order.amount_wh = cfg.prosumers[chosen].flex_capacity_wh;
                order.incentive_rate = cfg.prosumers[chosen].flex_cost_rate;
                order.penalty_rate = cfg.dr.penalty_rate;
                order.congestion_point = ev.congestion_point;
                out.push_back(
                    build(*dr, TxKind::DRIssueOrder, DRIssueOrderPayload{order}.encode()));
                in_flight_windows_[*dr].emplace_back(start, end);
            }
        }
    }

    bool window_taken(const WorldState& tip, const Address& dr_addr, std::uint64_t start,
                      std::uint64_t end) const {
        const auto& dr = std::get<DRContractState>(tip.contracts.at(dr_addr));
        for (const auto& order : dr.orders)
            if (order.overlaps(start, end)) return true;
        const auto it = in_flight_windows_.find(dr_addr);
        if (it != in_flight_windows_.end())
            for (const auto& [s, e] : it->second)
                if (s < end && start < e) return true;
        return false;
    }

    void settle_elapsed_windows(std::uint64_t tick, const Chain& view, const ActorEnv& env,
                                std::vector<Transaction>& out) {
        const WorldState& tip = view.tip_state();
        for (const auto& [addr, contract] : tip.contracts) {
            const auto* dr = std::get_if<DRContractState>(&contract);
            if (dr == nullptr || dr->aggregator != address_) continue;
            for (const auto& order : dr->orders) {
                if (tick < order.window_end + env.cfg->dr.settle_margin_slots) continue;
                if (settle_sent_.contains({addr, order.id}) || has_settlement(*dr, order.id))
                    continue;
                const auto meter = meter_owned_by(tip, dr->prosumer);
                if (!meter) continue;
                const auto history = meter_history(view.blocks, *meter, view.height());
                DRSettlePayload payload;
                payload.order_id = order.id;
                bool complete = true;
                for (std::uint64_t s = order.window_start; s < order.window_end; ++s) {
                    const auto it = history.find(s);
                    if (it == history.end()) {
                        complete = false;  // readings still in flight; retry next tick
                        break;
                    }
                    payload.metered.push_back({s, it->second, *meter});
                }
                if (!complete) continue;
                out.push_back(build(addr, TxKind::DRSettle, payload.encode()));
                settle_sent_.insert({addr, order.id});
            }
        }
    }

    static bool has_settlement(const DRContractState& dr, std::uint64_t order_id) {
        for (const auto& s : dr.settlements)
            if (s.order_id == order_id) return true;
        return false;
    }

    bool deploys_sent_ = false;
    std::set<std::uint64_t> handled_events_;
    std::map<Address, std::vector<std::pair<std::uint64_t, std::uint64_t>>> in_flight_windows_;
    std::set<std::pair<Address, std::uint64_t>> settle_sent_;
};

// Deploys the aggregation contract, turns service events into coalition
// plans via the oracle, records feasible dispatches, and settles each one
// against committed meter readings.
class VppOperator : public ScriptedActor {
  public:
    using ScriptedActor::ScriptedActor;

    const Address& vpp_address() const { return vpp_addr_; }

    std::vector<Transaction> step(std::uint64_t tick, const Chain& view, const ActorEnv& env) {
        std::vector<Transaction> out;
        const WorldState& tip = view.tip_state();
        const SimConfig& cfg = *env.cfg;

        if (!deploy_sent_) {
            VPPInit init;
            init.operator_addr = address_;
            init.oracle = env.oracle;
            vpp_addr_ = contract_address(address_, nonce_);
            out.push_back(build(Address{}, TxKind::Deploy, encode_deploy(ContractKind::VPP, init)));
            deploy_sent_ = true;
        }
        const auto it = tip.contracts.find(vpp_addr_);
        if (it == tip.contracts.end()) return out;
        const auto& vpp = std::get<VPPContractState>(it->second);

        for (std::size_t k = 0; k < cfg.vpp_services.size(); ++k) {
            const VppServiceEvent& ev = cfg.vpp_services[k];
            if (ev.tick != tick) continue;
            CoalitionParams params;
            params.criteria = kCriteriaMinCost;
            params.vpp = vpp_addr_;
            params.service = ev.spec;
            out.push_back(build(env.oracle, TxKind::OracleRequest,
                                OracleRequestPayload::make(OracleServiceKind::Coalition, k, params)
                                    .encode()));
        }

        const auto responses = oracle_responses_to(view.blocks, env.oracle, address_);
        for (const auto& [rid, resp] : responses) {
            if (rid >= cfg.vpp_services.size() || handled_services_.contains(rid)) continue;
            handled_services_.insert(rid);
            const VppServiceEvent& ev = cfg.vpp_services[rid];
            if (!resp.ok) {
                note(tick, "service " + std::to_string(rid) + ": oracle error: " +
                               std::string(resp.body.begin(), resp.body.end()));
                continue;
            }
            ByteReader r(resp.body);
            CoalitionPlan plan;
            if (!CoalitionPlan::decode(r, plan) || !r.done()) {
                note(tick, "service " + std::to_string(rid) + ": unreadable coalition plan");
                continue;
            }
            if (!plan.feasible) {
                note(tick, "service " + std::to_string(rid) + ": no asset coalition can carry " +
                               std::to_string(ev.spec.capacity_wh_per_slot) + " Wh per slot");
                continue;
            }
            VPPRecordDispatchPayload payload;
            payload.dispatch.service_id = rid;
            payload.dispatch.window_start = ev.tick + cfg.vpp.lead_slots;
            payload.dispatch.window_end = payload.dispatch.window_start + ev.spec.dispatch_slots;
            payload.dispatch.max_response_slots = ev.spec.max_response_slots;
            payload.dispatch.penalty_rate = ev.spec.penalty_rate;
            payload.dispatch.band = ev.spec.band;
            payload.dispatch.members = plan.members;
            payload.requester = address_;
            payload.request_id = rid;
            out.push_back(build(vpp_addr_, TxKind::VPPRecordDispatch, payload.encode()));
        }

        settle_elapsed_dispatches(tick, view, vpp, env, out);
        return out;
    }

  private:
    void settle_elapsed_dispatches(std::uint64_t tick, const Chain& view,
                                   const VPPContractState& vpp, const ActorEnv& env,
                                   std::vector<Transaction>& out) {
        const WorldState& tip = view.tip_state();
        for (const auto& dispatch : vpp.dispatches) {
            if (tick < dispatch.window_end + env.cfg->vpp.settle_margin_slots) continue;
            if (settle_sent_.contains(dispatch.id) || has_settlement(vpp, dispatch.id)) continue;

            // Wait until every member's window readings are committed;
            // readings are per-slot immutable, so the totals cannot change
            // after this point and the auditor's replay will agree.
            VPPSettlePayload payload;
            payload.dispatch_id = dispatch.id;
            bool complete = true;
            for (const auto& member : dispatch.members) {
                const AssetRecord* asset = vpp.find_asset(member.asset_id);
                if (asset == nullptr) {
                    complete = false;
                    break;
                }
                const auto meter = meter_owned_by(tip, asset->owner);
                if (!meter) {
                    complete = false;
                    break;
                }
                const auto history = meter_history(view.blocks, *meter, view.height());
                for (std::uint64_t s = dispatch.window_start; s < dispatch.window_end; ++s) {
                    if (!history.contains(s)) {
                        complete = false;
                        break;
                    }
                }
                if (!complete) break;
                DeliveredEntry entry;
                entry.asset_id = member.asset_id;
                entry.delivered_wh = delivered_against_baseline(
                    view.blocks, tip, asset->owner, dispatch.window_start, dispatch.window_end,
                    member.scheduled_wh_per_slot, view.height());
                payload.delivered.push_back(entry);
            }
            if (!complete) continue;
            out.push_back(build(vpp_addr_, TxKind::VPPSettle, payload.encode()));
            settle_sent_.insert(dispatch.id);
        }
    }

    static bool has_settlement(const VPPContractState& vpp, std::uint64_t dispatch_id) {
        for (const auto& s : vpp.settlements)
            if (s.dispatch_id == dispatch_id) return true;
        return false;
    }

    bool deploy_sent_ = false;
    Address vpp_addr_;
    std::set<std::uint64_t> handled_services_;
    std::set<std::uint64_t> settle_sent_;
};

}  // namespace gridchain
