#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridchain/contracts/vm.hpp"
#include "gridchain/ledger/chain.hpp"
#include "gridchain/ledger/queries.hpp"
#include "gridchain/oracle/service.hpp"

namespace gridchain {

struct AuditDiscrepancy {
    std::uint64_t height = 0;  // block whose record failed the recomputation
    std::string kind;          // clearing | dr_settlement | vpp_dispatch | vpp_settlement | oracle_response
    std::string contract;      // hex address of the contract or responder involved
    std::uint64_t id = 0;      // slot, order id, dispatch id, or request id
    std::string field;
    std::string expected;
    std::string actual;
};

// Economic audit of a ledger: every clearing, selection, dispatch, and
// settlement on the chain is recomputed from the same pinned data its
// producer claimed to use, and money flows are summed from both sides.
// Authority and signature checks live in verification, not here.
struct AuditReport {
    bool ok = false;
    std::string error;  // structural replay failure; audit cannot proceed
    std::uint64_t height = 0;

    std::uint64_t audited_clearings = 0;
    std::uint64_t audited_oracle_responses = 0;
    std::uint64_t audited_dr_settlements = 0;
    std::uint64_t audited_dispatches = 0;
    std::uint64_t audited_vpp_settlements = 0;

    std::int64_t buyer_payments_milli = 0;
    std::int64_t seller_receipts_milli = 0;
    std::int64_t dr_aggregator_outflow_milli = 0;
    std::int64_t dr_prosumer_net_milli = 0;
    std::int64_t vpp_operator_outflow_milli = 0;
    std::int64_t vpp_member_net_milli = 0;

    std::vector<AuditDiscrepancy> discrepancies;

    bool conserved() const {
        return buyer_payments_milli == seller_receipts_milli &&
               dr_aggregator_outflow_milli == dr_prosumer_net_milli &&
               vpp_operator_outflow_milli == vpp_member_net_milli;
    }
};

namespace audit_detail {

struct RequestAt {
    std::uint64_t height = 0;
    std::optional<OracleRequestPayload> payload;  // nullopt: committed but unreadable
};

// First committed request under the (requester, request_id) key, mirroring
// the oracle's own dedup rule so the audit rebuilds from the same request
// the oracle answered. Unreadable headers fall under id 0, as the oracle
// treats them.
inline std::optional<RequestAt> find_request(const std::vector<Block>& blocks,
                                             const Address& oracle, const Address& requester,
                                             std::uint64_t request_id,
                                             std::uint64_t before_height) {
    for (const auto& block : blocks) {
        if (block.height >= before_height) break;
        for (const auto& tx : block.transactions) {
            if (tx.kind != TxKind::OracleRequest || tx.receiver != oracle ||
                tx.sender != requester)
                continue;
            ByteReader r(tx.payload);
            std::uint8_t service = 0;
            std::uint64_t rid = 0;
            if (!r.u8(service) || !r.u64(rid)) rid = 0;
            if (rid != request_id) continue;
            RequestAt found;
            found.height = block.height;
            if (auto p = OracleRequestPayload::decode(tx.payload)) found.payload = std::move(*p);
            return found;
        }
    }
    return std::nullopt;
}

inline std::string describe_result(const ClearingResult& r) {
    return "price " + std::to_string(r.clearing_price) + ", volume " +
           std::to_string(r.total_qty_wh) + " Wh, " + std::to_string(r.matches.size()) +
           " matches";
}

class Auditor {
  public:
    explicit Auditor(const std::vector<Block>& blocks) : blocks_(blocks) {}

    AuditReport run() {
        if (!replay()) return rep_;
        for (std::size_t h = 1; h < blocks_.size(); ++h) {
            const Block& block = blocks_[h];
            for (std::size_t k = 0; k < block.transactions.size(); ++k) {
                if (!receipts_[h][k].ok) continue;
                const Transaction& tx = block.transactions[k];
                switch (tx.kind) {
                    case TxKind::MarketRecordClearing: audit_clearing(h, tx); break;
                    case TxKind::OracleResponse: audit_response(h, tx); break;
                    case TxKind::DRSettle: audit_dr_settlement(h, tx); break;
                    case TxKind::VPPRecordDispatch: audit_dispatch(h, tx); break;
                    case TxKind::VPPSettle: audit_vpp_settlement(h, tx); break;
                    default: break;
                }
            }
        }
        sum_flows();
        rep_.ok = rep_.error.empty() && rep_.discrepancies.empty() && rep_.conserved();
        return rep_;
    }

  private:
    bool replay() {
        if (blocks_.empty()) {
            rep_.error = "empty ledger";
            return false;
        }
        if (blocks_.front() != genesis_block()) {
            rep_.error = "ledger does not start at the genesis block";
            return false;
        }
        states_.emplace_back();
        receipts_.emplace_back();
        WorldState state;
        for (std::size_t i = 1; i < blocks_.size(); ++i) {
            std::vector<Receipt> receipts;
            if (auto err = check_block_structure(blocks_[i - 1], blocks_[i])) {
                rep_.error = *err + " at height " + std::to_string(i);
                return false;
            }
            if (auto err = execute_block(blocks_[i], state, &receipts)) {
                rep_.error = *err + " at height " + std::to_string(i);
                return false;
            }
            states_.push_back(state);
            receipts_.push_back(std::move(receipts));
        }
        rep_.height = blocks_.size() - 1;
        return true;
    }

    void flag(std::uint64_t height, std::string kind, const Address& contract, std::uint64_t id,
              std::string field, std::string expected, std::string actual) {
        rep_.discrepancies.push_back({height, std::move(kind), to_hex(contract.value), id,
                                      std::move(field), std::move(expected), std::move(actual)});
    }

    // A committed clearing must equal the auction recomputed over the order
    // book exactly as it stood when the clearing request committed.
    void audit_clearing(std::uint64_t h, const Transaction& tx) {
        const auto payload = MarketRecordClearingPayload::decode(tx.payload);
        if (!payload) return;
        ++rep_.audited_clearings;
        const std::uint64_t slot = payload->result.slot;
        const auto& market = std::get<MarketContractState>(states_[h].contracts.at(tx.receiver));

        const auto req = find_request(blocks_, market.oracle, payload->requester,
                                      payload->request_id, h);
        if (!req) {
            flag(h, "clearing", tx.receiver, slot, "request",
                 "a committed clearing request with id " + std::to_string(payload->request_id),
                 "none found");
            return;
        }
        ClearingParams params;
        if (req->payload && req->payload->service == OracleServiceKind::Clearing) {
            ByteReader r(req->payload->params);
            if (!ClearingParams::decode(r, params) || !r.done()) {
                flag(h, "clearing", tx.receiver, slot, "request", "well-formed clearing params",
                     "malformed parameters");
                return;
            }
        } else {
            flag(h, "clearing", tx.receiver, slot, "request", "a clearing request",
                 "a different or unreadable service");
            return;
        }
        if (params.market != tx.receiver || params.slot != slot) {
            flag(h, "clearing", tx.receiver, slot, "request",
                 "market " + to_hex(tx.receiver.value) + " slot " + std::to_string(slot),
                 "market " + to_hex(params.market.value) + " slot " +
                     std::to_string(params.slot));
            return;
        }

        const auto pinned_it = states_[req->height].contracts.find(tx.receiver);
        if (pinned_it == states_[req->height].contracts.end() ||
            !std::holds_alternative<MarketContractState>(pinned_it->second)) {
            flag(h, "clearing", tx.receiver, slot, "request",
                 "a market deployed before the request", "no market at height " +
                                                             std::to_string(req->height));
            return;
        }
        const auto& pinned = std::get<MarketContractState>(pinned_it->second);
        std::vector<Order> bids, offers;
        for (const auto& order : pinned.open_orders) {
            if (order.slot != slot) continue;
            (order.side == OrderSide::Bid ? bids : offers).push_back(order);
        }
        const ClearingResult expect = clear_market(bids, offers, slot);
        if (!(expect == payload->result))
            flag(h, "clearing", tx.receiver, slot, "result", describe_result(expect),
                 describe_result(payload->result));
    }

    // Every successful oracle answer must be reproducible from the chain as
    // of the request's commit height. Clearing answers are audited through
    // their market records instead; error answers settle nothing and are
    // skipped.
    void audit_response(std::uint64_t h, const Transaction& tx) {
        const auto payload = OracleResponsePayload::decode(tx.payload);
        if (!payload || !payload->ok) return;
        const auto req = find_request(blocks_, tx.sender, payload->requester,
                                      payload->request_id, h);
        if (!req || !req->payload) {
            ++rep_.audited_oracle_responses;
            flag(h, "oracle_response", tx.sender, payload->request_id, "request",
                 "a committed readable request", req ? "unreadable request" : "none found");
            return;
        }
        ByteReader r(req->payload->params);
        Bytes expect;
        switch (req->payload->service) {
            case OracleServiceKind::Forecast: {
                ForecastParams params;
                if (!ForecastParams::decode(r, params) || !r.done()) return;
                const auto history = meter_history(blocks_, params.series, req->height);
                const ForecastResult result = forecast(history, params.horizon, params.from_slot);
                if (!result.ok) return;
                expect = ForecastAnswer{params.from_slot, result.values}.encode();
                break;
            }
            case OracleServiceKind::Flexibility: {
                FlexParams params;
                if (!FlexParams::decode(r, params) || !r.done()) return;
                ByteWriter w;
                select_flexibility(params.candidates, params.target_wh).encode(w);
                expect = std::move(w).take();
                break;
            }
            case OracleServiceKind::Coalition: {
                CoalitionParams params;
                if (!CoalitionParams::decode(r, params) || !r.done()) return;
                const auto it = states_[req->height].contracts.find(params.vpp);
                if (it == states_[req->height].contracts.end() ||
                    !std::holds_alternative<VPPContractState>(it->second))
                    return;
                ByteWriter w;
                form_coalition(std::get<VPPContractState>(it->second).assets, params.service)
                    .encode(w);
                expect = std::move(w).take();
                break;
            }
            case OracleServiceKind::Clearing: return;
        }
        ++rep_.audited_oracle_responses;
        if (expect != payload->body)
            flag(h, "oracle_response", tx.sender, payload->request_id, "body",
                 std::to_string(expect.size()) + " bytes recomputed from the pinned state",
                 std::to_string(payload->body.size()) + " bytes recorded");
    }

    // Settlement readings must be the prosumer's committed meter series, and
    // the payout arithmetic must match the shared settlement function.
    void audit_dr_settlement(std::uint64_t h, const Transaction& tx) {
        const auto payload = DRSettlePayload::decode(tx.payload);
        if (!payload) return;
        ++rep_.audited_dr_settlements;
        const auto& dr = std::get<DRContractState>(states_[h].contracts.at(tx.receiver));
        const FlexibilityOrder* order = dr.find_order(payload->order_id);
        if (order == nullptr) return;

        const auto meter = meter_owned_by(states_[h], dr.prosumer);
        if (!meter) {
            flag(h, "dr_settlement", tx.receiver, payload->order_id, "meter",
                 "one meter owned by the prosumer", "none or ambiguous");
            return;
        }
        const auto history = meter_history(blocks_, *meter, h);
        for (const auto& reading : payload->metered) {
            if (reading.device != *meter) {
                flag(h, "dr_settlement", tx.receiver, payload->order_id,
                     "reading device at slot " + std::to_string(reading.slot),
                     to_hex(meter->value), to_hex(reading.device.value));
                continue;
            }
            const auto it = history.find(reading.slot);
            if (it == history.end()) {
                flag(h, "dr_settlement", tx.receiver, payload->order_id,
                     "reading at slot " + std::to_string(reading.slot),
                     "a committed meter reading", "no such reading on chain");
            } else if (it->second != reading.energy_wh) {
                flag(h, "dr_settlement", tx.receiver, payload->order_id,
                     "reading at slot " + std::to_string(reading.slot),
                     std::to_string(it->second) + " Wh", std::to_string(reading.energy_wh) + " Wh");
            }
        }

        const std::uint64_t window_len = order->window_end - order->window_start;
        std::vector<std::int64_t> metered_by_slot(window_len, 0);
        for (const auto& reading : payload->metered)
            if (reading.slot >= order->window_start && reading.slot < order->window_end)
                metered_by_slot[reading.slot - order->window_start] = reading.energy_wh;
        const Settlement expect = vm_detail::settle_order(*order, dr.baseline, metered_by_slot);

        const Settlement* stored = nullptr;
        for (const auto& s : dr.settlements)
            if (s.order_id == payload->order_id) stored = &s;
        if (stored == nullptr) return;
        auto check = [&](const char* field, std::int64_t want, std::int64_t got) {
            if (want != got)
                flag(h, "dr_settlement", tx.receiver, payload->order_id, field,
                     std::to_string(want), std::to_string(got));
        };
        check("delivered_wh", expect.delivered_wh, stored->delivered_wh);
        check("shortfall_wh", expect.shortfall_wh, stored->shortfall_wh);
        check("reward", expect.reward, stored->reward);
        check("penalty", expect.penalty, stored->penalty);
    }

    // A recorded dispatch must carry exactly the coalition the oracle formed
    // from the assets registered when the coalition request committed, under
    // the requested service terms.
    void audit_dispatch(std::uint64_t h, const Transaction& tx) {
        const auto payload = VPPRecordDispatchPayload::decode(tx.payload);
        if (!payload) return;
        ++rep_.audited_dispatches;
        const auto& vpp = std::get<VPPContractState>(states_[h].contracts.at(tx.receiver));
        const std::size_t row = dispatch_rows_[tx.receiver]++;
        if (row >= vpp.dispatches.size()) return;
        const DispatchRecord& stored = vpp.dispatches[row];

        const auto req = find_request(blocks_, vpp.oracle, payload->requester,
                                      payload->request_id, h);
        if (!req || !req->payload || req->payload->service != OracleServiceKind::Coalition) {
            flag(h, "vpp_dispatch", tx.receiver, stored.id, "request",
                 "a committed coalition request with id " + std::to_string(payload->request_id),
                 !req ? "none found" : "unreadable or different service");
            return;
        }
        CoalitionParams params;
        ByteReader r(req->payload->params);
        if (!CoalitionParams::decode(r, params) || !r.done() || params.vpp != tx.receiver) {
            flag(h, "vpp_dispatch", tx.receiver, stored.id, "request",
                 "coalition params naming this contract", "malformed or different contract");
            return;
        }
        const auto pinned_it = states_[req->height].contracts.find(tx.receiver);
        if (pinned_it == states_[req->height].contracts.end() ||
            !std::holds_alternative<VPPContractState>(pinned_it->second))
            return;
        const CoalitionPlan plan =
            form_coalition(std::get<VPPContractState>(pinned_it->second).assets, params.service);

        if (!plan.feasible) {
            flag(h, "vpp_dispatch", tx.receiver, stored.id, "feasibility",
                 "no dispatch (coalition infeasible)", "a recorded dispatch");
            return;
        }
        if (stored.members != plan.members) {
            auto total = [](const std::vector<DispatchMember>& ms) {
                std::int64_t t = 0;
                for (const auto& m : ms) t += m.scheduled_wh_per_slot;
                return std::to_string(ms.size()) + " members, " + std::to_string(t) +
                       " Wh per slot";
            };
            flag(h, "vpp_dispatch", tx.receiver, stored.id, "members", total(plan.members),
                 total(stored.members));
        }
        auto check = [&](const char* field, std::int64_t want, std::int64_t got) {
            if (want != got)
                flag(h, "vpp_dispatch", tx.receiver, stored.id, field, std::to_string(want),
                     std::to_string(got));
        };
        check("window_slots", static_cast<std::int64_t>(params.service.dispatch_slots),
              static_cast<std::int64_t>(stored.window_end - stored.window_start));
        check("max_response_slots", static_cast<std::int64_t>(params.service.max_response_slots),
              static_cast<std::int64_t>(stored.max_response_slots));
        check("penalty_rate", params.service.penalty_rate, stored.penalty_rate);
        if (params.service.band != stored.band)
            flag(h, "vpp_dispatch", tx.receiver, stored.id, "band", params.service.band,
                 stored.band);
    }

    // Claimed deliveries must match the meter evidence on chain, and each
    // member row must match the shared payout arithmetic.
    void audit_vpp_settlement(std::uint64_t h, const Transaction& tx) {
        const auto payload = VPPSettlePayload::decode(tx.payload);
        if (!payload) return;
        ++rep_.audited_vpp_settlements;
        const auto& vpp = std::get<VPPContractState>(states_[h].contracts.at(tx.receiver));
        const DispatchRecord* dispatch = vpp.find_dispatch(payload->dispatch_id);
        if (dispatch == nullptr) return;
        const VppSettlementRecord* stored = nullptr;
        for (const auto& s : vpp.settlements)
            if (s.dispatch_id == payload->dispatch_id) stored = &s;
        if (stored == nullptr) return;

        for (const auto& member : dispatch->members) {
            const AssetRecord* asset = vpp.find_asset(member.asset_id);
            if (asset == nullptr) continue;
            std::int64_t claimed = 0;
            for (const auto& entry : payload->delivered)
                if (entry.asset_id == member.asset_id) claimed = entry.delivered_wh;
            const std::int64_t independent = delivered_against_baseline(
                blocks_, states_[h], asset->owner, dispatch->window_start, dispatch->window_end,
                member.scheduled_wh_per_slot, h);
            if (claimed != independent) {
                flag(h, "vpp_settlement", tx.receiver, payload->dispatch_id,
                     "delivered_wh of asset " + std::to_string(member.asset_id),
                     std::to_string(independent) + " Wh from the meter record",
                     std::to_string(claimed) + " Wh claimed");
            }
            VppMemberSettlement expect =
                vm_detail::settle_member(*asset, member, dispatch->dispatch_slots(), claimed);
            expect.penalty = floor_div(dispatch->penalty_rate * expect.shortfall_wh, 1000);
            const VppMemberSettlement* row = nullptr;
            for (const auto& m : stored->members)
                if (m.asset_id == member.asset_id) row = &m;
            if (row == nullptr) continue;
            auto check = [&](const char* field, std::int64_t want, std::int64_t got) {
                if (want != got)
                    flag(h, "vpp_settlement", tx.receiver, payload->dispatch_id,
                         std::string(field) + " of asset " + std::to_string(member.asset_id),
                         std::to_string(want), std::to_string(got));
            };
            check("payout", expect.payout, row->payout);
            check("penalty", expect.penalty, row->penalty);
            check("shortfall_wh", expect.shortfall_wh, row->shortfall_wh);
        }
    }

    void sum_flows() {
        const WorldState& tip = states_.back();
        std::map<Address, std::int64_t> dr_by_prosumer, vpp_by_owner;
        for (const auto& [addr, contract] : tip.contracts) {
            if (const auto* m = std::get_if<MarketContractState>(&contract)) {
                for (const auto& t : m->trades) {
                    rep_.buyer_payments_milli += t.payment();
                    rep_.seller_receipts_milli += t.payment();
                }
            } else if (const auto* d = std::get_if<DRContractState>(&contract)) {
                for (const auto& s : d->settlements) {
                    rep_.dr_aggregator_outflow_milli += s.net();
                    dr_by_prosumer[d->prosumer] += s.net();
                }
            } else if (const auto* v = std::get_if<VPPContractState>(&contract)) {
                for (const auto& s : v->settlements) {
                    for (const auto& member : s.members) {
                        rep_.vpp_operator_outflow_milli += member.net();
                        if (const AssetRecord* asset = v->find_asset(member.asset_id))
                            vpp_by_owner[asset->owner] += member.net();
                    }
                }
            }
        }
        for (const auto& [addr, v] : dr_by_prosumer) rep_.dr_prosumer_net_milli += v;
        for (const auto& [addr, v] : vpp_by_owner) rep_.vpp_member_net_milli += v;
    }

    const std::vector<Block>& blocks_;
    std::vector<WorldState> states_;
    std::vector<std::vector<Receipt>> receipts_;
    std::map<Address, std::size_t> dispatch_rows_;
    AuditReport rep_;
};

}  // namespace audit_detail

inline AuditReport audit_ledger(const std::vector<Block>& blocks) {
    return audit_detail::Auditor(blocks).run();
}

inline nlohmann::json audit_report_to_json(const AuditReport& rep) {
    nlohmann::json j;
    j["ok"] = rep.ok;
    if (!rep.error.empty()) j["error"] = rep.error;
    j["height"] = rep.height;
    j["audited"] = {{"clearings", rep.audited_clearings},
                    {"oracle_responses", rep.audited_oracle_responses},
                    {"dr_settlements", rep.audited_dr_settlements},
                    {"dispatches", rep.audited_dispatches},
                    {"vpp_settlements", rep.audited_vpp_settlements}};
    j["conservation"] = {{"buyer_payments_milli", rep.buyer_payments_milli},
                         {"seller_receipts_milli", rep.seller_receipts_milli},
                         {"dr_aggregator_outflow_milli", rep.dr_aggregator_outflow_milli},
                         {"dr_prosumer_net_milli", rep.dr_prosumer_net_milli},
                         {"vpp_operator_outflow_milli", rep.vpp_operator_outflow_milli},
                         {"vpp_member_net_milli", rep.vpp_member_net_milli},
                         {"balanced", rep.conserved()}};
    j["discrepancies"] = nlohmann::json::array();
    for (const auto& d : rep.discrepancies)
        j["discrepancies"].push_back({{"height", d.height},
                                      {"kind", d.kind},
                                      {"contract", d.contract},
                                      {"id", d.id},
                                      {"field", d.field},
                                      {"expected", d.expected},
                                      {"actual", d.actual}});
    return j;
}

}  // namespace gridchain
