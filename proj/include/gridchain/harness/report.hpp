#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridchain/harness/run.hpp"
#include "gridchain/ledger/queries.hpp"

namespace gridchain {

struct ProsumerReport {
    std::uint64_t id = 0;
    std::string address_hex;
    std::uint64_t metered_slots = 0;
    std::int64_t metered_net_wh = 0;  // consumption minus generation, post-obligation
    std::int64_t trade_net_milli = 0;
    std::int64_t dr_net_milli = 0;
    std::int64_t vpp_net_milli = 0;
    bool mirror_matches = false;

    std::int64_t total_milli() const { return trade_net_milli + dr_net_milli + vpp_net_milli; }
};

// Both sides of every money flow, summed independently so a report reader
// can see the books balance without trusting the code that moved the money.
struct ConservationReport {
    std::int64_t buyer_payments_milli = 0;
    std::int64_t seller_receipts_milli = 0;
    std::int64_t dr_aggregator_outflow_milli = 0;
    std::int64_t dr_prosumer_net_milli = 0;
    std::int64_t vpp_operator_outflow_milli = 0;
    std::int64_t vpp_member_net_milli = 0;

    bool balanced() const {
        return buyer_payments_milli == seller_receipts_milli &&
               dr_aggregator_outflow_milli == dr_prosumer_net_milli &&
               vpp_operator_outflow_milli == vpp_member_net_milli;
    }
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::uint64_t height = 0;
    std::uint64_t ticks = 0;
    bool converged = false;
    std::uint64_t dropped_messages = 0;
    std::uint64_t total_txs = 0;
    std::uint64_t failed_txs = 0;
    std::map<std::string, std::uint64_t> tx_counts;

    std::uint64_t trades = 0;
    std::int64_t traded_wh = 0;
    std::uint64_t cleared_slots = 0;
    std::uint64_t dr_orders = 0;
    std::uint64_t dr_settlements = 0;
    std::uint64_t dispatches = 0;
    std::uint64_t vpp_settlements = 0;

    ConservationReport conservation;
    std::vector<ProsumerReport> prosumers;
    std::vector<ActorNote> notes;

    bool mirrors_match() const {
        for (const auto& p : prosumers)
            if (!p.mirror_matches) return false;
        return true;
    }
};

inline RunReport build_report(const SimConfig& cfg, std::uint64_t seed, const RunOutput& out) {
    RunReport rep;
    rep.scenario = scenario_name(cfg.scenario);
    rep.seed = seed;
    rep.height = out.chain.height();
    rep.ticks = out.ticks;
    rep.converged = out.converged;
    rep.dropped_messages = out.dropped_messages;
    rep.notes = out.notes;

    for (const auto& block : out.chain.blocks) {
        rep.total_txs += block.transactions.size();
        for (const auto& tx : block.transactions) ++rep.tx_counts[tx_kind_name(tx.kind)];
    }
    const ReplayResult replay = replay_chain(out.chain.blocks, nullptr);
    for (const auto& receipts : replay.receipts_per_block)
        for (const auto& r : receipts) rep.failed_txs += r.ok ? 0 : 1;

    const WorldState& tip = out.chain.tip_state();
    std::map<Address, std::int64_t> trade_net, dr_net, vpp_net;
    for (const auto& [addr, contract] : tip.contracts) {
        if (const auto* m = std::get_if<MarketContractState>(&contract)) {
            rep.cleared_slots += m->clearings.size();
            rep.trades += m->trades.size();
            for (const auto& t : m->trades) {
                rep.traded_wh += t.qty_wh;
                rep.conservation.buyer_payments_milli += t.payment();
                rep.conservation.seller_receipts_milli += t.payment();
                trade_net[t.buyer] -= t.payment();
                trade_net[t.seller] += t.payment();
            }
        } else if (const auto* d = std::get_if<DRContractState>(&contract)) {
            rep.dr_orders += d->orders.size();
            rep.dr_settlements += d->settlements.size();
            for (const auto& s : d->settlements) {
                rep.conservation.dr_aggregator_outflow_milli += s.net();
                dr_net[d->prosumer] += s.net();
            }
        } else if (const auto* v = std::get_if<VPPContractState>(&contract)) {
            rep.dispatches += v->dispatches.size();
            rep.vpp_settlements += v->settlements.size();
            for (const auto& s : v->settlements) {
                for (const auto& member : s.members) {
                    rep.conservation.vpp_operator_outflow_milli += member.net();
                    if (const AssetRecord* asset = v->find_asset(member.asset_id))
                        vpp_net[asset->owner] += member.net();
                }
            }
        }
    }
    for (const auto& [addr, v] : dr_net) rep.conservation.dr_prosumer_net_milli += v;
    for (const auto& [addr, v] : vpp_net) rep.conservation.vpp_member_net_milli += v;

    for (std::size_t i = 0; i < out.prosumer_states.size(); ++i) {
        const ProsumerState& st = out.prosumer_states[i];
        const Address& addr = out.prosumer_addresses[i];
        ProsumerReport p;
        p.id = cfg.prosumers[i].id;
        p.address_hex = to_hex(addr.value);
        if (const auto meter = meter_owned_by(tip, addr)) {
            const auto history = meter_history(out.chain.blocks, *meter, out.chain.height());
            p.metered_slots = history.size();
            for (const auto& [slot, wh] : history) p.metered_net_wh += wh;
        }
        auto value_or_zero = [](const std::map<Address, std::int64_t>& m, const Address& a) {
            const auto it = m.find(a);
            return it == m.end() ? 0 : it->second;
        };
        p.trade_net_milli = value_or_zero(trade_net, addr);
        p.dr_net_milli = value_or_zero(dr_net, addr);
        p.vpp_net_milli = value_or_zero(vpp_net, addr);
        p.mirror_matches = st.mirror_trade_net == p.trade_net_milli &&
                           st.mirror_dr_net == p.dr_net_milli &&
                           st.mirror_vpp_net == p.vpp_net_milli;
        rep.prosumers.push_back(std::move(p));
    }
    return rep;
}

// nlohmann's default object keeps keys sorted, so the dump is byte-stable
// for identical reports.
inline nlohmann::json report_to_json(const RunReport& rep) {
    nlohmann::json j;
    j["scenario"] = rep.scenario;
    j["seed"] = rep.seed;
    j["chain"] = {{"height", rep.height},
                  {"ticks", rep.ticks},
                  {"converged", rep.converged},
                  {"dropped_messages", rep.dropped_messages},
                  {"total_txs", rep.total_txs},
                  {"failed_txs", rep.failed_txs},
                  {"tx_counts", rep.tx_counts}};
    j["activity"] = {{"trades", rep.trades},
                     {"traded_wh", rep.traded_wh},
                     {"cleared_slots", rep.cleared_slots},
                     {"dr_orders", rep.dr_orders},
                     {"dr_settlements", rep.dr_settlements},
                     {"dispatches", rep.dispatches},
                     {"vpp_settlements", rep.vpp_settlements}};
    j["conservation"] = {
        {"buyer_payments_milli", rep.conservation.buyer_payments_milli},
        {"seller_receipts_milli", rep.conservation.seller_receipts_milli},
        {"dr_aggregator_outflow_milli", rep.conservation.dr_aggregator_outflow_milli},
        {"dr_prosumer_net_milli", rep.conservation.dr_prosumer_net_milli},
        {"vpp_operator_outflow_milli", rep.conservation.vpp_operator_outflow_milli},
        {"vpp_member_net_milli", rep.conservation.vpp_member_net_milli},
        {"balanced", rep.conservation.balanced()}};
    j["prosumers"] = nlohmann::json::array();
    for (const auto& p : rep.prosumers)
        j["prosumers"].push_back({{"id", p.id},
                                  {"address", p.address_hex},
                                  {"metered_slots", p.metered_slots},
                                  {"metered_net_wh", p.metered_net_wh},
                                  {"trade_net_milli", p.trade_net_milli},
                                  {"dr_net_milli", p.dr_net_milli},
                                  {"vpp_net_milli", p.vpp_net_milli},
                                  {"total_milli", p.total_milli()},
                                  {"mirror_matches", p.mirror_matches}});
    j["mirrors_match"] = rep.mirrors_match();
    j["notes"] = nlohmann::json::array();
    for (const auto& n : rep.notes) j["notes"].push_back({{"tick", n.tick}, {"text", n.text}});
    return j;
}

inline std::string earnings_csv(const RunReport& rep) {
    std::string csv =
        "prosumer_id,address,trade_net_milli,dr_net_milli,vpp_net_milli,total_milli\n";
    for (const auto& p : rep.prosumers) {
        csv += std::to_string(p.id) + ',' + p.address_hex + ',' +
               std::to_string(p.trade_net_milli) + ',' + std::to_string(p.dr_net_milli) + ',' +
               std::to_string(p.vpp_net_milli) + ',' + std::to_string(p.total_milli()) + '\n';
    }
    return csv;
}

}  // namespace gridchain
