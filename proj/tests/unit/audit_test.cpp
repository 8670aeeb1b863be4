#include <gtest/gtest.h>

#include "gridchain/harness/audit.hpp"
#include "gridchain/harness/report.hpp"
#include "gridchain/harness/run.hpp"
#include "gridchain/oracle/service.hpp"
#include "sim_fixtures.hpp"
#include "test_support.hpp"

namespace gridchain {
namespace {

using test::Account;
using test::account;
using test::ChainHarness;
using test::small_sim_config;

// A ledger the stock actors produced must recompute cleanly end to end.
TEST(Audit, CleanSimulatedLedgerHasNoDiscrepancies) {
    const SimConfig cfg = small_sim_config(Scenario::All);
    const RunOutput out = run_simulation(cfg, 7);
    ASSERT_TRUE(out.ok) << out.error;

    const AuditReport rep = audit_ledger(out.chain.blocks);
    EXPECT_TRUE(rep.error.empty()) << rep.error;
    for (const auto& d : rep.discrepancies)
        ADD_FAILURE() << d.kind << "/" << d.field << " at height " << d.height << ": expected "
                      << d.expected << ", got " << d.actual;
    EXPECT_TRUE(rep.ok);
    EXPECT_TRUE(rep.conserved());
    EXPECT_EQ(rep.height, out.chain.height());

    // One clearing per metered slot, the scripted DR and VPP activity, and
    // the selection plus coalition answers.
    EXPECT_EQ(rep.audited_clearings, 12u);
    EXPECT_EQ(rep.audited_dr_settlements, 2u);
    EXPECT_EQ(rep.audited_dispatches, 1u);
    EXPECT_EQ(rep.audited_vpp_settlements, 1u);
    EXPECT_EQ(rep.audited_oracle_responses, 2u);
    EXPECT_EQ(rep.buyer_payments_milli, rep.seller_receipts_milli);
    EXPECT_GT(rep.buyer_payments_milli, 0);
}

TEST(Audit, AgreesWithTheRunReportOnMoneyFlows) {
    const SimConfig cfg = small_sim_config(Scenario::All);
    const RunOutput out = run_simulation(cfg, 7);
    ASSERT_TRUE(out.ok) << out.error;

    const RunReport run_rep = build_report(cfg, 7, out);
    EXPECT_TRUE(run_rep.conservation.balanced());
    EXPECT_TRUE(run_rep.mirrors_match());
    EXPECT_EQ(run_rep.dr_settlements, 2u);
    EXPECT_EQ(run_rep.dispatches, 1u);
    EXPECT_EQ(run_rep.vpp_settlements, 1u);
    EXPECT_EQ(run_rep.failed_txs, 0u);

    const AuditReport audit_rep = audit_ledger(out.chain.blocks);
    EXPECT_EQ(audit_rep.buyer_payments_milli, run_rep.conservation.buyer_payments_milli);
    EXPECT_EQ(audit_rep.dr_aggregator_outflow_milli,
              run_rep.conservation.dr_aggregator_outflow_milli);
    EXPECT_EQ(audit_rep.vpp_operator_outflow_milli,
              run_rep.conservation.vpp_operator_outflow_milli);

    // Per-prosumer totals must add up to the operator-side sums.
    std::int64_t trade_total = 0, dr_total = 0, vpp_total = 0;
    for (const auto& p : run_rep.prosumers) {
        trade_total += p.trade_net_milli;
        dr_total += p.dr_net_milli;
        vpp_total += p.vpp_net_milli;
    }
    EXPECT_EQ(trade_total, 0);
    EXPECT_EQ(dr_total, run_rep.conservation.dr_prosumer_net_milli);
    EXPECT_EQ(vpp_total, run_rep.conservation.vpp_member_net_milli);

    const auto j = report_to_json(run_rep);
    EXPECT_EQ(j["scenario"], "all");
    EXPECT_EQ(j["conservation"]["balanced"], true);
    EXPECT_EQ(j["prosumers"].size(), 3u);

    const std::string csv = earnings_csv(run_rep);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "prosumer_id,address,trade_net_milli,dr_net_milli,vpp_net_milli,total_milli");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

// The settlement transaction carries a falsified reading for slot 4. The
// contract accepts it (readings are cross-checked by the audit, not the vm),
// the payout arithmetic is self-consistent, and only the comparison against
// the committed meter series exposes the lie.
TEST(Audit, LocatesATamperedSettlementReading) {
    ChainHarness h;
    const Account pros = account(1);
    const Account agg = account(2);

    MeterInit meter_init;
    meter_init.metadata = {"smart-meter", "energy", "Wh", pros.address};
    const Transaction meter_tx =
        h.submit(pros, Address{}, TxKind::Deploy, encode_deploy(ContractKind::Meter, meter_init));
    const Address meter = contract_address(meter_tx.sender, meter_tx.nonce);
    DRInit dr_init;
    dr_init.prosumer = pros.address;
    dr_init.aggregator = agg.address;
    dr_init.baseline.slot_wh = {1000, 1000};
    const Transaction dr_tx =
        h.submit(agg, Address{}, TxKind::Deploy, encode_deploy(ContractKind::DR, dr_init));
    const Address dr = contract_address(dr_tx.sender, dr_tx.nonce);
    h.seal(1);

    FlexibilityOrder order;
    order.window_start = 4;
    order.window_end = 6;
    order.amount_wh = 600;
    order.incentive_rate = 1000;
    order.penalty_rate = 500;
    order.congestion_point = "feeder-1";
    h.submit(agg, dr, TxKind::DRIssueOrder, DRIssueOrderPayload{order}.encode());
    h.seal(2);

    h.submit(pros, meter, TxKind::MeterUpdate, MeterUpdatePayload{{4, 500, meter}}.encode());
    h.submit(pros, meter, TxKind::MeterUpdate, MeterUpdatePayload{{5, 500, meter}}.encode());
    h.seal(3);

    DRSettlePayload settle;
    settle.order_id = 0;
    settle.metered = {{4, 200, meter}, {5, 500, meter}};
    h.submit(agg, dr, TxKind::DRSettle, settle.encode());
    h.seal(6);
    ASSERT_EQ(h.contract_as<DRContractState>(dr).settlements.size(), 1u);

    const AuditReport rep = audit_ledger(h.chain.blocks);
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.audited_dr_settlements, 1u);
    ASSERT_EQ(rep.discrepancies.size(), 1u);
    const AuditDiscrepancy& d = rep.discrepancies[0];
    EXPECT_EQ(d.kind, "dr_settlement");
    EXPECT_EQ(d.height, 4u);
    EXPECT_EQ(d.id, 0u);
    EXPECT_EQ(d.field, "reading at slot 4");
    EXPECT_EQ(d.expected, "500 Wh");
    EXPECT_EQ(d.actual, "200 Wh");
}

// An oracle that withholds matches records a clearing the contract cannot
// reject (an empty result is trivially feasible). Recomputing the auction
// over the book as of the request's commit height exposes it.
TEST(Audit, LocatesAForgedClearing) {
    ChainHarness h;
    const Account op = account(3);
    const Account oracle = account(4);
    const Account buyer = account(5);
    const Account seller = account(6);

    MarketInit init;
    init.oracle = oracle.address;
    const Transaction deploy_tx =
        h.submit(op, Address{}, TxKind::Deploy, encode_deploy(ContractKind::Market, init));
    const Address market = contract_address(deploy_tx.sender, deploy_tx.nonce);
    h.seal(1);

    Order bid;
    bid.side = OrderSide::Bid;
    bid.owner = buyer.address;
    bid.qty_wh = 10;
    bid.limit_price = 200;
    bid.slot = 5;
    Order offer;
    offer.side = OrderSide::Offer;
    offer.owner = seller.address;
    offer.qty_wh = 10;
    offer.limit_price = 100;
    offer.slot = 5;
    h.submit(buyer, market, TxKind::MarketSubmitOrder, MarketSubmitOrderPayload{bid}.encode());
    h.submit(seller, market, TxKind::MarketSubmitOrder, MarketSubmitOrderPayload{offer}.encode());
    h.seal(2);

    ClearingParams params;
    params.market = market;
    params.slot = 5;
    h.submit(op, oracle.address, TxKind::OracleRequest,
             OracleRequestPayload::make(OracleServiceKind::Clearing, 5, params).encode());
    h.seal(3);

    MarketRecordClearingPayload forged;
    forged.requester = op.address;
    forged.request_id = 5;
    forged.result.slot = 5;
    h.submit(oracle, market, TxKind::MarketRecordClearing, forged.encode());
    h.seal(4);
    ASSERT_EQ(h.contract_as<MarketContractState>(market).clearings.size(), 1u);

    const AuditReport rep = audit_ledger(h.chain.blocks);
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.audited_clearings, 1u);
    ASSERT_EQ(rep.discrepancies.size(), 1u);
    const AuditDiscrepancy& d = rep.discrepancies[0];
    EXPECT_EQ(d.kind, "clearing");
    EXPECT_EQ(d.height, 4u);
    EXPECT_EQ(d.id, 5u);
    EXPECT_EQ(d.field, "result");
    EXPECT_EQ(d.expected, "price 150, volume 10 Wh, 1 matches");
    EXPECT_EQ(d.actual, "price 0, volume 0 Wh, 0 matches");
}

// A member claiming full delivery while its meter shows half. The contract
// trusts the operator's delivered figures; the audit rebuilds them from the
// committed readings against the baseline.
TEST(Audit, LocatesAnInflatedDeliveryClaim) {
    ChainHarness h;
    const Account pros = account(1);
    const Account op = account(2);
    const Account oracle = account(7);

    MeterInit meter_init;
    meter_init.metadata = {"smart-meter", "energy", "Wh", pros.address};
    const Transaction meter_tx =
        h.submit(pros, Address{}, TxKind::Deploy, encode_deploy(ContractKind::Meter, meter_init));
    const Address meter = contract_address(meter_tx.sender, meter_tx.nonce);
    DRInit dr_init;
    dr_init.prosumer = pros.address;
    dr_init.aggregator = op.address;
    dr_init.baseline.slot_wh = {1000, 1000};
    h.submit(op, Address{}, TxKind::Deploy, encode_deploy(ContractKind::DR, dr_init));
    VPPInit vpp_init;
    vpp_init.operator_addr = op.address;
    vpp_init.oracle = oracle.address;
    const Transaction vpp_tx =
        h.submit(op, Address{}, TxKind::Deploy, encode_deploy(ContractKind::VPP, vpp_init));
    const Address vpp = contract_address(vpp_tx.sender, vpp_tx.nonce);
    h.seal(1);

    AssetRecord asset;
    asset.owner = pros.address;
    asset.capacity_wh_per_slot = 600;
    asset.response_time_slots = 1;
    asset.sync_time_slots = 1;
    asset.max_dispatch_slots = 8;
    asset.cost_rate = 500;
    h.submit(pros, vpp, TxKind::VPPRegisterAsset, VPPRegisterAssetPayload{asset}.encode());
    CoalitionParams params;
    params.vpp = vpp;
    params.service = {600, 2, 2, 900, 100, ""};
    h.submit(op, oracle.address, TxKind::OracleRequest,
             OracleRequestPayload::make(OracleServiceKind::Coalition, 0, params).encode());
    h.seal(2);

    DispatchRecord dispatch;
    dispatch.service_id = 0;
    dispatch.window_start = 6;
    dispatch.window_end = 8;
    dispatch.max_response_slots = 2;
    dispatch.penalty_rate = 100;
    dispatch.members = {{0, 600}};
    h.submit(op, vpp, TxKind::VPPRecordDispatch,
             VPPRecordDispatchPayload{dispatch, op.address, 0}.encode());
    h.seal(3);

    h.submit(pros, meter, TxKind::MeterUpdate, MeterUpdatePayload{{6, 700, meter}}.encode());
    h.submit(pros, meter, TxKind::MeterUpdate, MeterUpdatePayload{{7, 700, meter}}.encode());
    h.seal(4);

    VPPSettlePayload settle;
    settle.dispatch_id = 0;
    settle.delivered = {{0, 1200}};
    h.submit(op, vpp, TxKind::VPPSettle, settle.encode());
    h.seal(8);
    ASSERT_EQ(h.contract_as<VPPContractState>(vpp).settlements.size(), 1u);

    const AuditReport rep = audit_ledger(h.chain.blocks);
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.audited_dispatches, 1u);
    EXPECT_EQ(rep.audited_vpp_settlements, 1u);
    ASSERT_EQ(rep.discrepancies.size(), 1u);
    const AuditDiscrepancy& d = rep.discrepancies[0];
    EXPECT_EQ(d.kind, "vpp_settlement");
    EXPECT_EQ(d.height, 5u);
    EXPECT_EQ(d.id, 0u);
    EXPECT_EQ(d.field, "delivered_wh of asset 0");
    EXPECT_EQ(d.expected, "600 Wh from the meter record");
    EXPECT_EQ(d.actual, "1200 Wh claimed");
}

// A selection answer whose body is not what the optimizer yields for the
// committed candidate set.
TEST(Audit, LocatesAForgedSelectionAnswer) {
    ChainHarness h;
    const Account requester = account(8);
    const Account oracle = account(9);

    FlexParams params;
    params.target_wh = 150;
    params.candidates = {{0, 100, 10}, {1, 200, 15}};
    h.submit(requester, oracle.address, TxKind::OracleRequest,
             OracleRequestPayload::make(OracleServiceKind::Flexibility, 1, params).encode());
    h.seal(1);

    FlexSelection lie;
    lie.target_wh = 150;
    lie.feasible = true;
    lie.optimal = true;
    lie.chosen = {0};
    lie.total_wh = 100;
    lie.total_cost = 10;
    ByteWriter w;
    lie.encode(w);
    OracleResponsePayload response;
    response.requester = requester.address;
    response.request_id = 1;
    response.ok = true;
    response.body = std::move(w).take();
    h.submit(oracle, requester.address, TxKind::OracleResponse, response.encode());
    h.seal(2);

    const AuditReport rep = audit_ledger(h.chain.blocks);
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.audited_oracle_responses, 1u);
    ASSERT_EQ(rep.discrepancies.size(), 1u);
    const AuditDiscrepancy& d = rep.discrepancies[0];
    EXPECT_EQ(d.kind, "oracle_response");
    EXPECT_EQ(d.height, 2u);
    EXPECT_EQ(d.id, 1u);
    EXPECT_EQ(d.field, "body");
}

TEST(Audit, GenesisOnlyLedgerIsClean) {
    const AuditReport rep = audit_ledger({genesis_block()});
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.height, 0u);
    EXPECT_EQ(rep.audited_clearings, 0u);
    EXPECT_EQ(rep.audited_dr_settlements, 0u);
    EXPECT_TRUE(rep.discrepancies.empty());
    EXPECT_TRUE(rep.conserved());
}

TEST(Audit, StructuralBreakStopsTheAudit) {
    ChainHarness h;
    h.deploy_meter(account(1), 1);
    std::vector<Block> blocks = h.chain.blocks;
    blocks[1].state_root[0] ^= 0xff;
    blocks[1].sign(h.validator.keys);

    const AuditReport rep = audit_ledger(blocks);
    EXPECT_FALSE(rep.ok);
    EXPECT_EQ(rep.error, "bad-state-root at height 1");
    EXPECT_TRUE(rep.discrepancies.empty());
}

TEST(Audit, ReportSerializesDiscrepancies) {
    ChainHarness h;
    const Account requester = account(8);
    const Account oracle = account(9);
    FlexParams params;
    params.target_wh = 100;
    params.candidates = {{0, 120, 5}};
    h.submit(requester, oracle.address, TxKind::OracleRequest,
             OracleRequestPayload::make(OracleServiceKind::Flexibility, 2, params).encode());
    h.seal(1);
    OracleResponsePayload response;
    response.requester = requester.address;
    response.request_id = 2;
    response.ok = true;
    response.body = {0xde, 0xad};
    h.submit(oracle, requester.address, TxKind::OracleResponse, response.encode());
    h.seal(2);

    const auto j = audit_report_to_json(audit_ledger(h.chain.blocks));
    EXPECT_EQ(j["ok"], false);
    EXPECT_EQ(j["discrepancies"].size(), 1u);
    EXPECT_EQ(j["discrepancies"][0]["kind"], "oracle_response");
    EXPECT_EQ(j["conservation"]["balanced"], true);
}

}  // namespace
}  // namespace gridchain
