#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include "gridchain/oracle/service.hpp"

#include "test_support.hpp"

namespace gridchain {
namespace {

using test::Account;
using test::ChainHarness;
using test::account;

struct ServiceFixture {
    ChainHarness h;
    Account oracle = account(10);
    Account alice = account(11);
    Account bob = account(12);
    Account carol = account(13);

    Address deploy_market() {
        MarketInit init;
        init.oracle = oracle.address;
        const Transaction tx = h.submit(carol, Address{}, TxKind::Deploy,
                                        encode_deploy(ContractKind::Market, init));
        const Address market = contract_address(tx.sender, tx.nonce);
        h.seal(1);
        return market;
    }

    Transaction order_tx(const Account& who, const Address& market, OrderSide side,
                         std::int64_t qty, std::int64_t price, std::uint64_t slot) {
        Order o;
        o.side = side;
        o.owner = who.address;
        o.qty_wh = qty;
        o.limit_price = price;
        o.slot = slot;
        return h.make_tx(who, market, TxKind::MarketSubmitOrder,
                         MarketSubmitOrderPayload{o}.encode());
    }

    Transaction request_tx(const Account& who, OracleServiceKind service, std::uint64_t id,
                           Bytes params) {
        OracleRequestPayload p;
        p.service = service;
        p.request_id = id;
        p.params = std::move(params);
        return h.make_tx(who, oracle.address, TxKind::OracleRequest, p.encode());
    }

    std::vector<Transaction> run_oracle() {
        return oracle_step(h.chain, oracle.keys, h.state().nonce_of(oracle.address));
    }
};

template <typename Params>
Bytes encode_params(const Params& p) {
    ByteWriter w;
    p.encode(w);
    return std::move(w).take();
}

TEST(OracleStep, EmptyChainYieldsNoResponses) {
    ServiceFixture f;
    EXPECT_TRUE(f.run_oracle().empty());
}

TEST(OracleStep, ClearingRequestAnsweredWithAcceptedRecord) {
    ServiceFixture f;
    const Address market = f.deploy_market();
    f.h.submit_signed(f.order_tx(f.alice, market, OrderSide::Bid, 5000, 300, 10));
    f.h.submit_signed(f.order_tx(f.bob, market, OrderSide::Offer, 5000, 200, 10));
    ClearingParams params;
    params.market = market;
    params.slot = 10;
    f.h.submit_signed(
        f.request_tx(f.carol, OracleServiceKind::Clearing, 1, encode_params(params)));
    f.h.seal(2);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 1u);
    EXPECT_EQ(txs[0].kind, TxKind::MarketRecordClearing);
    EXPECT_EQ(txs[0].receiver, market);

    f.h.submit_signed(txs[0]);
    f.h.seal(3);
    const auto& state = f.h.contract_as<MarketContractState>(market);
    ASSERT_EQ(state.clearings.size(), 1u);
    EXPECT_EQ(state.clearings[0].total_qty_wh, 5000);
    EXPECT_EQ(state.clearings[0].clearing_price, 250);
    ASSERT_EQ(state.trades.size(), 1u);
    EXPECT_EQ(state.trades[0].buyer, f.alice.address);
    EXPECT_EQ(state.trades[0].seller, f.bob.address);
    EXPECT_TRUE(state.open_orders.empty());

    EXPECT_TRUE(f.run_oracle().empty()) << "answered request must not be answered again";
}

TEST(OracleStep, ClearingPinnedAtRequestHeightIgnoresLaterOrders) {
    ServiceFixture f;
    const Address market = f.deploy_market();
    f.h.submit_signed(f.order_tx(f.alice, market, OrderSide::Bid, 3000, 300, 10));
    f.h.submit_signed(f.order_tx(f.bob, market, OrderSide::Offer, 3000, 200, 10));
    ClearingParams params;
    params.market = market;
    params.slot = 10;
    f.h.submit_signed(
        f.request_tx(f.carol, OracleServiceKind::Clearing, 7, encode_params(params)));
    f.h.seal(2);

    // These land after the request committed; the answer must not see them.
    f.h.submit_signed(f.order_tx(f.alice, market, OrderSide::Bid, 9000, 400, 10));
    f.h.submit_signed(f.order_tx(f.bob, market, OrderSide::Offer, 9000, 100, 10));
    f.h.seal(3);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 1u);
    const auto payload = MarketRecordClearingPayload::decode(txs[0].payload);
    ASSERT_TRUE(payload.has_value());
    EXPECT_EQ(payload->result.total_qty_wh, 3000);

    f.h.submit_signed(txs[0]);
    f.h.seal(4);
    const auto& state = f.h.contract_as<MarketContractState>(market);
    ASSERT_EQ(state.clearings.size(), 1u);
    EXPECT_EQ(state.clearings[0].total_qty_wh, 3000);
    EXPECT_TRUE(state.open_orders.empty()) << "clearing closes the slot for late orders too";
}

TEST(OracleStep, ForecastRequestAnsweredFromMeterHistory) {
    ServiceFixture f;
    const Address meter = f.h.deploy_meter(f.alice, 1);
    for (std::uint64_t s = 0; s < 24; ++s) {
        MeterUpdatePayload p;
        p.reading = {s, static_cast<std::int64_t>(1000 + s), meter};
        f.h.submit_signed(f.h.make_tx(f.alice, meter, TxKind::MeterUpdate, p.encode()));
    }
    ForecastParams params;
    params.series = meter;
    params.horizon = ForecastHorizon::DayAhead;
    params.from_slot = 24;
    f.h.submit_signed(
        f.request_tx(f.alice, OracleServiceKind::Forecast, 2, encode_params(params)));
    f.h.seal(2);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 1u);
    EXPECT_EQ(txs[0].kind, TxKind::OracleResponse);
    EXPECT_EQ(txs[0].receiver, f.alice.address);
    const auto response = OracleResponsePayload::decode(txs[0].payload);
    ASSERT_TRUE(response.has_value());
    EXPECT_TRUE(response->ok);
    EXPECT_EQ(response->request_id, 2u);
    const auto answer = ForecastAnswer::decode(response->body);
    ASSERT_TRUE(answer.has_value());
    ASSERT_EQ(answer->values.size(), 24u);
    for (std::size_t i = 0; i < 24; ++i)
        EXPECT_EQ(answer->values[i], static_cast<std::int64_t>(1000 + i));
}

TEST(OracleStep, ForecastWithThinHistoryFailsGracefully) {
    ServiceFixture f;
    const Address meter = f.h.deploy_meter(f.alice, 1);
    ForecastParams params;
    params.series = meter;
    params.horizon = ForecastHorizon::DayAhead;
    params.from_slot = 24;
    f.h.submit_signed(
        f.request_tx(f.alice, OracleServiceKind::Forecast, 3, encode_params(params)));
    f.h.seal(2);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 1u);
    const auto response = OracleResponsePayload::decode(txs[0].payload);
    ASSERT_TRUE(response.has_value());
    EXPECT_FALSE(response->ok);
    EXPECT_EQ(std::string(response->body.begin(), response->body.end()),
              "insufficient history");
}

TEST(OracleStep, FlexibilityAnsweredFromInlineCandidates) {
    ServiceFixture f;
    FlexParams params;
    params.target_wh = 5000;
    params.candidates = {{0, 2000, 400}, {1, 3000, 500}, {2, 5000, 1000}};
    f.h.submit_signed(
        f.request_tx(f.bob, OracleServiceKind::Flexibility, 4, encode_params(params)));
    f.h.seal(1);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 1u);
    const auto response = OracleResponsePayload::decode(txs[0].payload);
    ASSERT_TRUE(response.has_value());
    ASSERT_TRUE(response->ok);
    ByteReader r(response->body);
    FlexSelection selection;
    ASSERT_TRUE(FlexSelection::decode(r, selection));
    EXPECT_TRUE(selection.feasible);
    EXPECT_EQ(selection.chosen, (std::vector<std::uint64_t>{0, 1}));
    EXPECT_EQ(selection.total_cost, 900);
}

// Registers and commits one asset in its own block so asset ids follow
// registration order, not address sort order within a block.
void register_asset(ServiceFixture& f, const Address& vpp, const Account& owner,
                    std::int64_t capacity, std::int64_t cost_rate, std::uint64_t tick) {
    AssetRecord a;
    a.owner = owner.address;
    a.capacity_wh_per_slot = capacity;
    a.response_time_slots = 1;
    a.sync_time_slots = 0;
    a.max_dispatch_slots = 8;
    a.cost_rate = cost_rate;
    f.h.submit_signed(f.h.make_tx(owner, vpp, TxKind::VPPRegisterAsset,
                                  VPPRegisterAssetPayload{a}.encode()));
    f.h.seal(tick);
}

TEST(OracleStep, CoalitionAnsweredFromRegisteredAssets) {
    ServiceFixture f;
    VPPInit init;
    init.operator_addr = f.carol.address;
    init.oracle = f.oracle.address;
    const Transaction deploy =
        f.h.submit(f.carol, Address{}, TxKind::Deploy, encode_deploy(ContractKind::VPP, init));
    const Address vpp = contract_address(deploy.sender, deploy.nonce);
    f.h.seal(1);
    register_asset(f, vpp, f.alice, 3000, 90, 2);
    register_asset(f, vpp, f.bob, 4000, 100, 3);
    CoalitionParams params;
    params.vpp = vpp;
    params.service.capacity_wh_per_slot = 6000;
    params.service.max_response_slots = 2;
    params.service.dispatch_slots = 4;
    f.h.submit_signed(
        f.request_tx(f.carol, OracleServiceKind::Coalition, 5, encode_params(params)));
    f.h.seal(4);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 1u);
    const auto response = OracleResponsePayload::decode(txs[0].payload);
    ASSERT_TRUE(response.has_value());
    ASSERT_TRUE(response->ok);
    ByteReader r(response->body);
    CoalitionPlan plan;
    ASSERT_TRUE(CoalitionPlan::decode(r, plan));
    ASSERT_TRUE(plan.feasible);
    ASSERT_EQ(plan.members.size(), 2u);
    EXPECT_EQ(plan.members[0].asset_id, 0u);
    EXPECT_EQ(plan.members[0].scheduled_wh_per_slot, 3000);
    EXPECT_EQ(plan.members[1].asset_id, 1u);
    EXPECT_EQ(plan.members[1].scheduled_wh_per_slot, 3000);
}

TEST(OracleStep, MalformedRequestsGetFailureResponses) {
    ServiceFixture f;
    // Too short for even (service, request_id).
    f.h.submit_signed(f.h.make_tx(f.alice, f.oracle.address, TxKind::OracleRequest,
                                  Bytes{0x01, 0x02}));
    // Unknown service tag 9.
    ByteWriter w;
    w.u8(9);
    w.u64(77);
    w.var_bytes(Bytes{});
    f.h.submit_signed(
        f.h.make_tx(f.bob, f.oracle.address, TxKind::OracleRequest, std::move(w).take()));
    f.h.seal(1);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 2u);
    for (const auto& tx : txs) {
        const auto response = OracleResponsePayload::decode(tx.payload);
        ASSERT_TRUE(response.has_value());
        EXPECT_FALSE(response->ok);
    }

    // Both failure responses commit; nothing remains pending.
    for (const auto& tx : txs) f.h.submit_signed(tx);
    f.h.seal(2);
    EXPECT_TRUE(f.run_oracle().empty());
}

TEST(OracleStep, IdempotentOverTheSameView) {
    ServiceFixture f;
    FlexParams params;
    params.target_wh = 1000;
    params.candidates = {{0, 1500, 20}};
    f.h.submit_signed(
        f.request_tx(f.alice, OracleServiceKind::Flexibility, 9, encode_params(params)));
    f.h.seal(1);

    const auto a = f.run_oracle();
    const auto b = f.run_oracle();
    ASSERT_EQ(a.size(), 1u);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(a[0].id(), b[0].id());
}

TEST(OracleStep, ResponsesOrderedByRequestId) {
    ServiceFixture f;
    FlexParams params;
    params.target_wh = 100;
    params.candidates = {{0, 200, 1}};
    f.h.submit_signed(
        f.request_tx(f.bob, OracleServiceKind::Flexibility, 12, encode_params(params)));
    f.h.submit_signed(
        f.request_tx(f.alice, OracleServiceKind::Flexibility, 4, encode_params(params)));
    f.h.seal(1);

    const auto txs = f.run_oracle();
    ASSERT_EQ(txs.size(), 2u);
    const auto first = OracleResponsePayload::decode(txs[0].payload);
    const auto second = OracleResponsePayload::decode(txs[1].payload);
    ASSERT_TRUE(first && second);
    EXPECT_EQ(first->request_id, 4u);
    EXPECT_EQ(second->request_id, 12u);
    EXPECT_EQ(txs[0].nonce + 1, txs[1].nonce);
}

TEST(OracleService, WrapperSkipsInFlightAnswers) {
    ServiceFixture f;
    OracleService service(f.oracle.keys);
    FlexParams params;
    params.target_wh = 100;
    params.candidates = {{0, 200, 1}};
    f.h.submit_signed(
        f.request_tx(f.alice, OracleServiceKind::Flexibility, 1, encode_params(params)));
    f.h.seal(1);

    const auto first = service.step(f.h.chain);
    ASSERT_EQ(first.size(), 1u);
    EXPECT_TRUE(service.step(f.h.chain).empty()) << "same answer must not be emitted twice";

    f.h.submit_signed(first[0]);
    f.h.seal(2);
    EXPECT_TRUE(service.step(f.h.chain).empty());

    // A new request picks up the next nonce after the committed answer.
    f.h.submit_signed(
        f.request_tx(f.bob, OracleServiceKind::Flexibility, 2, encode_params(params)));
    f.h.seal(3);
    const auto second = service.step(f.h.chain);
    ASSERT_EQ(second.size(), 1u);
    EXPECT_EQ(second[0].nonce, first[0].nonce + 1);
}

}  // namespace
}  // namespace gridchain
