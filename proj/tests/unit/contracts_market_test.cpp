#include <gtest/gtest.h>

#include "gridchain/contracts/vm.hpp"
#include "test_support.hpp"

namespace gridchain {
namespace {

using test::VmHarness;

struct MarketFixture {
    VmHarness h;
    test::Account alice = test::account(1);
    test::Account bob = test::account(2);
    test::Account oracle = test::account(3);
    Address market;

    MarketFixture() {
        auto [receipt, addr] = h.deploy_market(oracle, oracle.address);
        EXPECT_TRUE(receipt.ok) << receipt.error;
        market = addr;
    }

    Bytes order_payload(const test::Account& owner, OrderSide side, std::int64_t qty,
                        std::int64_t price, std::uint64_t slot = 10) {
        MarketSubmitOrderPayload p;
        p.order.side = side;
        p.order.owner = owner.address;
        p.order.qty_wh = qty;
        p.order.limit_price = price;
        p.order.slot = slot;
        return p.encode();
    }

    Bytes clearing_payload(const ClearingResult& result) {
        MarketRecordClearingPayload p;
        p.requester = alice.address;
        p.request_id = 0;
        p.result = result;
        return p.encode();
    }

    const MarketContractState& state() { return h.contract_as<MarketContractState>(market); }
};

TEST(MarketContract, SubmitOrderStored) {
    MarketFixture f;
    auto receipt = f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                            f.order_payload(f.alice, OrderSide::Bid, 2000, 300));
    ASSERT_TRUE(receipt.ok) << receipt.error;
    ASSERT_EQ(f.state().open_orders.size(), 1u);
    EXPECT_EQ(f.state().open_orders[0].id, 0u);
    EXPECT_EQ(f.state().open_orders[0].qty_wh, 2000);
}

TEST(MarketContract, ZeroQuantityRejected) {
    MarketFixture f;
    EXPECT_FALSE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                          f.order_payload(f.alice, OrderSide::Offer, 0, 300))
                     .ok);
}

TEST(MarketContract, NegativePriceRejected) {
    MarketFixture f;
    EXPECT_FALSE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                          f.order_payload(f.alice, OrderSide::Bid, 100, -5))
                     .ok);
}

TEST(MarketContract, NonOwnerOrderRejected) {
    MarketFixture f;
    EXPECT_FALSE(f.h.exec(f.bob, f.market, TxKind::MarketSubmitOrder,
                          f.order_payload(f.alice, OrderSide::Bid, 100, 5))
                     .ok);
}

TEST(MarketContract, PastSlotRejected) {
    MarketFixture f;
    f.h.ctx.block_tick = 10;
    EXPECT_FALSE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                          f.order_payload(f.alice, OrderSide::Bid, 100, 5, 10))
                     .ok);
    EXPECT_TRUE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                         f.order_payload(f.alice, OrderSide::Bid, 100, 5, 11))
                    .ok);
}

// One feasible clearing: alice bids 5000@300, bob offers 5000@200,
// uniform price 250.
struct ClearedMarket : MarketFixture {
    ClearedMarket() {
        EXPECT_TRUE(h.exec(alice, market, TxKind::MarketSubmitOrder,
                           order_payload(alice, OrderSide::Bid, 5000, 300))
                        .ok);
        EXPECT_TRUE(h.exec(bob, market, TxKind::MarketSubmitOrder,
                           order_payload(bob, OrderSide::Offer, 5000, 200))
                        .ok);
    }

    ClearingResult feasible() const {
        ClearingResult r;
        r.slot = 10;
        r.clearing_price = 250;
        r.matches = {{0, 1, 5000}};
        r.total_qty_wh = 5000;
        return r;
    }
};

TEST(MarketContract, FeasibleClearingAccepted) {
    ClearedMarket f;
    auto receipt = f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing,
                            f.clearing_payload(f.feasible()));
    ASSERT_TRUE(receipt.ok) << receipt.error;
    ASSERT_EQ(f.state().trades.size(), 1u);
    const Trade& t = f.state().trades[0];
    EXPECT_EQ(t.buyer, f.alice.address);
    EXPECT_EQ(t.seller, f.bob.address);
    EXPECT_EQ(t.qty_wh, 5000);
    EXPECT_EQ(t.price, 250);
    EXPECT_EQ(t.payment(), floor_div(250 * 5000, 1000));
    EXPECT_TRUE(f.state().open_orders.empty());
    ASSERT_EQ(f.state().clearings.size(), 1u);
}

TEST(MarketContract, NonOracleSenderRejected) {
    ClearedMarket f;
    EXPECT_FALSE(f.h.exec(f.alice, f.market, TxKind::MarketRecordClearing,
                          f.clearing_payload(f.feasible()))
                     .ok);
}

TEST(MarketContract, BidBelowClearingPriceRejected) {
    ClearedMarket f;
    ClearingResult bad = f.feasible();
    bad.clearing_price = 301;  // above the bid's limit of 300
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(bad)).ok);
}

TEST(MarketContract, OfferAboveClearingPriceRejected) {
    ClearedMarket f;
    ClearingResult bad = f.feasible();
    bad.clearing_price = 199;  // below the offer's limit of 200
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(bad)).ok);
}

TEST(MarketContract, OverfillRejected) {
    ClearedMarket f;
    ClearingResult bad = f.feasible();
    bad.matches[0].qty_wh = 6000;  // book only has 5000
    bad.total_qty_wh = 6000;
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(bad)).ok);
}

TEST(MarketContract, TotalMismatchRejected) {
    ClearedMarket f;
    ClearingResult bad = f.feasible();
    bad.total_qty_wh = 4000;
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(bad)).ok);
}

TEST(MarketContract, UnknownOrderReferenceRejected) {
    ClearedMarket f;
    ClearingResult bad = f.feasible();
    bad.matches[0].offer_id = 9;
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(bad)).ok);
}

TEST(MarketContract, SwappedSidesRejected) {
    ClearedMarket f;
    ClearingResult bad = f.feasible();
    std::swap(bad.matches[0].bid_id, bad.matches[0].offer_id);
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(bad)).ok);
}

TEST(MarketContract, SlotClearsAtMostOnce) {
    ClearedMarket f;
    ASSERT_TRUE(f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing,
                         f.clearing_payload(f.feasible()))
                    .ok);
    ClearingResult again;
    again.slot = 10;
    again.clearing_price = 0;
    again.total_qty_wh = 0;
    EXPECT_FALSE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(again)).ok);
    // And no new submissions for a cleared slot.
    EXPECT_FALSE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                          f.order_payload(f.alice, OrderSide::Bid, 100, 300, 10))
                     .ok);
}

TEST(MarketContract, EmptyClearingClosesTheSlot) {
    MarketFixture f;
    ASSERT_TRUE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                         f.order_payload(f.alice, OrderSide::Bid, 100, 50))
                    .ok);
    ClearingResult empty;
    empty.slot = 10;
    empty.clearing_price = 0;
    empty.total_qty_wh = 0;
    ASSERT_TRUE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(empty)).ok);
    EXPECT_TRUE(f.state().open_orders.empty());
    EXPECT_TRUE(f.state().trades.empty());
}

// Pro-rata fills leave residual quantity: bid 5000 against offers of
// 3000 + 3000 at the same price; 1000 must stay unmatched on exactly one
// offer and the totals must conserve.
TEST(MarketContract, PartialFillConservesQuantities) {
    MarketFixture f;
    ASSERT_TRUE(f.h.exec(f.alice, f.market, TxKind::MarketSubmitOrder,
                         f.order_payload(f.alice, OrderSide::Bid, 5000, 300))
                    .ok);
    ASSERT_TRUE(f.h.exec(f.bob, f.market, TxKind::MarketSubmitOrder,
                         f.order_payload(f.bob, OrderSide::Offer, 3000, 200))
                    .ok);
    ASSERT_TRUE(f.h.exec(f.bob, f.market, TxKind::MarketSubmitOrder,
                         f.order_payload(f.bob, OrderSide::Offer, 3000, 200))
                    .ok);
    ClearingResult r;
    r.slot = 10;
    r.clearing_price = 250;
    r.matches = {{0, 1, 3000}, {0, 2, 2000}};
    r.total_qty_wh = 5000;
    ASSERT_TRUE(
        f.h.exec(f.oracle, f.market, TxKind::MarketRecordClearing, f.clearing_payload(r)).ok);
    std::int64_t bought = 0, sold = 0, paid = 0, received = 0;
    for (const Trade& t : f.state().trades) {
        if (t.buyer == f.alice.address) bought += t.qty_wh;
        if (t.seller == f.bob.address) sold += t.qty_wh;
        paid += t.payment();
        received += t.payment();
    }
    EXPECT_EQ(bought, 5000);
    EXPECT_EQ(sold, 5000);
    EXPECT_EQ(paid, received);
}

}  // namespace
}  // namespace gridchain
