#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "gridchain/oracle/clearing.hpp"

#include "test_support.hpp"

namespace gridchain {
namespace {

Order bid(std::uint64_t id, std::int64_t qty, std::int64_t limit, std::uint64_t slot = 10) {
    Order o;
    o.id = id;
    o.side = OrderSide::Bid;
    o.qty_wh = qty;
    o.limit_price = limit;
    o.slot = slot;
    return o;
}

Order offer(std::uint64_t id, std::int64_t qty, std::int64_t limit, std::uint64_t slot = 10) {
    Order o = bid(id, qty, limit, slot);
    o.side = OrderSide::Offer;
    return o;
}

// Reference volume: max over every integer price of min(demand, supply).
std::int64_t brute_force_volume(const std::vector<Order>& bids, const std::vector<Order>& offers,
                                std::int64_t max_price) {
    std::int64_t best = 0;
    for (std::int64_t p = 0; p <= max_price + 1; ++p) {
        std::int64_t demand = 0, supply = 0;
        for (const auto& b : bids)
            if (b.limit_price >= p) demand += b.qty_wh;
        for (const auto& o : offers)
            if (o.limit_price <= p) supply += o.qty_wh;
        best = std::max(best, std::min(demand, supply));
    }
    return best;
}

struct BookCheck {
    std::map<std::uint64_t, std::int64_t> filled_per_order;
};

BookCheck tally(const ClearingResult& result) {
    BookCheck c;
    for (const auto& m : result.matches) {
        c.filled_per_order[m.bid_id] += m.qty_wh;
        c.filled_per_order[m.offer_id] += m.qty_wh;
    }
    return c;
}

void check_result_integrity(const std::vector<Order>& bids, const std::vector<Order>& offers,
                            const ClearingResult& result) {
    std::map<std::uint64_t, const Order*> by_id;
    for (const auto& o : bids) by_id[o.id] = &o;
    for (const auto& o : offers) by_id[o.id] = &o;

    std::map<std::uint64_t, std::int64_t> filled;
    std::int64_t total = 0;
    for (const auto& m : result.matches) {
        ASSERT_GT(m.qty_wh, 0);
        ASSERT_TRUE(by_id.count(m.bid_id));
        ASSERT_TRUE(by_id.count(m.offer_id));
        const Order* b = by_id[m.bid_id];
        const Order* s = by_id[m.offer_id];
        ASSERT_EQ(b->side, OrderSide::Bid);
        ASSERT_EQ(s->side, OrderSide::Offer);
        EXPECT_GE(b->limit_price, result.clearing_price);
        EXPECT_LE(s->limit_price, result.clearing_price);
        filled[m.bid_id] += m.qty_wh;
        filled[m.offer_id] += m.qty_wh;
        total += m.qty_wh;
    }
    EXPECT_EQ(total, result.total_qty_wh);
    for (const auto& [id, qty] : filled) EXPECT_LE(qty, by_id[id]->qty_wh) << "order " << id;
}

TEST(Clearing, SingleCrossingPairTradesAtMidpoint) {
    const auto result = clear_market({bid(0, 5000, 300)}, {offer(1, 5000, 200)}, 10);
    EXPECT_EQ(result.total_qty_wh, 5000);
    EXPECT_EQ(result.clearing_price, 250);
    ASSERT_EQ(result.matches.size(), 1u);
    EXPECT_EQ(result.matches[0].bid_id, 0u);
    EXPECT_EQ(result.matches[0].offer_id, 1u);
    EXPECT_EQ(result.matches[0].qty_wh, 5000);
}

TEST(Clearing, NoOverlapMeansNoTrade) {
    const auto result = clear_market({bid(0, 1000, 100)}, {offer(1, 1000, 200)}, 10);
    EXPECT_EQ(result.total_qty_wh, 0);
    EXPECT_TRUE(result.matches.empty());
}

TEST(Clearing, TwoByTwoBookClearsAtScannedOptimum) {
    const std::vector<Order> bids = {bid(0, 3000, 300), bid(1, 3000, 250)};
    const std::vector<Order> offers = {offer(2, 2000, 100), offer(3, 4000, 240)};
    const auto result = clear_market(bids, offers, 10);
    EXPECT_EQ(result.total_qty_wh, 6000);
    EXPECT_EQ(result.clearing_price, 245);
    check_result_integrity(bids, offers, result);
}

TEST(Clearing, EmptyBooksYieldZero) {
    EXPECT_EQ(clear_market({bid(0, 1000, 100)}, {}, 10).total_qty_wh, 0);
    EXPECT_EQ(clear_market({}, {offer(0, 1000, 100)}, 10).total_qty_wh, 0);
    EXPECT_EQ(clear_market({}, {}, 10).total_qty_wh, 0);
}

TEST(Clearing, ProRataSplitsMarginalGroupByQuantity) {
    // Two bids at the same marginal limit compete for 3000 Wh of supply.
    const std::vector<Order> bids = {bid(0, 2000, 250), bid(1, 4000, 250)};
    const std::vector<Order> offers = {offer(2, 3000, 200)};
    const auto result = clear_market(bids, offers, 10);
    EXPECT_EQ(result.total_qty_wh, 3000);
    const auto c = tally(result);
    EXPECT_EQ(c.filled_per_order.at(0), 1000);  // floor(3000 * 2000/6000)
    EXPECT_EQ(c.filled_per_order.at(1), 2000);
    check_result_integrity(bids, offers, result);
}

TEST(Clearing, ProRataRemainderGoesToLowestIdsWithRoom) {
    // Quantities 1,1,8 sharing 9: floors are 0,0,7; the 2 leftover must
    // spread under per-order caps, lowest id first.
    const std::vector<Order> bids = {bid(0, 1, 250), bid(1, 1, 250), bid(2, 8, 250)};
    const std::vector<Order> offers = {offer(3, 9, 200)};
    const auto result = clear_market(bids, offers, 10);
    EXPECT_EQ(result.total_qty_wh, 9);
    const auto c = tally(result);
    EXPECT_EQ(c.filled_per_order.at(0), 1);
    EXPECT_EQ(c.filled_per_order.at(1), 1);
    EXPECT_EQ(c.filled_per_order.at(2), 7);
    check_result_integrity(bids, offers, result);
}

TEST(Clearing, VolumeMatchesBruteForceOverRandomBooks) {
    SplitMix64 rng(0xc1ea41u);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Order> bids, offers;
        std::uint64_t id = 0;
        const std::uint64_t nb = rng.below(7), no = rng.below(7);
        for (std::uint64_t i = 0; i < nb; ++i)
            bids.push_back(bid(id++, 1 + static_cast<std::int64_t>(rng.below(5000)),
                               static_cast<std::int64_t>(rng.below(501))));
        for (std::uint64_t i = 0; i < no; ++i)
            offers.push_back(offer(id++, 1 + static_cast<std::int64_t>(rng.below(5000)),
                                   static_cast<std::int64_t>(rng.below(501))));
        const auto result = clear_market(bids, offers, 10);
        ASSERT_EQ(result.total_qty_wh, brute_force_volume(bids, offers, 500))
            << "trial " << trial;
        check_result_integrity(bids, offers, result);
        if (result.total_qty_wh > 0) EXPECT_GE(result.clearing_price, 0);
    }
}

TEST(Clearing, AddingOffersNeverShrinksVolumeNorRaisesPriceAtSameVolume) {
    SplitMix64 rng(0x0ffe4u);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Order> bids, offers;
        std::uint64_t id = 0;
        const std::uint64_t nb = 1 + rng.below(5), no = 1 + rng.below(4);
        for (std::uint64_t i = 0; i < nb; ++i)
            bids.push_back(bid(id++, 1 + static_cast<std::int64_t>(rng.below(4000)),
                               static_cast<std::int64_t>(rng.below(400))));
        for (std::uint64_t i = 0; i < no; ++i)
            offers.push_back(offer(id++, 1 + static_cast<std::int64_t>(rng.below(4000)),
                                   static_cast<std::int64_t>(rng.below(400))));
        const auto before = clear_market(bids, offers, 10);
        offers.push_back(offer(id++, 1 + static_cast<std::int64_t>(rng.below(4000)),
                               static_cast<std::int64_t>(rng.below(400))));
        const auto after = clear_market(bids, offers, 10);
        ASSERT_GE(after.total_qty_wh, before.total_qty_wh) << "trial " << trial;
        if (after.total_qty_wh == before.total_qty_wh && before.total_qty_wh > 0)
            ASSERT_LE(after.clearing_price, before.clearing_price) << "trial " << trial;
    }
}

TEST(Clearing, AddingBidsNeverShrinksVolumeNorLowersPriceAtSameVolume) {
    SplitMix64 rng(0xb1d5u);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Order> bids, offers;
        std::uint64_t id = 0;
        const std::uint64_t nb = 1 + rng.below(4), no = 1 + rng.below(5);
        for (std::uint64_t i = 0; i < nb; ++i)
            bids.push_back(bid(id++, 1 + static_cast<std::int64_t>(rng.below(4000)),
                               static_cast<std::int64_t>(rng.below(400))));
        for (std::uint64_t i = 0; i < no; ++i)
            offers.push_back(offer(id++, 1 + static_cast<std::int64_t>(rng.below(4000)),
                                   static_cast<std::int64_t>(rng.below(400))));
        const auto before = clear_market(bids, offers, 10);
        bids.push_back(bid(id++, 1 + static_cast<std::int64_t>(rng.below(4000)),
                           static_cast<std::int64_t>(rng.below(400))));
        const auto after = clear_market(bids, offers, 10);
        ASSERT_GE(after.total_qty_wh, before.total_qty_wh) << "trial " << trial;
        if (after.total_qty_wh == before.total_qty_wh && before.total_qty_wh > 0)
            ASSERT_GE(after.clearing_price, before.clearing_price) << "trial " << trial;
    }
}

TEST(Clearing, DeterministicAcrossCalls) {
    const std::vector<Order> bids = {bid(0, 3000, 300), bid(1, 2000, 280), bid(2, 1000, 250)};
    const std::vector<Order> offers = {offer(3, 2500, 240), offer(4, 2500, 260)};
    const auto a = clear_market(bids, offers, 7);
    const auto b = clear_market(bids, offers, 7);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.slot, 7u);
}

}  // namespace
}  // namespace gridchain
