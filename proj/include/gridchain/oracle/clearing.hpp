#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gridchain/common.hpp"
#include "gridchain/contracts/types.hpp"

namespace gridchain {

namespace clearing_detail {

struct Fill {
    const Order* order;
    std::int64_t qty;
};

// Allocates `volume` across one side of the book. Priority is better price
// first; inside the marginal price group the split is pro-rata by quantity,
// leftover watt-hours going to the lowest order ids (capped by each order's
// remaining room, so the allocation is always feasible).
inline std::vector<Fill> allocate(std::vector<const Order*> side, std::int64_t volume,
                                  bool descending_price) {
    std::sort(side.begin(), side.end(), [&](const Order* a, const Order* b) {
        if (a->limit_price != b->limit_price)
            return descending_price ? a->limit_price > b->limit_price
                                    : a->limit_price < b->limit_price;
        return a->id < b->id;
    });

    std::vector<Fill> fills;
    std::size_t i = 0;
    std::int64_t remaining = volume;
    while (i < side.size() && remaining > 0) {
        std::size_t j = i;
        std::int64_t group_qty = 0;
        while (j < side.size() && side[j]->limit_price == side[i]->limit_price) {
            group_qty += side[j]->qty_wh;
            ++j;
        }
        if (group_qty <= remaining) {
            for (std::size_t k = i; k < j; ++k) fills.push_back({side[k], side[k]->qty_wh});
            remaining -= group_qty;
        } else {
            std::vector<const Order*> group(side.begin() + i, side.begin() + j);
            std::sort(group.begin(), group.end(),
                      [](const Order* a, const Order* b) { return a->id < b->id; });
            std::int64_t allocated = 0;
            std::vector<std::int64_t> share(group.size());
            for (std::size_t k = 0; k < group.size(); ++k) {
                share[k] = static_cast<std::int64_t>(
                    (static_cast<__int128>(remaining) * group[k]->qty_wh) / group_qty);
                allocated += share[k];
            }
            std::int64_t leftover = remaining - allocated;
            for (std::size_t k = 0; k < group.size() && leftover > 0; ++k) {
                const std::int64_t room = group[k]->qty_wh - share[k];
                const std::int64_t add = std::min(room, leftover);
                share[k] += add;
                leftover -= add;
            }
            for (std::size_t k = 0; k < group.size(); ++k)
                if (share[k] > 0) fills.push_back({group[k], share[k]});
            remaining = 0;
        }
        i = j;
    }
    return fills;
}

}  // namespace clearing_detail

// Uniform-price double auction over one delivery slot's book.
//
// Traded volume is the maximum of min(demand(p), supply(p)) over all limit
// prices p in the book; the price is the floored midpoint of the marginal
// matched bid and offer limits, which always lies inside [marginal offer,
// marginal bid], so every match is individually rational.
inline ClearingResult clear_market(const std::vector<Order>& bids,
                                   const std::vector<Order>& offers, std::uint64_t slot) {
    ClearingResult result;
    result.slot = slot;

    std::vector<const Order*> bid_ptrs, offer_ptrs;
    for (const auto& b : bids)
        if (b.side == OrderSide::Bid && b.qty_wh > 0) bid_ptrs.push_back(&b);
    for (const auto& o : offers)
        if (o.side == OrderSide::Offer && o.qty_wh > 0) offer_ptrs.push_back(&o);

    std::vector<std::int64_t> candidates;
    for (const auto* b : bid_ptrs) candidates.push_back(b->limit_price);
    for (const auto* o : offer_ptrs) candidates.push_back(o->limit_price);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::int64_t best_volume = 0;
    for (const std::int64_t p : candidates) {
        std::int64_t demand = 0, supply = 0;
        for (const auto* b : bid_ptrs)
            if (b->limit_price >= p) demand += b->qty_wh;
        for (const auto* o : offer_ptrs)
            if (o->limit_price <= p) supply += o->qty_wh;
        best_volume = std::max(best_volume, std::min(demand, supply));
    }
    if (best_volume == 0) return result;

    const auto bid_fills = clearing_detail::allocate(bid_ptrs, best_volume, true);
    const auto offer_fills = clearing_detail::allocate(offer_ptrs, best_volume, false);

    std::int64_t marginal_bid = bid_fills.back().order->limit_price;
    std::int64_t marginal_offer = offer_fills.back().order->limit_price;
    result.clearing_price = floor_div(marginal_bid + marginal_offer, 2);
    result.total_qty_wh = best_volume;

    std::size_t bi = 0, oi = 0;
    std::int64_t bid_left = bid_fills.empty() ? 0 : bid_fills[0].qty;
    std::int64_t offer_left = offer_fills.empty() ? 0 : offer_fills[0].qty;
    while (bi < bid_fills.size() && oi < offer_fills.size()) {
        const std::int64_t qty = std::min(bid_left, offer_left);
        result.matches.push_back({bid_fills[bi].order->id, offer_fills[oi].order->id, qty});
        bid_left -= qty;
        offer_left -= qty;
        if (bid_left == 0 && ++bi < bid_fills.size()) bid_left = bid_fills[bi].qty;
        if (offer_left == 0 && ++oi < offer_fills.size()) offer_left = offer_fills[oi].qty;
    }
    return result;
}

}  // namespace gridchain
