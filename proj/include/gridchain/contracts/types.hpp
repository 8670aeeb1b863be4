#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"

namespace gridchain {

// Largest accepted |energy_wh| for a single meter reading.
inline constexpr std::int64_t kMaxReadingWh = 1'000'000'000;

// A metered energy quantity for one device over one time slot.
// Positive = net consumption, negative = net generation.
struct EnergyReading {
    std::uint64_t slot = 0;
    std::int64_t energy_wh = 0;
    Address device;

    bool operator==(const EnergyReading&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(slot);
        w.i64(energy_wh);
        w.address(device);
    }

    static bool decode(ByteReader& r, EnergyReading& out) {
        return r.u64(out.slot) && r.i64(out.energy_wh) && r.address(out.device);
    }
};

// Expected per-slot demand outside any DR program; indexed by slot-of-day.
// Its length doubles as the contract's slots-per-day.
struct BaselineProfile {
    std::vector<std::int64_t> slot_wh;

    bool operator==(const BaselineProfile&) const = default;

    std::int64_t at_slot(std::uint64_t absolute_slot) const {
        return slot_wh[absolute_slot % slot_wh.size()];
    }

    void encode(ByteWriter& w) const {
        w.u32(static_cast<std::uint32_t>(slot_wh.size()));
        for (auto v : slot_wh) w.i64(v);
    }

    static bool decode(ByteReader& r, BaselineProfile& out) {
        std::uint32_t n;
        if (!r.u32(n) || n > 4096) return false;
        out.slot_wh.resize(n);
        for (auto& v : out.slot_wh)
            if (!r.i64(v)) return false;
        return true;
    }
};

enum class FlexDirection : std::uint8_t { Reduce = 0, Increase = 1 };

// An aggregator's requested load adjustment against one prosumer.
struct FlexibilityOrder {
    std::uint64_t id = 0;
    std::uint64_t window_start = 0;
    std::uint64_t window_end = 0;  // exclusive
    FlexDirection direction = FlexDirection::Reduce;
    std::int64_t amount_wh = 0;  // per slot, positive
    std::int64_t incentive_rate = 0;  // milli-currency per kWh
    std::int64_t penalty_rate = 0;
    std::string congestion_point;

    bool operator==(const FlexibilityOrder&) const = default;

    bool overlaps(std::uint64_t start, std::uint64_t end) const {
        return window_start < end && start < window_end;
    }

    void encode(ByteWriter& w) const {
        w.u64(id);
        w.u64(window_start);
        w.u64(window_end);
        w.u8(static_cast<std::uint8_t>(direction));
        w.i64(amount_wh);
        w.i64(incentive_rate);
        w.i64(penalty_rate);
        w.str(congestion_point);
    }

    static bool decode(ByteReader& r, FlexibilityOrder& out) {
        std::uint8_t dir;
        if (!(r.u64(out.id) && r.u64(out.window_start) && r.u64(out.window_end) && r.u8(dir) &&
              r.i64(out.amount_wh) && r.i64(out.incentive_rate) && r.i64(out.penalty_rate) &&
              r.str(out.congestion_point)))
            return false;
        if (dir > 1) return false;
        out.direction = static_cast<FlexDirection>(dir);
        return true;
    }
};

// Post-delivery reward/penalty outcome for one flexibility order.
struct Settlement {
    std::uint64_t order_id = 0;
    std::int64_t delivered_wh = 0;
    std::int64_t shortfall_wh = 0;
    std::int64_t reward = 0;   // milli-currency
    std::int64_t penalty = 0;  // milli-currency

    bool operator==(const Settlement&) const = default;

    std::int64_t net() const { return reward - penalty; }

    void encode(ByteWriter& w) const {
        w.u64(order_id);
        w.i64(delivered_wh);
        w.i64(shortfall_wh);
        w.i64(reward);
        w.i64(penalty);
    }

    static bool decode(ByteReader& r, Settlement& out) {
        return r.u64(out.order_id) && r.i64(out.delivered_wh) && r.i64(out.shortfall_wh) &&
               r.i64(out.reward) && r.i64(out.penalty);
    }
};

enum class OrderSide : std::uint8_t { Bid = 0, Offer = 1 };

// A price-quantity order on the P2P market for one delivery slot.
struct Order {
    std::uint64_t id = 0;
    OrderSide side = OrderSide::Bid;
    Address owner;
    std::int64_t qty_wh = 0;         // remaining open quantity
    std::int64_t limit_price = 0;    // milli-currency per kWh
    std::uint64_t slot = 0;

    bool operator==(const Order&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(id);
        w.u8(static_cast<std::uint8_t>(side));
        w.address(owner);
        w.i64(qty_wh);
        w.i64(limit_price);
        w.u64(slot);
    }

    static bool decode(ByteReader& r, Order& out) {
        std::uint8_t side;
        if (!(r.u64(out.id) && r.u8(side) && r.address(out.owner) && r.i64(out.qty_wh) &&
              r.i64(out.limit_price) && r.u64(out.slot)))
            return false;
        if (side > 1) return false;
        out.side = static_cast<OrderSide>(side);
        return true;
    }
};

struct Match {
    std::uint64_t bid_id = 0;
    std::uint64_t offer_id = 0;
    std::int64_t qty_wh = 0;

    bool operator==(const Match&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(bid_id);
        w.u64(offer_id);
        w.i64(qty_wh);
    }

    static bool decode(ByteReader& r, Match& out) {
        return r.u64(out.bid_id) && r.u64(out.offer_id) && r.i64(out.qty_wh);
    }
};

// Uniform-price clearing outcome for one slot.
struct ClearingResult {
    std::uint64_t slot = 0;
    std::int64_t clearing_price = 0;  // milli-currency per kWh
    std::vector<Match> matches;
    std::int64_t total_qty_wh = 0;

    bool operator==(const ClearingResult&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(slot);
        w.i64(clearing_price);
        w.u32(static_cast<std::uint32_t>(matches.size()));
        for (const auto& m : matches) m.encode(w);
        w.i64(total_qty_wh);
    }

    static bool decode(ByteReader& r, ClearingResult& out) {
        std::uint32_t n;
        if (!r.u64(out.slot) || !r.i64(out.clearing_price) || !r.u32(n) || n > 65536) return false;
        out.matches.resize(n);
        for (auto& m : out.matches)
            if (!Match::decode(r, m)) return false;
        return r.i64(out.total_qty_wh);
    }
};

// A completed exchange at the uniform clearing price.
struct Trade {
    Address buyer;
    Address seller;
    std::int64_t qty_wh = 0;
    std::int64_t price = 0;  // milli-currency per kWh
    std::uint64_t slot = 0;

    bool operator==(const Trade&) const = default;

    // Milli-currency moved from buyer to seller; floored once so both
    // sides see the identical amount.
    std::int64_t payment() const { return floor_div(price * qty_wh, 1000); }

    void encode(ByteWriter& w) const {
        w.address(buyer);
        w.address(seller);
        w.i64(qty_wh);
        w.i64(price);
        w.u64(slot);
    }

    static bool decode(ByteReader& r, Trade& out) {
        return r.address(out.buyer) && r.address(out.seller) && r.i64(out.qty_wh) &&
               r.i64(out.price) && r.u64(out.slot);
    }
};

// Registered VPP member asset with its dispatch constraints.
struct AssetRecord {
    std::uint64_t id = 0;
    Address owner;
    std::int64_t capacity_wh_per_slot = 0;
    std::uint64_t response_time_slots = 0;
    std::uint64_t sync_time_slots = 0;
    std::uint64_t max_dispatch_slots = 0;
    std::string band;
    std::int64_t cost_rate = 0;  // milli-currency per kWh delivered

    bool operator==(const AssetRecord&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(id);
        w.address(owner);
        w.i64(capacity_wh_per_slot);
        w.u64(response_time_slots);
        w.u64(sync_time_slots);
        w.u64(max_dispatch_slots);
        w.str(band);
        w.i64(cost_rate);
    }

    static bool decode(ByteReader& r, AssetRecord& out) {
        return r.u64(out.id) && r.address(out.owner) && r.i64(out.capacity_wh_per_slot) &&
               r.u64(out.response_time_slots) && r.u64(out.sync_time_slots) &&
               r.u64(out.max_dispatch_slots) && r.str(out.band) && r.i64(out.cost_rate);
    }
};

struct DispatchMember {
    std::uint64_t asset_id = 0;
    std::int64_t scheduled_wh_per_slot = 0;

    bool operator==(const DispatchMember&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(asset_id);
        w.i64(scheduled_wh_per_slot);
    }

    static bool decode(ByteReader& r, DispatchMember& out) {
        return r.u64(out.asset_id) && r.i64(out.scheduled_wh_per_slot);
    }
};

// A recorded coalition activation: which assets serve a grid service over
// which window, and on what terms.
struct DispatchRecord {
    std::uint64_t id = 0;
    std::uint64_t service_id = 0;
    std::uint64_t window_start = 0;
    std::uint64_t window_end = 0;  // exclusive
    std::uint64_t max_response_slots = 0;
    std::int64_t penalty_rate = 0;  // service penalty, milli-currency per kWh shortfall
    std::string band;               // empty = any band
    std::vector<DispatchMember> members;

    bool operator==(const DispatchRecord&) const = default;

    std::uint64_t dispatch_slots() const { return window_end - window_start; }

    void encode(ByteWriter& w) const {
        w.u64(id);
        w.u64(service_id);
        w.u64(window_start);
        w.u64(window_end);
        w.u64(max_response_slots);
        w.i64(penalty_rate);
        w.str(band);
        w.u32(static_cast<std::uint32_t>(members.size()));
        for (const auto& m : members) m.encode(w);
    }

    static bool decode(ByteReader& r, DispatchRecord& out) {
        std::uint32_t n;
        if (!(r.u64(out.id) && r.u64(out.service_id) && r.u64(out.window_start) &&
              r.u64(out.window_end) && r.u64(out.max_response_slots) && r.i64(out.penalty_rate) &&
              r.str(out.band) && r.u32(n)) ||
            n > 65536)
            return false;
        out.members.resize(n);
        for (auto& m : out.members)
            if (!DispatchMember::decode(r, m)) return false;
        return true;
    }
};

struct VppMemberSettlement {
    std::uint64_t asset_id = 0;
    std::int64_t scheduled_wh = 0;  // total over the window
    std::int64_t delivered_wh = 0;
    std::int64_t shortfall_wh = 0;
    std::int64_t payout = 0;   // milli-currency
    std::int64_t penalty = 0;  // milli-currency

    bool operator==(const VppMemberSettlement&) const = default;

    std::int64_t net() const { return payout - penalty; }

    void encode(ByteWriter& w) const {
        w.u64(asset_id);
        w.i64(scheduled_wh);
        w.i64(delivered_wh);
        w.i64(shortfall_wh);
        w.i64(payout);
        w.i64(penalty);
    }

    static bool decode(ByteReader& r, VppMemberSettlement& out) {
        return r.u64(out.asset_id) && r.i64(out.scheduled_wh) && r.i64(out.delivered_wh) &&
               r.i64(out.shortfall_wh) && r.i64(out.payout) && r.i64(out.penalty);
    }
};

// One settlement per dispatch, with one row per coalition member.
struct VppSettlementRecord {
    std::uint64_t dispatch_id = 0;
    std::vector<VppMemberSettlement> members;

    bool operator==(const VppSettlementRecord&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(dispatch_id);
        w.u32(static_cast<std::uint32_t>(members.size()));
        for (const auto& m : members) m.encode(w);
    }

    static bool decode(ByteReader& r, VppSettlementRecord& out) {
        std::uint32_t n;
        if (!r.u64(out.dispatch_id) || !r.u32(n) || n > 65536) return false;
        out.members.resize(n);
        for (auto& m : out.members)
            if (!VppMemberSettlement::decode(r, m)) return false;
        return true;
    }
};

}  // namespace gridchain
