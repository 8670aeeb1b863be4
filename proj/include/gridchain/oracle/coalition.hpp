#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/contracts/types.hpp"
#include "gridchain/oracle/flex.hpp"

namespace gridchain {

// What a grid operator asks a VPP to stand ready for. The band tag is
// opaque; an empty band means the service does not segment by band.
struct VppServiceSpec {
    std::int64_t capacity_wh_per_slot = 0;
    std::uint64_t max_response_slots = 0;
    std::uint64_t dispatch_slots = 0;
    std::int64_t price_rate = 0;    // milli-currency per Wh offered to the VPP
    std::int64_t penalty_rate = 0;  // milli-currency per Wh of shortfall
    std::string band;

    bool operator==(const VppServiceSpec&) const = default;

    void encode(ByteWriter& w) const {
        w.i64(capacity_wh_per_slot);
        w.u64(max_response_slots);
        w.u64(dispatch_slots);
        w.i64(price_rate);
        w.i64(penalty_rate);
        w.str(band);
    }
    static bool decode(ByteReader& r, VppServiceSpec& out) {
        return r.i64(out.capacity_wh_per_slot) && r.u64(out.max_response_slots) &&
               r.u64(out.dispatch_slots) && r.i64(out.price_rate) && r.i64(out.penalty_rate) &&
               r.str(out.band);
    }
};

struct CoalitionPlan {
    VppServiceSpec service;
    bool feasible = false;
    bool optimal = false;
    std::vector<DispatchMember> members;  // ascending asset id
    std::int64_t total_scheduled_wh_per_slot = 0;
    std::int64_t total_cost = 0;  // selection objective: Σ cost_rate × dispatch_slots

    bool operator==(const CoalitionPlan&) const = default;

    void encode(ByteWriter& w) const {
        service.encode(w);
        w.u8(feasible ? 1 : 0);
        w.u8(optimal ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(members.size()));
        for (const auto& m : members) m.encode(w);
        w.i64(total_scheduled_wh_per_slot);
        w.i64(total_cost);
    }
    static bool decode(ByteReader& r, CoalitionPlan& out) {
        std::uint8_t feasible, optimal;
        std::uint32_t n;
        if (!VppServiceSpec::decode(r, out.service) || !r.u8(feasible) || feasible > 1 ||
            !r.u8(optimal) || optimal > 1 || !r.u32(n) || n > 65536)
            return false;
        out.feasible = feasible;
        out.optimal = optimal;
        out.members.resize(n);
        for (auto& m : out.members)
            if (!DispatchMember::decode(r, m)) return false;
        return r.i64(out.total_scheduled_wh_per_slot) && r.i64(out.total_cost);
    }
};

inline bool asset_meets_service(const AssetRecord& asset, const VppServiceSpec& svc) {
    if (asset.response_time_slots > svc.max_response_slots) return false;
    if (asset.max_dispatch_slots < svc.dispatch_slots) return false;
    if (!svc.band.empty() && asset.band != svc.band) return false;
    return true;
}

// Minimum-cost coalition covering the service capacity each slot. Candidate
// cost is the asset's full-window commitment (cost_rate × dispatch_slots);
// chosen members are scheduled at full capacity with the marginal member
// trimmed to the residual, accumulating in ascending asset id.
inline CoalitionPlan form_coalition(const std::vector<AssetRecord>& assets,
                                    const VppServiceSpec& service) {
    CoalitionPlan plan;
    plan.service = service;

    std::vector<FlexCandidate> candidates;
    std::map<std::uint64_t, const AssetRecord*> by_id;
    for (const auto& asset : assets) {
        if (!asset_meets_service(asset, service)) continue;
        if (asset.capacity_wh_per_slot <= 0 || asset.cost_rate < 0) continue;
        if (!by_id.emplace(asset.id, &asset).second) continue;  // duplicate id: keep first
        candidates.push_back({asset.id, asset.capacity_wh_per_slot,
                              asset.cost_rate * static_cast<std::int64_t>(service.dispatch_slots)});
    }

    FlexSelection selection = select_flexibility(candidates, service.capacity_wh_per_slot);
    if (!selection.feasible) return plan;
    plan.feasible = true;
    plan.optimal = selection.optimal;
    plan.total_cost = selection.total_cost;

    std::int64_t residual = std::max<std::int64_t>(service.capacity_wh_per_slot, 0);
    for (auto id : selection.chosen) {  // chosen is ascending
        const AssetRecord& asset = *by_id.at(id);
        const std::int64_t scheduled = std::min(asset.capacity_wh_per_slot, residual);
        if (scheduled <= 0) break;
        plan.members.push_back({id, scheduled});
        plan.total_scheduled_wh_per_slot += scheduled;
        residual -= scheduled;
    }
    return plan;
}

}  // namespace gridchain
