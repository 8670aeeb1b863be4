#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"

namespace gridchain {

struct FlexCandidate {
    std::uint64_t id = 0;
    std::int64_t flex_wh = 0;  // positive offerable flexibility
    std::int64_t cost = 0;     // milli-currency for the whole profile

    bool operator==(const FlexCandidate&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(id);
        w.i64(flex_wh);
        w.i64(cost);
    }
    static bool decode(ByteReader& r, FlexCandidate& out) {
        return r.u64(out.id) && r.i64(out.flex_wh) && r.i64(out.cost);
    }
};

struct FlexSelection {
    std::int64_t target_wh = 0;
    bool feasible = false;
    bool optimal = false;  // false when the greedy fallback produced the answer
    std::vector<std::uint64_t> chosen;  // candidate ids, ascending
    std::int64_t total_wh = 0;
    std::int64_t total_cost = 0;

    bool operator==(const FlexSelection&) const = default;

    void encode(ByteWriter& w) const {
        w.i64(target_wh);
        w.u8(feasible ? 1 : 0);
        w.u8(optimal ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(chosen.size()));
        for (auto id : chosen) w.u64(id);
        w.i64(total_wh);
        w.i64(total_cost);
    }
    static bool decode(ByteReader& r, FlexSelection& out) {
        std::uint8_t feasible, optimal;
        std::uint32_t n;
        if (!r.i64(out.target_wh) || !r.u8(feasible) || feasible > 1 || !r.u8(optimal) ||
            optimal > 1 || !r.u32(n) || n > 65536)
            return false;
        out.feasible = feasible;
        out.optimal = optimal;
        out.chosen.resize(n);
        for (auto& id : out.chosen)
            if (!r.u64(id)) return false;
        return r.i64(out.total_wh) && r.i64(out.total_cost);
    }
};

// Exact-DP size limits: past either one the solver degrades to greedy and
// says so in the result instead of silently burning memory.
inline constexpr std::int64_t kFlexExactMaxTotalWh = 1'000'000;
inline constexpr std::int64_t kFlexExactMaxTableEntries = 20'000'000;

namespace flex_detail {

struct DpValue {
    std::int64_t cost = std::numeric_limits<std::int64_t>::max();
    std::int64_t wh = std::numeric_limits<std::int64_t>::max();

    bool operator==(const DpValue&) const = default;
    bool operator<(const DpValue& other) const {
        return cost != other.cost ? cost < other.cost : wh < other.wh;
    }
    bool reachable() const { return cost != std::numeric_limits<std::int64_t>::max(); }
};

inline DpValue plus(const DpValue& v, std::int64_t cost, std::int64_t wh) {
    if (!v.reachable()) return v;
    return {v.cost + cost, v.wh + wh};
}

// Minimum-cost cover by dynamic programming over "coverage so far, clamped
// to the target". A full suffix table is kept because reconstruction wants
// the optimum of every tail subproblem: choosing greedily from the lowest
// id, an item is included exactly when the include branch still attains the
// tail's optimum, which yields the lexicographically smallest id set among
// (cost, then total-Wh) optima.
inline FlexSelection solve_exact(std::vector<FlexCandidate> items, std::int64_t target) {
    std::sort(items.begin(), items.end(),
              [](const FlexCandidate& a, const FlexCandidate& b) { return a.id < b.id; });
    const std::size_t n = items.size();
    const std::size_t width = static_cast<std::size_t>(target) + 1;
    std::vector<std::vector<DpValue>> dp(n + 1, std::vector<DpValue>(width));

    for (std::size_t w = 0; w < width; ++w)
        dp[n][w] = w == static_cast<std::size_t>(target) ? DpValue{0, 0}
                                                         : DpValue{};
    // dp[i][w]: best (cost, added Wh) over items i.. to lift coverage w up
    // to the target. Coverage is clamped so the table stays target-wide.
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t w = 0; w < width; ++w) {
            const std::size_t lifted =
                std::min<std::size_t>(width - 1, w + static_cast<std::size_t>(items[i].flex_wh));
            const DpValue skip = dp[i + 1][w];
            const DpValue take = plus(dp[i + 1][lifted], items[i].cost, items[i].flex_wh);
            dp[i][w] = std::min(skip, take);
        }
    }

    FlexSelection out;
    if (!dp[0][0].reachable()) return out;
    out.feasible = true;
    out.optimal = true;
    out.total_cost = dp[0][0].cost;
    out.total_wh = dp[0][0].wh;
    std::size_t w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lifted =
            std::min<std::size_t>(width - 1, w + static_cast<std::size_t>(items[i].flex_wh));
        const DpValue take = plus(dp[i + 1][lifted], items[i].cost, items[i].flex_wh);
        if (take == dp[i][w]) {
            out.chosen.push_back(items[i].id);
            w = lifted;
        }
    }
    return out;
}

// Greedy fallback for over-sized instances: cheapest energy first.
inline FlexSelection solve_greedy(std::vector<FlexCandidate> items, std::int64_t target) {
    std::sort(items.begin(), items.end(), [](const FlexCandidate& a, const FlexCandidate& b) {
        const __int128 lhs = static_cast<__int128>(a.cost) * b.flex_wh;
        const __int128 rhs = static_cast<__int128>(b.cost) * a.flex_wh;
        if (lhs != rhs) return lhs < rhs;
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.id < b.id;
    });
    FlexSelection out;
    out.feasible = true;
    std::int64_t covered = 0;
    for (const auto& item : items) {
        if (covered >= target) break;
        out.chosen.push_back(item.id);
        covered += item.flex_wh;
        out.total_wh += item.flex_wh;
        out.total_cost += item.cost;
    }
    std::sort(out.chosen.begin(), out.chosen.end());
    return out;
}

}  // namespace flex_detail

// Minimum-cost subset whose flexibility covers `target_wh`. Ties go to the
// smaller total energy, then to the lexicographically smallest id set.
inline FlexSelection select_flexibility(const std::vector<FlexCandidate>& candidates,
                                        std::int64_t target_wh) {
    FlexSelection out;
    out.target_wh = target_wh;
    if (target_wh <= 0) {
        out.feasible = true;
        out.optimal = true;
        return out;
    }
    std::int64_t total_available = 0;
    for (const auto& c : candidates) {
        if (c.flex_wh <= 0 || c.cost < 0) return out;  // infeasible: malformed candidate
        total_available += c.flex_wh;
    }
    if (total_available < target_wh) return out;

    const std::int64_t table_entries =
        static_cast<std::int64_t>(candidates.size() + 1) * (target_wh + 1);
    FlexSelection solved =
        (total_available <= kFlexExactMaxTotalWh && table_entries <= kFlexExactMaxTableEntries)
            ? flex_detail::solve_exact(candidates, target_wh)
            : flex_detail::solve_greedy(candidates, target_wh);
    solved.target_wh = target_wh;
    return solved;
}

}  // namespace gridchain
