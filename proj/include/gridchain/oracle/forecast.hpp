#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridchain/common.hpp"
#include "gridchain/contracts/types.hpp"

namespace gridchain {

enum class ForecastHorizon : std::uint8_t {
    DayAhead = 0,  // 24 hourly values
    IntraDay = 1,  // 8 half-hour values
};

inline constexpr std::size_t forecast_length(ForecastHorizon h) {
    return h == ForecastHorizon::DayAhead ? 24 : 8;
}

// Seasonal period in slots: the observation one day back, at the slot
// resolution the horizon speaks (hourly vs half-hourly).
inline constexpr std::uint64_t forecast_period(ForecastHorizon h) {
    return h == ForecastHorizon::DayAhead ? 24 : 48;
}

struct ForecastResult {
    bool ok = false;
    std::string error;
    std::uint64_t from_slot = 0;
    std::vector<std::int64_t> values;
};

// Seasonal-naive prediction: value at slot t is the observed value at
// t - period. Any gap in the needed history window is an error, not a zero.
inline ForecastResult forecast(const std::map<std::uint64_t, std::int64_t>& history,
                               ForecastHorizon horizon, std::uint64_t from_slot) {
    ForecastResult out;
    out.from_slot = from_slot;
    const std::uint64_t period = forecast_period(horizon);
    const std::size_t length = forecast_length(horizon);
    for (std::size_t i = 0; i < length; ++i) {
        const std::uint64_t t = from_slot + i;
        if (t < period) {
            return {false, "insufficient history", from_slot, {}};
        }
        const auto it = history.find(t - period);
        if (it == history.end()) {
            return {false, "insufficient history", from_slot, {}};
        }
        out.values.push_back(it->second);
    }
    out.ok = true;
    return out;
}

struct BaselineResult {
    bool ok = false;
    std::string error;
    BaselineProfile profile;
    std::vector<std::uint64_t> days_used;  // ascending day index
};

// Half-open slot interval, matching contract order windows.
struct SlotWindow {
    std::uint64_t start = 0;
    std::uint64_t end = 0;

    bool overlaps_day(std::uint64_t day, std::uint64_t slots_per_day) const {
        const std::uint64_t day_start = day * slots_per_day;
        const std::uint64_t day_end = day_start + slots_per_day;
        return start < day_end && end > day_start;
    }
};

// Standard demand outside of any demand-response influence: the floored
// per-slot-of-day mean over the 3 most recent fully elapsed days that are
// complete in the history and touched by no DR window.
inline BaselineResult compute_baseline(const std::map<std::uint64_t, std::int64_t>& history,
                                       const std::vector<SlotWindow>& dr_windows,
                                       std::uint64_t slots_per_day, std::uint64_t as_of_slot) {
    BaselineResult out;
    if (slots_per_day == 0) {
        out.error = "slots_per_day must be positive";
        return out;
    }
    const std::uint64_t elapsed_days = as_of_slot / slots_per_day;

    std::vector<std::uint64_t> clean;
    for (std::uint64_t day = elapsed_days; day-- > 0 && clean.size() < 3;) {
        bool usable = true;
        for (const auto& w : dr_windows) {
            if (w.overlaps_day(day, slots_per_day)) {
                usable = false;
                break;
            }
        }
        for (std::uint64_t s = 0; usable && s < slots_per_day; ++s) {
            if (!history.count(day * slots_per_day + s)) usable = false;
        }
        if (usable) clean.push_back(day);
    }
    if (clean.size() < 3) {
        out.error = "fewer than 3 clean days of history";
        return out;
    }
    std::reverse(clean.begin(), clean.end());

    out.profile.slot_wh.assign(slots_per_day, 0);
    for (std::uint64_t s = 0; s < slots_per_day; ++s) {
        std::int64_t sum = 0;
        for (auto day : clean) sum += history.at(day * slots_per_day + s);
        out.profile.slot_wh[s] = floor_div(sum, 3);
    }
    out.days_used = clean;
    out.ok = true;
    return out;
}

}  // namespace gridchain
