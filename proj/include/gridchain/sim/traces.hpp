#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gridchain/common.hpp"

namespace gridchain {

inline constexpr std::string_view kTraceCsvHeader = "prosumer_id,slot,consumption_wh,generation_wh";

// One prosumer's metered-energy input, indexed by trace slot.
struct TraceSeries {
    std::vector<std::int64_t> consumption_wh;
    std::vector<std::int64_t> generation_wh;

    std::int64_t net_wh(std::size_t slot) const {
        return consumption_wh[slot] - generation_wh[slot];
    }
    std::size_t size() const { return consumption_wh.size(); }
};

struct TraceSet {
    std::map<std::uint64_t, TraceSeries> by_prosumer;
    std::uint64_t slots = 0;  // common series length

    const TraceSeries* find(std::uint64_t prosumer) const {
        auto it = by_prosumer.find(prosumer);
        return it == by_prosumer.end() ? nullptr : &it->second;
    }
};

struct TraceLoadResult {
    bool ok = false;
    std::string error;
    TraceSet traces;
};

namespace trace_detail {

inline bool parse_u64(std::string_view field, std::uint64_t& out) {
    if (field.empty()) return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

inline bool parse_i64(std::string_view field, std::int64_t& out) {
    if (field.empty()) return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

inline std::vector<std::string_view> split_csv_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace trace_detail

// Parses and validates the full trace file: exact header, integer fields,
// non-negative energies, no duplicate (prosumer, slot), and every series
// gap-free over the same 0-based slot range.
inline TraceLoadResult parse_traces(std::string_view text) {
    TraceLoadResult result;
    auto fail = [&](std::string why) {
        result.error = std::move(why);
        return result;
    };

    std::size_t pos = 0;
    std::size_t line_no = 0;
    struct Row {
        std::int64_t consumption = 0;
        std::int64_t generation = 0;
    };
    std::map<std::uint64_t, std::map<std::uint64_t, Row>> rows;

    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;

        if (line_no == 1) {
            if (line != kTraceCsvHeader)
                return fail("line 1: expected header \"" + std::string(kTraceCsvHeader) + "\"");
            continue;
        }
        if (line.empty()) continue;

        const auto fields = trace_detail::split_csv_row(line);
        if (fields.size() != 4)
            return fail("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
        std::uint64_t prosumer, slot;
        Row row;
        if (!trace_detail::parse_u64(fields[0], prosumer))
            return fail("line " + std::to_string(line_no) + ": non-integer prosumer_id");
        if (!trace_detail::parse_u64(fields[1], slot))
            return fail("line " + std::to_string(line_no) + ": non-integer slot");
        if (!trace_detail::parse_i64(fields[2], row.consumption))
            return fail("line " + std::to_string(line_no) + ": non-integer consumption_wh");
        if (!trace_detail::parse_i64(fields[3], row.generation))
            return fail("line " + std::to_string(line_no) + ": non-integer generation_wh");
        if (row.consumption < 0)
            return fail("line " + std::to_string(line_no) + ": negative consumption_wh");
        if (row.generation < 0)
            return fail("line " + std::to_string(line_no) + ": negative generation_wh");
        if (!rows[prosumer].emplace(slot, row).second)
            return fail("duplicate row for prosumer " + std::to_string(prosumer) + ", slot " +
                        std::to_string(slot));
    }

    if (rows.empty()) return fail("no data rows");

    std::uint64_t common_len = 0;
    bool first = true;
    for (const auto& [prosumer, series] : rows) {
        const std::uint64_t len = series.rbegin()->first + 1;
        for (std::uint64_t s = 0; s < len; ++s)
            if (!series.contains(s))
                return fail("prosumer " + std::to_string(prosumer) + " missing slot " +
                            std::to_string(s));
        if (first) {
            common_len = len;
            first = false;
        } else if (len != common_len) {
            return fail("prosumer " + std::to_string(prosumer) + " has " + std::to_string(len) +
                        " slots, expected " + std::to_string(common_len));
        }
    }

    for (const auto& [prosumer, series] : rows) {
        TraceSeries out;
        out.consumption_wh.reserve(common_len);
        out.generation_wh.reserve(common_len);
        for (const auto& [slot, row] : series) {
            out.consumption_wh.push_back(row.consumption);
            out.generation_wh.push_back(row.generation);
        }
        result.traces.by_prosumer.emplace(prosumer, std::move(out));
    }
    result.traces.slots = common_len;
    result.ok = true;
    return result;
}

inline TraceLoadResult load_traces(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        TraceLoadResult result;
        result.error = "cannot open trace file: " + path.string();
        return result;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_traces(buffer.str());
}

inline std::string traces_to_csv(const TraceSet& traces) {
    std::string out(kTraceCsvHeader);
    out.push_back('\n');
    for (const auto& [prosumer, series] : traces.by_prosumer) {
        for (std::uint64_t s = 0; s < series.size(); ++s) {
            out += std::to_string(prosumer);
            out.push_back(',');
            out += std::to_string(s);
            out.push_back(',');
            out += std::to_string(series.consumption_wh[s]);
            out.push_back(',');
            out += std::to_string(series.generation_wh[s]);
            out.push_back('\n');
        }
    }
    return out;
}

// Synthetic day-periodic household profiles: a seeded base load with an
// evening peak, plus a midday solar hump for prosumers that own panels.
// Day-periodicity makes the day-0 profile an exact baseline for every day.
inline TraceSet generate_traces(std::uint64_t prosumers, std::uint64_t slots_per_day,
                                std::uint64_t days, std::uint64_t seed) {
    TraceSet traces;
    traces.slots = slots_per_day * days;
    for (std::uint64_t p = 0; p < prosumers; ++p) {
        SplitMix64 rng(seed * 1000003 + p);
        const std::int64_t base = static_cast<std::int64_t>(400 + rng.below(400));
        const std::int64_t peak = static_cast<std::int64_t>(600 + rng.below(900));
        const bool has_solar = p % 2 == 0;
        const std::int64_t solar = has_solar ? static_cast<std::int64_t>(1200 + rng.below(1800)) : 0;

        std::vector<std::int64_t> day_consumption(slots_per_day);
        std::vector<std::int64_t> day_generation(slots_per_day);
        for (std::uint64_t s = 0; s < slots_per_day; ++s) {
            const double frac = static_cast<double>(s) / static_cast<double>(slots_per_day);
            std::int64_t load = base + static_cast<std::int64_t>(rng.below(120));
            if (frac >= 0.7 && frac < 0.95) load += peak;
            day_consumption[s] = load;
            if (has_solar && frac >= 0.35 && frac < 0.65)
                day_generation[s] = solar + static_cast<std::int64_t>(rng.below(200));
            else
                day_generation[s] = 0;
        }

        TraceSeries series;
        series.consumption_wh.reserve(traces.slots);
        series.generation_wh.reserve(traces.slots);
        for (std::uint64_t d = 0; d < days; ++d) {
            series.consumption_wh.insert(series.consumption_wh.end(), day_consumption.begin(),
                                         day_consumption.end());
            series.generation_wh.insert(series.generation_wh.end(), day_generation.begin(),
                                        day_generation.end());
        }
        traces.by_prosumer.emplace(p, std::move(series));
    }
    return traces;
}

}  // namespace gridchain
