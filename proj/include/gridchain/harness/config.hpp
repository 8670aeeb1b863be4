#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/crypto.hpp"
#include "gridchain/ledger/bus.hpp"
#include "gridchain/oracle/coalition.hpp"
#include "gridchain/sim/prosumer.hpp"
#include "gridchain/sim/traces.hpp"

namespace gridchain {

enum class Scenario { DemandResponse, Trading, Aggregation, All };

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::DemandResponse: return "dr";
        case Scenario::Trading: return "p2p";
        case Scenario::Aggregation: return "vpp";
        case Scenario::All: return "all";
    }
    return "?";
}

inline std::optional<Scenario> scenario_from_name(std::string_view name) {
    if (name == "dr") return Scenario::DemandResponse;
    if (name == "p2p") return Scenario::Trading;
    if (name == "vpp") return Scenario::Aggregation;
    if (name == "all") return Scenario::All;
    return std::nullopt;
}

struct CongestionEvent {
    std::uint64_t tick = 0;
    std::string congestion_point;
    std::int64_t required_flex_wh = 0;
};

struct VppServiceEvent {
    std::uint64_t tick = 0;
    VppServiceSpec spec;
};

struct DrParams {
    std::uint64_t lead_slots = 6;
    std::uint64_t window_slots = 2;
    std::int64_t penalty_rate = 100;
    std::uint64_t settle_margin_slots = 3;
};

struct VppParams {
    std::uint64_t lead_slots = 6;
    std::uint64_t settle_margin_slots = 3;
};

struct SimConfig {
    Scenario scenario = Scenario::All;
    std::uint64_t slots_per_day = 24;
    std::uint64_t days = 7;
    std::uint64_t validators = 4;
    std::uint64_t block_interval_ticks = 1;
    BusParams message;
    std::uint64_t order_lead_slots = 4;
    DrParams dr;
    VppParams vpp;
    std::vector<CongestionEvent> congestion_events;
    std::vector<VppServiceEvent> vpp_services;
    std::string traces_csv;  // relative to the config file's directory
    std::vector<ProsumerConfig> prosumers;

    bool trading_enabled() const {
        return scenario == Scenario::Trading || scenario == Scenario::All;
    }
    bool dr_enabled() const {
        return scenario == Scenario::DemandResponse || scenario == Scenario::All;
    }
    bool aggregation_enabled() const {
        return scenario == Scenario::Aggregation || scenario == Scenario::All;
    }

    // Worst-case one-way message latency between nodes.
    std::uint64_t max_delay() const { return message.base_delay_ticks + message.jitter_ticks; }
    // Submission-to-commit bound, assuming the transaction gossips in time.
    std::uint64_t commit_lag() const { return max_delay() + block_interval_ticks; }
    // Commit-to-visible bound for an actor polling a node's chain.
    std::uint64_t visible_after() const { return commit_lag() + max_delay() + 1; }

    // Ticks of runway before the first metered slot: contract deployments
    // settle in the first window, asset registrations in the second.
    std::uint64_t setup_ticks() const { return 2 * visible_after() + 1; }

    // Metered slots start on a day boundary so slot-of-day indexing (and with
    // it every day-periodic baseline) is unaffected by the runway.
    std::uint64_t first_slot() const {
        const std::uint64_t daysup = (setup_ticks() + slots_per_day - 1) / slots_per_day;
        return slots_per_day * (daysup == 0 ? 1 : daysup);
    }
    std::uint64_t end_slot() const { return first_slot() + slots_per_day * days; }

    std::uint64_t total_ticks() const {
        const std::uint64_t margin =
            std::max(dr.settle_margin_slots, vpp.settle_margin_slots);
        return end_slot() + margin + commit_lag() + visible_after() + 2;
    }

    SimSchedule schedule() const {
        SimSchedule s;
        s.first_slot = first_slot();
        s.end_slot = end_slot();
        s.order_lead_slots = order_lead_slots;
        s.trade = trading_enabled();
        s.dr = dr_enabled() || aggregation_enabled();
        s.vpp = aggregation_enabled();
        return s;
    }
};

struct ConfigLoadResult {
    bool ok = false;
    std::string error;
    SimConfig config;
};

namespace config_detail {

using nlohmann::json;

inline bool get_u64(const json& j, const char* key, std::uint64_t& out, std::string& err,
                    bool required = true) {
    if (!j.contains(key)) {
        if (required) err = std::string(key) + " is required";
        return !required;
    }
    const auto& v = j.at(key);
    if (v.is_number_unsigned()) {
        out = v.get<std::uint64_t>();
        return true;
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        out = static_cast<std::uint64_t>(v.get<std::int64_t>());
        return true;
    }
    err = std::string(key) + " must be a non-negative integer";
    return false;
}

inline bool get_i64(const json& j, const char* key, std::int64_t& out, std::string& err,
                    bool required = true) {
    if (!j.contains(key)) {
        if (required) err = std::string(key) + " is required";
        return !required;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
        err = std::string(key) + " must be an integer";
        return false;
    }
    out = v.get<std::int64_t>();
    return true;
}

inline bool get_str(const json& j, const char* key, std::string& out, std::string& err,
                    bool required = true) {
    if (!j.contains(key)) {
        if (required) err = std::string(key) + " is required";
        return !required;
    }
    const auto& v = j.at(key);
    if (!v.is_string()) {
        err = std::string(key) + " must be a string";
        return false;
    }
    out = v.get<std::string>();
    return true;
}

}  // namespace config_detail

// Parses the run configuration document. Field errors name the offending
// key; cross-field checks (timing bounds, event windows, trace coverage)
// run after the shape checks so their messages can assume sane values.
inline ConfigLoadResult parse_config(const nlohmann::json& j) {
    using config_detail::get_i64;
    using config_detail::get_str;
    using config_detail::get_u64;

    ConfigLoadResult result;
    auto fail = [&](std::string why) {
        result.error = std::move(why);
        return result;
    };
    if (!j.is_object()) return fail("config root must be an object");

    SimConfig& cfg = result.config;
    std::string err;

    std::string scenario;
    if (!get_str(j, "scenario", scenario, err)) return fail(err);
    const auto parsed_scenario = scenario_from_name(scenario);
    if (!parsed_scenario) return fail("scenario must be one of dr, p2p, vpp, all");
    cfg.scenario = *parsed_scenario;

    if (!get_u64(j, "slots_per_day", cfg.slots_per_day, err)) return fail(err);
    if (!get_u64(j, "days", cfg.days, err)) return fail(err);
    if (!get_u64(j, "validators", cfg.validators, err)) return fail(err);
    if (!get_u64(j, "block_interval_ticks", cfg.block_interval_ticks, err, false))
        return fail(err);
    if (!get_u64(j, "order_lead_slots", cfg.order_lead_slots, err, false)) return fail(err);
    if (!get_str(j, "traces_csv", cfg.traces_csv, err)) return fail(err);

    if (cfg.slots_per_day == 0) return fail("slots_per_day must be positive");
    if (cfg.days == 0) return fail("days must be positive");
    if (cfg.validators == 0) return fail("validators must be positive");
    if (cfg.validators > 64) return fail("validators must be at most 64");
    if (cfg.block_interval_ticks == 0) return fail("block_interval_ticks must be positive");

    if (j.contains("message")) {
        const auto& m = j.at("message");
        if (!m.is_object()) return fail("message must be an object");
        std::uint64_t v = 0;
        if (!get_u64(m, "delay_ticks", v, err, false)) return fail(err);
        cfg.message.base_delay_ticks = v;
        v = 0;
        if (!get_u64(m, "jitter_ticks", v, err, false)) return fail(err);
        cfg.message.jitter_ticks = v;
        v = 0;
        if (!get_u64(m, "drop_permille", v, err, false)) return fail(err);
        if (v >= 1000) return fail("message.drop_permille must be below 1000");
        cfg.message.drop_permille = static_cast<std::uint32_t>(v);
    }

    if (j.contains("dr")) {
        const auto& d = j.at("dr");
        if (!d.is_object()) return fail("dr must be an object");
        if (!get_u64(d, "lead_slots", cfg.dr.lead_slots, err, false)) return fail(err);
        if (!get_u64(d, "window_slots", cfg.dr.window_slots, err, false)) return fail(err);
        if (!get_i64(d, "penalty_rate", cfg.dr.penalty_rate, err, false)) return fail(err);
        if (!get_u64(d, "settle_margin_slots", cfg.dr.settle_margin_slots, err, false))
            return fail(err);
    }
    if (j.contains("vpp")) {
        const auto& v = j.at("vpp");
        if (!v.is_object()) return fail("vpp must be an object");
        if (!get_u64(v, "lead_slots", cfg.vpp.lead_slots, err, false)) return fail(err);
        if (!get_u64(v, "settle_margin_slots", cfg.vpp.settle_margin_slots, err, false))
            return fail(err);
    }

    if (j.contains("congestion_events")) {
        const auto& events = j.at("congestion_events");
        if (!events.is_array()) return fail("congestion_events must be an array");
        for (const auto& e : events) {
            if (!e.is_object()) return fail("congestion_events entries must be objects");
            CongestionEvent ev;
            if (!get_u64(e, "tick", ev.tick, err)) return fail(err);
            if (!get_str(e, "congestion_point", ev.congestion_point, err)) return fail(err);
            if (!get_i64(e, "required_flex_wh", ev.required_flex_wh, err)) return fail(err);
            if (ev.required_flex_wh <= 0) return fail("required_flex_wh must be positive");
            cfg.congestion_events.push_back(std::move(ev));
        }
    }

    if (j.contains("vpp_services")) {
        const auto& services = j.at("vpp_services");
        if (!services.is_array()) return fail("vpp_services must be an array");
        for (const auto& e : services) {
            if (!e.is_object()) return fail("vpp_services entries must be objects");
            VppServiceEvent ev;
            if (!get_u64(e, "tick", ev.tick, err)) return fail(err);
            if (!get_i64(e, "capacity_wh_per_slot", ev.spec.capacity_wh_per_slot, err))
                return fail(err);
            if (!get_u64(e, "max_response_slots", ev.spec.max_response_slots, err))
                return fail(err);
            if (!get_u64(e, "dispatch_slots", ev.spec.dispatch_slots, err)) return fail(err);
            if (!get_i64(e, "price_rate", ev.spec.price_rate, err)) return fail(err);
            if (!get_i64(e, "penalty_rate", ev.spec.penalty_rate, err)) return fail(err);
            if (!get_str(e, "band", ev.spec.band, err, false)) return fail(err);
            if (ev.spec.capacity_wh_per_slot <= 0)
                return fail("capacity_wh_per_slot must be positive");
            if (ev.spec.dispatch_slots == 0) return fail("dispatch_slots must be positive");
            cfg.vpp_services.push_back(std::move(ev));
        }
    }

    if (!j.contains("prosumers") || !j.at("prosumers").is_array() || j.at("prosumers").empty())
        return fail("prosumers must be a non-empty array");
    for (const auto& p : j.at("prosumers")) {
        if (!p.is_object()) return fail("prosumers entries must be objects");
        ProsumerConfig pc;
        if (!get_u64(p, "id", pc.id, err)) return fail(err);
        if (!get_i64(p, "bid_price", pc.bid_price, err)) return fail(err);
        if (!get_i64(p, "ask_price", pc.ask_price, err)) return fail(err);
        std::uint64_t compliance = 1000;
        if (!get_u64(p, "dr_compliance_milli", compliance, err, false)) return fail(err);
        if (compliance > 1000) return fail("dr_compliance_milli must be at most 1000");
        pc.dr_compliance_milli = static_cast<std::uint32_t>(compliance);
        if (!get_i64(p, "flex_capacity_wh", pc.flex_capacity_wh, err, false)) return fail(err);
        if (!get_i64(p, "flex_cost_rate", pc.flex_cost_rate, err, false)) return fail(err);
        if (pc.flex_capacity_wh < 0) return fail("flex_capacity_wh must not be negative");
        if (pc.flex_cost_rate < 0) return fail("flex_cost_rate must not be negative");
        if (pc.bid_price <= 0 || pc.ask_price <= 0)
            return fail("bid_price and ask_price must be positive");
        if (p.contains("asset")) {
            const auto& a = p.at("asset");
            if (!a.is_object()) return fail("asset must be an object");
            if (!get_i64(a, "capacity_wh_per_slot", pc.asset.capacity_wh_per_slot, err))
                return fail(err);
            if (!get_u64(a, "response_time_slots", pc.asset.response_time_slots, err))
                return fail(err);
            if (!get_u64(a, "sync_time_slots", pc.asset.sync_time_slots, err)) return fail(err);
            if (!get_u64(a, "max_dispatch_slots", pc.asset.max_dispatch_slots, err))
                return fail(err);
            if (!get_str(a, "band", pc.asset.band, err, false)) return fail(err);
            if (!get_i64(a, "cost_rate", pc.asset.cost_rate, err)) return fail(err);
            if (pc.asset.capacity_wh_per_slot <= 0)
                return fail("asset.capacity_wh_per_slot must be positive");
            if (pc.asset.cost_rate < 0) return fail("asset.cost_rate must not be negative");
        }
        for (const auto& other : result.config.prosumers)
            if (other.id == pc.id)
                return fail("duplicate prosumer id " + std::to_string(pc.id));
        cfg.prosumers.push_back(std::move(pc));
    }

    // Timing floors. Each bound is the worst-case number of ticks for the
    // submissions, commits, and oracle round trips that must land before the
    // slot or window in question.
    const std::uint64_t d = cfg.max_delay();
    const std::uint64_t i = cfg.block_interval_ticks;
    if (cfg.order_lead_slots < 2 * (d + i) + 2)
        return fail("order_lead_slots must be at least " + std::to_string(2 * (d + i) + 2) +
                    " for this network latency");
    const std::uint64_t issue_lead_floor = 4 * d + 3 * i + 3;
    if (cfg.dr.lead_slots < issue_lead_floor)
        return fail("dr.lead_slots must be at least " + std::to_string(issue_lead_floor) +
                    " for this network latency");
    if (cfg.vpp.lead_slots < issue_lead_floor)
        return fail("vpp.lead_slots must be at least " + std::to_string(issue_lead_floor) +
                    " for this network latency");
    const std::uint64_t margin_floor = 2 * d + i + 2;
    if (cfg.dr.settle_margin_slots < margin_floor)
        return fail("dr.settle_margin_slots must be at least " + std::to_string(margin_floor) +
                    " for this network latency");
    if (cfg.vpp.settle_margin_slots < margin_floor)
        return fail("vpp.settle_margin_slots must be at least " + std::to_string(margin_floor) +
                    " for this network latency");
    if (cfg.dr.window_slots == 0) return fail("dr.window_slots must be positive");

    const std::uint64_t first = cfg.first_slot();
    const std::uint64_t end = cfg.end_slot();
    for (const auto& ev : cfg.congestion_events) {
        if (ev.tick < cfg.setup_ticks())
            return fail("congestion event at tick " + std::to_string(ev.tick) +
                        " fires before contracts can be in place (tick " +
                        std::to_string(cfg.setup_ticks()) + ")");
        const std::uint64_t start = ev.tick + cfg.dr.lead_slots;
        if (start < first || start + cfg.dr.window_slots > end)
            return fail("congestion event at tick " + std::to_string(ev.tick) +
                        " needs window [" + std::to_string(start) + ", " +
                        std::to_string(start + cfg.dr.window_slots) +
                        ") outside the metered slots [" + std::to_string(first) + ", " +
                        std::to_string(end) + ")");
    }
    for (const auto& ev : cfg.vpp_services) {
        if (ev.tick < cfg.setup_ticks())
            return fail("vpp service at tick " + std::to_string(ev.tick) +
                        " fires before assets can be registered (tick " +
                        std::to_string(cfg.setup_ticks()) + ")");
        const std::uint64_t start = ev.tick + cfg.vpp.lead_slots;
        if (start < first || start + ev.spec.dispatch_slots > end)
            return fail("vpp service at tick " + std::to_string(ev.tick) + " needs window [" +
                        std::to_string(start) + ", " +
                        std::to_string(start + ev.spec.dispatch_slots) +
                        ") outside the metered slots [" + std::to_string(first) + ", " +
                        std::to_string(end) + ")");
    }

    result.ok = true;
    return result;
}

// Loads the config document and its trace file, wiring each prosumer's
// series in place. Trace paths resolve relative to the config file.
inline ConfigLoadResult load_config(const std::filesystem::path& path) {
    ConfigLoadResult result;
    std::ifstream in(path);
    if (!in) {
        result.error = "cannot open config file: " + path.string();
        return result;
    }
    const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        result.error = "config is not valid JSON: " + path.string();
        return result;
    }
    result = parse_config(j);
    if (!result.ok) return result;

    std::filesystem::path traces_path(result.config.traces_csv);
    if (traces_path.is_relative()) traces_path = path.parent_path() / traces_path;
    auto traces = load_traces(traces_path);
    if (!traces.ok) {
        result.ok = false;
        result.error = traces.error;
        return result;
    }
    const std::uint64_t needed = result.config.slots_per_day * result.config.days;
    if (traces.traces.slots != needed) {
        result.ok = false;
        result.error = "trace file has " + std::to_string(traces.traces.slots) +
                       " slots per prosumer, config needs " + std::to_string(needed);
        return result;
    }
    for (auto& pc : result.config.prosumers) {
        const TraceSeries* series = traces.traces.find(pc.id);
        if (series == nullptr) {
            result.ok = false;
            result.error = "trace file has no rows for prosumer " + std::to_string(pc.id);
            return result;
        }
        pc.consumption_wh = series->consumption_wh;
        pc.generation_wh = series->generation_wh;
    }
    return result;
}

// Deterministic per-role key material: every account in a run is a pure
// function of the run seed, so rerunning a seed reproduces all addresses.
inline Seed derive_seed(std::uint64_t run_seed, std::string_view role, std::uint64_t index = 0) {
    ByteWriter w;
    w.u64(run_seed);
    w.var_bytes(Bytes(role.begin(), role.end()));
    w.u64(index);
    return sha256(with_domain("gc.seed.v1:", std::move(w).take()));
}

}  // namespace gridchain
