// Command line front end: run a scripted simulation, verify or audit a
// ledger file, evaluate one oracle service on explicit inputs, or generate
// synthetic consumption traces.
//
// Exit codes: 0 success, 1 a verification or audit failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gridchain/harness/audit.hpp"
#include "gridchain/harness/config.hpp"
#include "gridchain/harness/report.hpp"
#include "gridchain/harness/run.hpp"
#include "gridchain/harness/verify.hpp"
#include "gridchain/oracle/clearing.hpp"
#include "gridchain/oracle/coalition.hpp"
#include "gridchain/oracle/flex.hpp"
#include "gridchain/oracle/forecast.hpp"

namespace {

using nlohmann::json;

int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
    const gridchain::ConfigLoadResult loaded = gridchain::load_config(config_path);
    if (!loaded.ok) {
        std::cerr << "config error: " << loaded.error << "\n";
        return 2;
    }

    const gridchain::RunOutput out = gridchain::run_simulation(loaded.config, seed);
    if (!out.ok) {
        std::cerr << "run error: " << out.error << "\n";
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory " << out_dir << ": " << ec.message() << "\n";
        return 2;
    }
    const std::filesystem::path dir(out_dir);
    const auto ledger_path = dir / "ledger.bin";
    const auto genesis_path = dir / "genesis.json";
    if (!gridchain::write_ledger(ledger_path, out.chain.blocks) ||
        !gridchain::write_genesis(genesis_path, out.genesis)) {
        std::cerr << "cannot write ledger outputs under " << out_dir << "\n";
        return 2;
    }

    const gridchain::RunReport report = gridchain::build_report(loaded.config, seed, out);
    {
        std::ofstream f(dir / "report.json", std::ios::binary | std::ios::trunc);
        f << gridchain::report_to_json(report).dump(2) << "\n";
    }
    {
        std::ofstream f(dir / "earnings.csv", std::ios::binary | std::ios::trunc);
        f << gridchain::earnings_csv(report);
    }

    std::cout << "scenario " << report.scenario << "  seed " << seed << "\n"
              << "height " << report.height << "  ticks " << report.ticks << "  converged "
              << (report.converged ? "yes" : "no") << "  dropped " << report.dropped_messages
              << "\n"
              << "txs " << report.total_txs << " (" << report.failed_txs << " failed)  trades "
              << report.trades << "  dr settlements " << report.dr_settlements
              << "  vpp settlements " << report.vpp_settlements << "\n"
              << "conservation " << (report.conservation.balanced() ? "balanced" : "BROKEN")
              << "  mirrors " << (report.mirrors_match() ? "consistent" : "INCONSISTENT") << "\n"
              << "wrote " << ledger_path.string() << ", " << genesis_path.string() << ", "
              << (dir / "report.json").string() << ", " << (dir / "earnings.csv").string() << "\n";

    if (!report.converged) {
        std::cerr << "run error: validators did not converge on the recorded tip\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const std::string& ledger_path, const std::string& genesis_path) {
    const gridchain::VerifyResult r = gridchain::verify_ledger_file(ledger_path, genesis_path);
    if (r.ok) {
        std::cout << "ok: height " << r.height << ", " << r.tx_count << " transactions, state root "
                  << r.tip_root_hex << "\n";
        return 0;
    }
    std::cout << "verification failed: " << r.error << "\n";
    if (r.failed_height) std::cout << "first bad height: " << *r.failed_height << "\n";
    return 1;
}

int cmd_audit(const std::string& ledger_path) {
    const auto ledger = gridchain::read_ledger(ledger_path);
    if (!ledger) {
        std::cerr << "cannot read ledger: " << ledger_path << "\n";
        return 2;
    }
    if (ledger->framing_error) {
        std::cout << "audit failed: " << *ledger->framing_error << "\n";
        return 1;
    }
    const gridchain::AuditReport rep = gridchain::audit_ledger(ledger->blocks);
    std::cout << gridchain::audit_report_to_json(rep).dump(2) << "\n";
    return rep.ok ? 0 : 1;
}

json selection_to_json(const gridchain::FlexSelection& s) {
    return {{"ok", true},          {"target_wh", s.target_wh},
            {"feasible", s.feasible}, {"optimal", s.optimal},
            {"chosen", s.chosen},  {"total_wh", s.total_wh},
            {"total_cost", s.total_cost}};
}

int eval_forecast(const json& in) {
    std::map<std::uint64_t, std::int64_t> history;
    for (const auto& [key, value] : in.at("history").items())
        history[std::stoull(key)] = value.get<std::int64_t>();
    const std::string horizon = in.at("horizon").get<std::string>();
    if (horizon != "day-ahead" && horizon != "intra-day") {
        std::cerr << "horizon must be day-ahead or intra-day\n";
        return 2;
    }
    const gridchain::ForecastResult r =
        gridchain::forecast(history,
                            horizon == "day-ahead" ? gridchain::ForecastHorizon::DayAhead
                                                   : gridchain::ForecastHorizon::IntraDay,
                            in.at("from_slot").get<std::uint64_t>());
    json out{{"ok", r.ok}};
    if (r.ok) {
        out["from_slot"] = r.from_slot;
        out["values"] = r.values;
    } else {
        out["error"] = r.error;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int eval_clear(const json& in) {
    const std::uint64_t slot = in.at("slot").get<std::uint64_t>();
    std::vector<gridchain::Order> bids, offers;
    std::uint64_t next_id = 0;
    for (const auto& item : in.at("orders")) {
        gridchain::Order o;
        const std::string side = item.at("side").get<std::string>();
        if (side != "bid" && side != "offer") {
            std::cerr << "order side must be bid or offer\n";
            return 2;
        }
        o.side = side == "bid" ? gridchain::OrderSide::Bid : gridchain::OrderSide::Offer;
        o.id = item.contains("id") ? item.at("id").get<std::uint64_t>() : next_id;
        next_id = o.id + 1;
        o.qty_wh = item.at("qty_wh").get<std::int64_t>();
        o.limit_price = item.at("limit_price").get<std::int64_t>();
        o.slot = slot;
        (o.side == gridchain::OrderSide::Bid ? bids : offers).push_back(std::move(o));
    }
    const gridchain::ClearingResult r = gridchain::clear_market(bids, offers, slot);
    json matches = json::array();
    for (const auto& m : r.matches)
        matches.push_back({{"bid_id", m.bid_id}, {"offer_id", m.offer_id}, {"qty_wh", m.qty_wh}});
    std::cout << json{{"ok", true},
                      {"slot", r.slot},
                      {"clearing_price", r.clearing_price},
                      {"total_qty_wh", r.total_qty_wh},
                      {"matches", matches}}
                     .dump(2)
              << "\n";
    return 0;
}

int eval_flex(const json& in) {
    std::vector<gridchain::FlexCandidate> candidates;
    for (const auto& item : in.at("candidates"))
        candidates.push_back({item.at("id").get<std::uint64_t>(),
                              item.at("flex_wh").get<std::int64_t>(),
                              item.at("cost").get<std::int64_t>()});
    const gridchain::FlexSelection s =
        gridchain::select_flexibility(candidates, in.at("target_wh").get<std::int64_t>());
    std::cout << selection_to_json(s).dump(2) << "\n";
    return 0;
}

int eval_coalition(const json& in) {
    const json& sv = in.at("service");
    gridchain::VppServiceSpec service;
    service.capacity_wh_per_slot = sv.at("capacity_wh_per_slot").get<std::int64_t>();
    service.max_response_slots = sv.at("max_response_slots").get<std::uint64_t>();
    service.dispatch_slots = sv.at("dispatch_slots").get<std::uint64_t>();
    service.price_rate = sv.at("price_rate").get<std::int64_t>();
    service.penalty_rate = sv.at("penalty_rate").get<std::int64_t>();
    service.band = sv.value("band", std::string{});

    std::vector<gridchain::AssetRecord> assets;
    std::uint64_t next_id = 0;
    for (const auto& item : in.at("assets")) {
        gridchain::AssetRecord a;
        a.id = item.contains("id") ? item.at("id").get<std::uint64_t>() : next_id;
        next_id = a.id + 1;
        a.capacity_wh_per_slot = item.at("capacity_wh_per_slot").get<std::int64_t>();
        a.response_time_slots = item.at("response_time_slots").get<std::uint64_t>();
        a.sync_time_slots = item.value("sync_time_slots", std::uint64_t{0});
        a.max_dispatch_slots = item.at("max_dispatch_slots").get<std::uint64_t>();
        a.band = item.value("band", std::string{});
        a.cost_rate = item.at("cost_rate").get<std::int64_t>();
        assets.push_back(std::move(a));
    }

    const gridchain::CoalitionPlan plan = gridchain::form_coalition(assets, service);
    json members = json::array();
    for (const auto& m : plan.members)
        members.push_back(
            {{"asset_id", m.asset_id}, {"scheduled_wh_per_slot", m.scheduled_wh_per_slot}});
    std::cout << json{{"ok", true},
                      {"feasible", plan.feasible},
                      {"optimal", plan.optimal},
                      {"members", members},
                      {"total_scheduled_wh_per_slot", plan.total_scheduled_wh_per_slot},
                      {"total_cost", plan.total_cost}}
                     .dump(2)
              << "\n";
    return 0;
}

int cmd_oracle_eval(const std::string& service, const std::string& input_path) {
    std::ifstream f(input_path, std::ios::binary);
    if (!f) {
        std::cerr << "cannot read input: " << input_path << "\n";
        return 2;
    }
    const json in = json::parse(f, nullptr, false);
    if (in.is_discarded()) {
        std::cerr << "input is not valid JSON: " << input_path << "\n";
        return 2;
    }
    try {
        if (service == "forecast") return eval_forecast(in);
        if (service == "clear") return eval_clear(in);
        if (service == "flex") return eval_flex(in);
        return eval_coalition(in);
    } catch (const json::exception& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return 2;
    }
}

int cmd_gen_traces(std::uint64_t prosumers, std::uint64_t slots_per_day, std::uint64_t days,
                   std::uint64_t seed, const std::string& out_path) {
    const gridchain::TraceSet traces =
        gridchain::generate_traces(prosumers, slots_per_day, days, seed);
    const std::string csv = gridchain::traces_to_csv(traces);
    if (out_path.empty()) {
        std::cout << csv;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) {
        std::cerr << "cannot write " << out_path << "\n";
        return 2;
    }
    f << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic energy-community ledger toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ledger_path, genesis_path, service, input_path;
    std::string trace_out;
    std::uint64_t seed = 0, prosumers = 10, slots_per_day = 24, days = 7, trace_seed = 1;

    auto* run = app.add_subcommand("run", "simulate a scenario and write its ledger");
    run->add_option("--config", config_path, "scenario configuration (JSON)")->required();
    run->add_option("--seed", seed, "simulation seed")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "independently re-validate a ledger file");
    verify->add_option("--ledger", ledger_path, "ledger file")->required();
    verify->add_option("--genesis", genesis_path, "genesis document (JSON)")->required();

    auto* audit = app.add_subcommand("audit", "recompute every economic record in a ledger");
    audit->add_option("--ledger", ledger_path, "ledger file")->required();

    auto* oracle_eval = app.add_subcommand("oracle-eval", "evaluate one oracle service");
    oracle_eval->add_option("--service", service, "forecast | clear | flex | coalition")
        ->required()
        ->check(CLI::IsMember({"forecast", "clear", "flex", "coalition"}));
    oracle_eval->add_option("--input", input_path, "service input (JSON)")->required();

    auto* gen = app.add_subcommand("gen-traces", "generate synthetic consumption traces (CSV)");
    gen->add_option("--prosumers", prosumers, "number of prosumers");
    gen->add_option("--slots-per-day", slots_per_day, "time slots per day");
    gen->add_option("--days", days, "number of days");
    gen->add_option("--seed", trace_seed, "trace seed");
    gen->add_option("--out", trace_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(config_path, seed, out_dir);
    if (verify->parsed()) return cmd_verify(ledger_path, genesis_path);
    if (audit->parsed()) return cmd_audit(ledger_path);
    if (oracle_eval->parsed()) return cmd_oracle_eval(service, input_path);
    return cmd_gen_traces(prosumers, slots_per_day, days, trace_seed, trace_out);
}
