#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gridchain/harness/actors.hpp"
#include "gridchain/harness/config.hpp"
#include "gridchain/ledger/ledger_file.hpp"
#include "gridchain/oracle/service.hpp"
#include "gridchain/sim/cluster.hpp"
#include "gridchain/sim/prosumer.hpp"

namespace gridchain {

struct RunOutput {
    bool ok = false;
    std::string error;
    std::uint64_t ticks = 0;
    bool converged = false;
    std::uint64_t dropped_messages = 0;
    Chain chain;  // node 0's view, post-run
    GenesisInfo genesis;
    // Role addresses for reporting and audit entry points.
    Address oracle;
    Address aggregator;
    Address market_operator;
    Address vpp_operator;
    Address dso;
    std::vector<Address> prosumer_addresses;
    std::vector<ProsumerState> prosumer_states;  // final mirrors included
    std::vector<ActorNote> notes;
};

// Executes one full scenario: derives every account from the run seed,
// builds the validator cluster, and drives prosumers, scripted actors, the
// oracle, and consensus tick by tick. Identical (config, seed) inputs walk
// an identical schedule and produce an identical chain.
inline RunOutput run_simulation(const SimConfig& cfg, std::uint64_t seed) {
    RunOutput out;

    std::vector<KeyPair> validator_keys;
    for (std::uint64_t i = 0; i < cfg.validators; ++i)
        validator_keys.push_back(create_account(derive_seed(seed, "validator", i)).first);

    OracleService oracle(create_account(derive_seed(seed, "oracle")).first);
    MarketOperator market_op(create_account(derive_seed(seed, "market-operator")).first);
    DrAggregator aggregator(create_account(derive_seed(seed, "aggregator")).first);
    VppOperator vpp_op(create_account(derive_seed(seed, "vpp-operator")).first);
    // The grid operator holds a registered identity but acts off-chain:
    // its congestion notices arrive as config events, not transactions.
    auto [dso_keys, dso_addr] = create_account(derive_seed(seed, "dso"));

    std::vector<ProsumerConfig> prosumers = cfg.prosumers;
    std::vector<ProsumerState> prosumer_states;
    const SimSchedule sched = cfg.schedule();
    for (auto& pc : prosumers) {
        pc.account_seed = derive_seed(seed, "prosumer", pc.id);
        prosumer_states.push_back(init_prosumer_state(pc, sched));
    }

    ActorEnv env;
    env.cfg = &cfg;
    env.sched = sched;
    env.oracle = oracle.address();
    for (const auto& st : prosumer_states) env.prosumers.push_back(st.address);

    out.genesis.oracle = oracle.address();
    for (const auto& key : validator_keys) {
        const Address addr = address_of(key.public_key);
        out.genesis.validator_set.validators.push_back(addr);
        out.genesis.accounts.emplace_back(addr, key.public_key);
    }
    out.genesis.accounts.emplace_back(oracle.address(), oracle.public_key());
    out.genesis.accounts.emplace_back(market_op.address(), market_op.public_key());
    out.genesis.accounts.emplace_back(aggregator.address(), aggregator.public_key());
    out.genesis.accounts.emplace_back(vpp_op.address(), vpp_op.public_key());
    out.genesis.accounts.emplace_back(dso_addr, dso_keys.public_key);
    for (std::size_t i = 0; i < prosumer_states.size(); ++i)
        out.genesis.accounts.emplace_back(prosumer_states[i].address,
                                          prosumer_states[i].keys.public_key);

    out.oracle = oracle.address();
    out.aggregator = aggregator.address();
    out.market_operator = market_op.address();
    out.vpp_operator = vpp_op.address();
    out.dso = dso_addr;
    out.prosumer_addresses = env.prosumers;

    const bool run_market = cfg.trading_enabled();
    const bool run_aggregator = cfg.dr_enabled() || cfg.aggregation_enabled();
    const bool run_vpp = cfg.aggregation_enabled();

    Cluster cluster(std::move(validator_keys), cfg.block_interval_ticks, cfg.message,
                    SplitMix64(seed ^ 0x6e7e6ac18c5f14b3ULL).next());

    const std::uint64_t total = cfg.total_ticks();
    auto submit_all = [&](std::uint64_t tick, std::vector<Transaction> txs) {
        for (auto& tx : txs) cluster.submit_tx(0, tick, std::move(tx));
    };
    for (std::uint64_t tick = 1; tick <= total; ++tick) {
        const Chain& view = cluster.chain(0);
        for (std::size_t i = 0; i < prosumers.size(); ++i)
            submit_all(tick, prosumer_step(prosumers[i], prosumer_states[i], tick, view, sched));
        if (run_market) submit_all(tick, market_op.step(tick, view, env));
        if (run_aggregator) submit_all(tick, aggregator.step(tick, view, env));
        if (run_vpp) submit_all(tick, vpp_op.step(tick, view, env));
        submit_all(tick, oracle.step(view));
        cluster.step(tick);
    }
    // Proposals never pause, so instantaneous tips lag by propagation time.
    // The meaningful end-state check is prefix agreement: after the drain,
    // every node must carry node 0's last main-loop block verbatim.
    const std::uint64_t watermark = cluster.chain(0).height();
    const Hash32 watermark_hash = cluster.chain(0).tip().hash();
    std::uint64_t tick = total;
    const std::uint64_t drain = 2 * (cfg.max_delay() + cfg.block_interval_ticks) + 2;
    for (std::uint64_t extra = 0; extra < drain; ++extra) cluster.step(++tick);

    out.ticks = tick;
    out.converged = true;
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        const Chain& c = cluster.chain(i);
        if (c.height() < watermark || c.blocks[watermark].hash() != watermark_hash)
            out.converged = false;
    }
    out.dropped_messages = cluster.dropped_messages();
    out.chain = cluster.chain(0);
    for (auto& st : prosumer_states) refresh_prosumer_mirror(st, out.chain.tip_state());
    out.prosumer_states = std::move(prosumer_states);

    auto collect = [&](const std::vector<ActorNote>& notes) {
        out.notes.insert(out.notes.end(), notes.begin(), notes.end());
    };
    if (run_market) collect(market_op.notes());
    if (run_aggregator) collect(aggregator.notes());
    if (run_vpp) collect(vpp_op.notes());

    out.ok = true;
    return out;
}

}  // namespace gridchain
