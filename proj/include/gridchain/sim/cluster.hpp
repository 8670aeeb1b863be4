#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gridchain/ledger/bus.hpp"
#include "gridchain/ledger/chain.hpp"
#include "gridchain/ledger/node.hpp"

namespace gridchain {

// A set of validator nodes wired through one message bus. Per tick, nodes
// run in id order and messages drain to a fixpoint, so zero-delay traffic
// settles within the tick and the whole schedule is a pure function of
// (inputs, bus seed).
class Cluster {
  public:
    Cluster(std::vector<KeyPair> validator_keys, std::uint64_t block_interval_ticks,
            BusParams bus_params, std::uint64_t bus_seed)
        : bus_(bus_params, bus_seed) {
        ctx_.block_interval_ticks = block_interval_ticks;
        ctx_.node_count = static_cast<int>(validator_keys.size());
        for (auto& key : validator_keys) ctx_.vset.validators.push_back(address_of(key.public_key));
        for (std::size_t i = 0; i < validator_keys.size(); ++i) {
            NodeState node;
            node.id = static_cast<int>(i);
            node.validator_key = std::move(validator_keys[i]);
            nodes_.push_back(std::move(node));
        }
    }

    // Client attachment: deliver a transaction to one node, same tick, no loss.
    void submit_tx(int node, std::uint64_t tick, Transaction tx) {
        bus_.send_local(node, tick, TxSubmit{std::move(tx)});
    }

    void step(std::uint64_t tick) {
        bool first_pass = true;
        while (true) {
            auto due = bus_.take_due(tick);
            if (due.empty() && !first_pass) break;
            std::vector<std::vector<NodeMessage>> inboxes(nodes_.size());
            for (auto& m : due)
                if (m.to >= 0 && m.to < static_cast<int>(nodes_.size()))
                    inboxes[m.to].push_back(std::move(m));
            for (auto& node : nodes_) {
                if (!first_pass && inboxes[node.id].empty()) continue;
                auto out = node_step(node, ctx_, inboxes[node.id], tick);
                for (auto& o : out) bus_.send(node.id, o.to, tick, std::move(o.body));
            }
            first_pass = false;
        }
    }

    const Chain& chain(int node = 0) const { return nodes_[node].chain; }
    const NodeState& node(int i) const { return nodes_[i]; }
    std::size_t size() const { return nodes_.size(); }
    const ValidatorSet& validator_set() const { return ctx_.vset; }
    std::uint64_t dropped_messages() const { return bus_.dropped_count(); }

    bool converged() const {
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            if (nodes_[i].chain.height() != nodes_[0].chain.height()) return false;
            if (nodes_[i].chain.tip().hash() != nodes_[0].chain.tip().hash()) return false;
        }
        return true;
    }

  private:
    NodeContext ctx_;
    std::vector<NodeState> nodes_;
    MessageBus bus_;
};

}  // namespace gridchain
