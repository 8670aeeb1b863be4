#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <variant>
#include <vector>

#include "gridchain/common.hpp"
#include "gridchain/ledger/block.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

struct TxSubmit {
    Transaction tx;
};

struct BlockAnnounce {
    Block block;
};

struct ChainRequest {
    std::uint64_t from_height = 0;
};

struct ChainResponse {
    std::vector<Block> blocks;
};

using MessageBody = std::variant<TxSubmit, BlockAnnounce, ChainRequest, ChainResponse>;

inline constexpr int kClientSender = -1;

struct NodeMessage {
    int from = kClientSender;  // node id, or kClientSender for attached clients
    int to = 0;
    std::uint64_t deliver_at_tick = 0;
    std::uint64_t seq = 0;  // global send order; the deterministic tie-break
    MessageBody body;
};

struct BusParams {
    std::uint64_t base_delay_ticks = 0;
    std::uint64_t jitter_ticks = 0;   // uniform extra delay in [0, jitter]
    std::uint32_t drop_permille = 0;  // inter-node loss rate
};

// Simulated network. Delivery order is a pure function of send order and the
// seeded RNG, so every run schedules messages identically.
class MessageBus {
  public:
    MessageBus(BusParams params, std::uint64_t seed) : params_(params), rng_(seed) {}

    // Inter-node path: subject to delay, jitter, and loss.
    void send(int from, int to, std::uint64_t now, MessageBody body) {
        std::uint64_t delay = params_.base_delay_ticks;
        if (params_.jitter_ticks > 0) delay += rng_.below(params_.jitter_ticks + 1);
        const bool dropped =
            params_.drop_permille > 0 && rng_.below(1000) < params_.drop_permille;
        if (dropped) {
            ++dropped_count_;
            return;
        }
        queue_.push_back(NodeMessage{from, to, now + delay, next_seq_++, std::move(body)});
    }

    // Client attachment path: a process co-located with its node, so no
    // delay and no loss; consumes no randomness.
    void send_local(int to, std::uint64_t now, MessageBody body) {
        queue_.push_back(NodeMessage{kClientSender, to, now, next_seq_++, std::move(body)});
    }

    // All messages due at or before `tick`, in (deliver_at, seq) order.
    std::vector<NodeMessage> take_due(std::uint64_t tick) {
        std::vector<NodeMessage> due;
        std::deque<NodeMessage> rest;
        for (auto& m : queue_) {
            if (m.deliver_at_tick <= tick)
                due.push_back(std::move(m));
            else
                rest.push_back(std::move(m));
        }
        queue_ = std::move(rest);
        std::sort(due.begin(), due.end(), [](const NodeMessage& a, const NodeMessage& b) {
            return a.deliver_at_tick != b.deliver_at_tick ? a.deliver_at_tick < b.deliver_at_tick
                                                          : a.seq < b.seq;
        });
        return due;
    }

    bool idle_at(std::uint64_t tick) const {
        for (const auto& m : queue_)
            if (m.deliver_at_tick <= tick) return false;
        return true;
    }

    std::uint64_t dropped_count() const { return dropped_count_; }

  private:
    BusParams params_;
    SplitMix64 rng_;
    std::deque<NodeMessage> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dropped_count_ = 0;
};

}  // namespace gridchain
