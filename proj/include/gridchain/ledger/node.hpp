#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gridchain/ledger/bus.hpp"
#include "gridchain/ledger/chain.hpp"

namespace gridchain {

inline constexpr std::size_t kChainResponseMaxBlocks = 64;

struct PoolEntry {
    Transaction tx;
    std::uint64_t arrival_tick = 0;
};

struct NodeContext {
    ValidatorSet vset;
    int node_count = 1;
    // Scheduled validators propose only on these tick boundaries; keeping the
    // interval above the worst-case delay lets every round settle first.
    std::uint64_t block_interval_ticks = 1;
};

// One simulated validator. All mutation flows through node_step; the outside
// world only ever hands it messages.
struct NodeState {
    int id = 0;
    std::optional<KeyPair> validator_key;
    Chain chain = Chain::from_genesis();
    std::map<Hash32, PoolEntry> pool;         // keyed by tx id
    std::set<Hash32> seen_txs;
    std::set<Hash32> seen_blocks;
    std::uint64_t last_proposed_tick = ~0ull;
    std::uint64_t last_sync_tick = ~0ull;
    std::uint64_t invalid_message_count = 0;

    bool is_scheduled(const NodeContext& ctx, std::uint64_t height) const {
        return validator_key &&
               ctx.vset.scheduled_for(height) == address_of(validator_key->public_key);
    }
};

struct Outgoing {
    int to = 0;
    MessageBody body;
};

namespace node_detail {

inline void broadcast(std::vector<Outgoing>& out, const NodeState& node, const NodeContext& ctx,
                      MessageBody body) {
    for (int peer = 0; peer < ctx.node_count; ++peer)
        if (peer != node.id) out.push_back({peer, body});
}

inline void prune_pool(NodeState& node) {
    std::erase_if(node.pool, [&](const auto& entry) {
        return entry.second.tx.nonce < node.chain.tip_state().nonce_of(entry.second.tx.sender);
    });
}

inline void drop_committed(NodeState& node, const Block& block) {
    for (const auto& tx : block.transactions) node.pool.erase(tx.id());
}

// Appends the block if it extends the tip; a competing block at tip height
// replaces it only on the lower-hash tie-break. Returns true when adopted.
inline bool consider_block(NodeState& node, const NodeContext& ctx, const Block& block,
                           std::vector<Outgoing>& out, int sender) {
    Chain& chain = node.chain;
    if (block.height == chain.height() + 1) {
        if (chain.append(block, ctx.vset)) {  // non-empty optional = rejection reason
            ++node.invalid_message_count;
            return false;
        }
        drop_committed(node, block);
        prune_pool(node);
        broadcast(out, node, ctx, BlockAnnounce{block});
        return true;
    }
    if (block.height > chain.height() + 1) {
        if (sender >= 0) out.push_back({sender, ChainRequest{chain.height() + 1}});
        return false;
    }
    if (block.height == chain.height() && block.height > 0 &&
        block.hash() < chain.tip().hash()) {
        const Block& parent = chain.blocks[block.height - 1];
        const WorldState& parent_state = chain.state_at(block.height - 1);
        WorldState next;
        if (validate_block(parent, parent_state, block, ctx.vset, &next)) {
            ++node.invalid_message_count;
            return false;
        }
        chain.truncate_to(block.height - 1);
        chain.blocks.push_back(block);
        chain.states.push_back(std::move(next));
        drop_committed(node, block);
        prune_pool(node);
        broadcast(out, node, ctx, BlockAnnounce{block});
        return true;
    }
    return false;
}

}  // namespace node_detail

// Processes one tick's worth of delivered messages, then proposes if this
// node is the scheduled authority on a proposal boundary. Pure apart from
// the node's own state; peers are reached only through the returned list.
inline std::vector<Outgoing> node_step(NodeState& node, const NodeContext& ctx,
                                       const std::vector<NodeMessage>& inbox,
                                       std::uint64_t tick) {
    std::vector<Outgoing> out;

    for (const auto& msg : inbox) {
        if (const auto* submit = std::get_if<TxSubmit>(&msg.body)) {
            const Hash32 id = submit->tx.id();
            if (node.seen_txs.contains(id)) continue;
            node.seen_txs.insert(id);
            if (!verify_transaction(submit->tx)) {
                ++node.invalid_message_count;
                continue;
            }
            node.pool[id] = PoolEntry{submit->tx, tick};
            node_detail::broadcast(out, node, ctx, TxSubmit{submit->tx});
        } else if (const auto* announce = std::get_if<BlockAnnounce>(&msg.body)) {
            const Hash32 hash = announce->block.hash();
            if (node.seen_blocks.contains(hash)) continue;
            node.seen_blocks.insert(hash);
            node_detail::consider_block(node, ctx, announce->block, out, msg.from);
        } else if (const auto* request = std::get_if<ChainRequest>(&msg.body)) {
            if (msg.from < 0) continue;
            ChainResponse response;
            for (std::uint64_t h = request->from_height;
                 h <= node.chain.height() && response.blocks.size() < kChainResponseMaxBlocks; ++h)
                response.blocks.push_back(node.chain.blocks[h]);
            if (!response.blocks.empty()) out.push_back({msg.from, std::move(response)});
        } else if (const auto* response = std::get_if<ChainResponse>(&msg.body)) {
            for (const auto& block : response->blocks) {
                const Hash32 hash = block.hash();
                node.seen_blocks.insert(hash);
                node_detail::consider_block(node, ctx, block, out, msg.from);
            }
        }
    }

    const std::uint64_t next_height = node.chain.height() + 1;
    const bool boundary = tick > 0 && tick % ctx.block_interval_ticks == 0;
    // Height h is only ever minted by its scheduled validator, so seeing no
    // new block for two full rounds means either this node missed one or the
    // chain is waiting on a lagging leader. Both resolve the same way: pull.
    if (boundary && node.last_sync_tick != tick &&
        node.chain.tip().tick + 2 * ctx.block_interval_ticks <= tick) {
        node.last_sync_tick = tick;
        node_detail::broadcast(out, node, ctx, ChainRequest{next_height});
    }
    if (boundary && node.last_proposed_tick != tick && node.is_scheduled(ctx, next_height)) {
        node.last_proposed_tick = tick;
        std::vector<Transaction> pending;
        for (const auto& [id, entry] : node.pool)
            if (entry.arrival_tick < tick) pending.push_back(entry.tx);
        Block block = propose_block(node.chain.tip(), node.chain.tip_state(), std::move(pending),
                                    *node.validator_key, tick);
        node.seen_blocks.insert(block.hash());
        if (!node.chain.append(block, ctx.vset)) {
            node_detail::drop_committed(node, block);
            node_detail::prune_pool(node);
            node_detail::broadcast(out, node, ctx, BlockAnnounce{std::move(block)});
        }
    }
    return out;
}

}  // namespace gridchain
