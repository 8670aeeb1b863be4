#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridchain/contracts/vm.hpp"
#include "gridchain/ledger/block.hpp"

namespace gridchain {

struct ValidatorSet {
    std::vector<Address> validators;

    bool valid() const {
        if (validators.empty()) return false;
        auto sorted = validators;
        std::sort(sorted.begin(), sorted.end());
        return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    }

    const Address& scheduled_for(std::uint64_t height) const {
        return validators[height % validators.size()];
    }
};

struct ValidationError {
    std::uint64_t height = 0;
    std::string reason;
};

// Checks intrinsic to a (parent, block) pair; schedule membership is layered
// on top where a validator set is known.
inline std::optional<std::string> check_block_structure(const Block& parent, const Block& block) {
    if (block.height != parent.height + 1) return "bad-height";
    if (block.prev_hash != parent.hash()) return "bad-prev-hash";
    if (block.tick <= parent.tick) return "bad-tick";
    if (!block.signature_valid()) return "bad-signature";
    if (block.txs_hash != tx_list_hash(block.transactions)) return "bad-tx-list-hash";
    return std::nullopt;
}

// Re-executes the block on the parent state. Accepts iff every transaction
// is structurally valid, signed, nonce-sequential, in canonical order, and
// the resulting root matches the header.
inline std::optional<std::string> execute_block(const Block& block, WorldState& state,
                                                std::vector<Receipt>* receipts = nullptr) {
    const Transaction* prev = nullptr;
    for (const auto& tx : block.transactions) {
        if (prev) {
            const bool ordered = prev->sender < tx.sender ||
                                 (prev->sender == tx.sender && prev->nonce < tx.nonce);
            if (!ordered) return "bad-tx-order";
        }
        prev = &tx;
    }
    ExecContext ctx{block.tick};
    for (const auto& tx : block.transactions) {
        if (!verify_transaction(tx)) return "bad-tx";
        if (tx.nonce != state.nonce_of(tx.sender)) return "bad-tx";
        Receipt receipt = exec_transaction(state, tx, ctx);
        if (receipts) receipts->push_back(std::move(receipt));
    }
    if (state.root() != block.state_root) return "bad-state-root";
    return std::nullopt;
}

inline std::optional<std::string> validate_block(const Block& parent, const WorldState& parent_state,
                                                 const Block& block, const ValidatorSet& vset,
                                                 WorldState* out_state = nullptr,
                                                 std::vector<Receipt>* receipts = nullptr) {
    if (auto err = check_block_structure(parent, block)) return err;
    if (block.authority != vset.scheduled_for(block.height)) return "wrong-authority";
    WorldState state = parent_state;
    if (auto err = execute_block(block, state, receipts)) return err;
    if (out_state) *out_state = std::move(state);
    return std::nullopt;
}

// Builds the next block from a pending pool: stale or malformed transactions
// are dropped, failing ones are still included (their receipts are part of
// history). Pool order never matters because inclusion order is canonical.
inline Block propose_block(const Block& parent, const WorldState& parent_state,
                           std::vector<Transaction> pending, const KeyPair& authority,
                           std::uint64_t tick) {
    std::sort(pending.begin(), pending.end(), [](const Transaction& a, const Transaction& b) {
        return a.sender != b.sender ? a.sender < b.sender : a.nonce < b.nonce;
    });
    Block block;
    block.height = parent.height + 1;
    block.prev_hash = parent.hash();
    block.tick = tick;

    WorldState state = parent_state;
    ExecContext ctx{tick};
    for (auto& tx : pending) {
        if (tx.nonce != state.nonce_of(tx.sender)) continue;
        if (!verify_transaction(tx)) continue;
        exec_transaction(state, tx, ctx);
        block.transactions.push_back(std::move(tx));
    }
    block.txs_hash = tx_list_hash(block.transactions);
    block.state_root = state.root();
    block.sign(authority);
    return block;
}

// A validated chain with the post-state of every height retained; snapshots
// back audits and oracle evaluations pinned to a given height.
struct Chain {
    std::vector<Block> blocks;
    std::vector<WorldState> states;

    static Chain from_genesis() {
        Chain c;
        c.blocks.push_back(genesis_block());
        c.states.emplace_back();
        return c;
    }

    const Block& tip() const { return blocks.back(); }
    const WorldState& tip_state() const { return states.back(); }
    std::uint64_t height() const { return tip().height; }

    const WorldState& state_at(std::uint64_t height) const { return states[height]; }

    std::optional<std::string> append(const Block& block, const ValidatorSet& vset) {
        WorldState next;
        if (auto err = validate_block(tip(), tip_state(), block, vset, &next)) return err;
        blocks.push_back(block);
        states.push_back(std::move(next));
        return std::nullopt;
    }

    void truncate_to(std::uint64_t height) {
        blocks.resize(height + 1);
        states.resize(height + 1);
    }
};

// Full replay from genesis. Used by verification, audit, and every test that
// cross-checks a recorded root against independent execution.
struct ReplayResult {
    bool ok = false;
    ValidationError error;
    WorldState final_state;
    std::vector<std::vector<Receipt>> receipts_per_block;
};

inline ReplayResult replay_chain(const std::vector<Block>& blocks, const ValidatorSet* vset) {
    ReplayResult result;
    if (blocks.empty()) {
        result.error = {0, "empty chain"};
        return result;
    }
    if (blocks.front() != genesis_block()) {
        result.error = {0, "bad-genesis"};
        return result;
    }
    WorldState state;
    result.receipts_per_block.emplace_back();
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const Block& block = blocks[i];
        // Errors report the position where the chain broke, not the header's
        // claimed height; a tampered height field must not move the blame.
        const auto at = static_cast<std::uint64_t>(i);
        std::vector<Receipt> receipts;
        if (auto err = check_block_structure(blocks[i - 1], block)) {
            result.error = {at, *err};
            return result;
        }
        if (vset && block.authority != vset->scheduled_for(block.height)) {
            result.error = {at, "wrong-authority"};
            return result;
        }
        if (auto err = execute_block(block, state, &receipts)) {
            result.error = {at, *err};
            return result;
        }
        result.receipts_per_block.push_back(std::move(receipts));
    }
    result.ok = true;
    result.final_state = std::move(state);
    return result;
}

}  // namespace gridchain
