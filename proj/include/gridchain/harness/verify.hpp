#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gridchain/ledger/chain.hpp"
#include "gridchain/ledger/ledger_file.hpp"

namespace gridchain {

struct VerifyResult {
    bool ok = false;
    std::string error;
    // First height that failed; unset when the inputs could not be read at
    // all. A framing failure reports the first unreadable frame's position.
    std::optional<std::uint64_t> failed_height;
    std::uint64_t height = 0;  // verified tip height when ok
    std::uint64_t tx_count = 0;
    std::string tip_root_hex;
};

// Full independent check of a ledger file against its genesis document:
// frame decode, structural replay (hashes, signatures, authority schedule,
// state roots), and the account registry (every transaction sender must be
// a genesis-listed account with the matching public key).
inline VerifyResult verify_ledger_file(const std::filesystem::path& ledger_path,
                                       const std::filesystem::path& genesis_path) {
    VerifyResult out;
    const auto genesis = read_genesis(genesis_path);
    if (!genesis) {
        out.error = "cannot read genesis document: " + genesis_path.string();
        return out;
    }
    const auto ledger = read_ledger(ledger_path);
    if (!ledger) {
        out.error = "cannot read ledger: " + ledger_path.string();
        return out;
    }
    if (ledger->framing_error) {
        out.failed_height = ledger->blocks.size();
        out.error = *ledger->framing_error;
        return out;
    }

    const ReplayResult replay = replay_chain(ledger->blocks, &genesis->validator_set);
    if (!replay.ok) {
        out.failed_height = replay.error.height;
        out.error = replay.error.reason + " at height " + std::to_string(replay.error.height);
        return out;
    }

    for (std::size_t i = 1; i < ledger->blocks.size(); ++i) {
        for (const auto& tx : ledger->blocks[i].transactions) {
            bool registered = false;
            for (const auto& [addr, pk] : genesis->accounts) {
                if (addr == tx.sender) {
                    registered = pk == tx.sender_pubkey;
                    break;
                }
            }
            if (!registered) {
                out.failed_height = i;
                out.error = "transaction from unregistered account " + to_hex(tx.sender) +
                            " at height " + std::to_string(i);
                return out;
            }
            ++out.tx_count;
        }
    }

    out.ok = true;
    out.height = ledger->blocks.size() - 1;
    out.tip_root_hex = to_hex(replay.final_state.root());
    return out;
}

}  // namespace gridchain
