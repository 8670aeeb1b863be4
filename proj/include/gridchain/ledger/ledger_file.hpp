#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridchain/ledger/block.hpp"
#include "gridchain/ledger/chain.hpp"

namespace gridchain {

// On-disk ledger: each block is a 4-byte big-endian length prefix followed
// by its canonical bytes. Appending never rewrites earlier frames.

inline Bytes frame_block(const Block& block) {
    const Bytes body = block.encode();
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.raw(body);
    return std::move(w).take();
}

inline bool write_ledger(const std::filesystem::path& path, const std::vector<Block>& blocks) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    for (const auto& block : blocks) {
        const Bytes frame = frame_block(block);
        out.write(reinterpret_cast<const char*>(frame.data()),
                  static_cast<std::streamsize>(frame.size()));
    }
    return static_cast<bool>(out);
}

struct LedgerReadResult {
    std::vector<Block> blocks;
    std::optional<std::string> framing_error;  // set if trailing bytes are unusable
};

// Reads every complete, decodable frame; a damaged or truncated tail is
// reported without discarding the blocks before it.
inline std::optional<LedgerReadResult> read_ledger(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    LedgerReadResult result;
    ByteReader r(data);
    while (!r.done()) {
        Bytes body;
        if (!r.var_bytes(body)) {
            result.framing_error = "truncated block frame at offset " +
                                   std::to_string(r.consumed());
            return result;
        }
        auto block = Block::decode(body);
        if (!block) {
            result.framing_error = "undecodable block in frame " +
                                   std::to_string(result.blocks.size());
            return result;
        }
        result.blocks.push_back(std::move(*block));
    }
    return result;
}

// Genesis document: the out-of-band trust anchors. The chain itself embeds
// all keys it needs for structural replay; this file pins who was allowed
// to take part.
struct GenesisInfo {
    ValidatorSet validator_set;
    Address oracle;
    std::vector<std::pair<Address, PublicKey>> accounts;

    bool account_known(const Address& a) const {
        for (const auto& [addr, pk] : accounts)
            if (addr == a) return true;
        return false;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["validators"] = nlohmann::json::array();
        for (const auto& v : validator_set.validators) j["validators"].push_back(to_hex(v.value));
        j["oracle"] = to_hex(oracle.value);
        j["accounts"] = nlohmann::json::array();
        for (const auto& [addr, pk] : accounts)
            j["accounts"].push_back({{"address", to_hex(addr.value)}, {"pubkey", to_hex(pk)}});
        return j;
    }

    static std::optional<GenesisInfo> from_json(const nlohmann::json& j) {
        GenesisInfo g;
        if (!j.is_object() || !j.contains("validators") || !j.contains("oracle") ||
            !j.contains("accounts"))
            return std::nullopt;
        for (const auto& v : j["validators"]) {
            Address a;
            if (!v.is_string() || !from_hex(v.get<std::string>(), a.value)) return std::nullopt;
            g.validator_set.validators.push_back(a);
        }
        if (!g.validator_set.valid()) return std::nullopt;
        if (!j["oracle"].is_string() ||
            !from_hex(j["oracle"].get<std::string>(), g.oracle.value))
            return std::nullopt;
        for (const auto& entry : j["accounts"]) {
            Address a;
            PublicKey pk;
            if (!entry.is_object() || !entry.contains("address") || !entry.contains("pubkey"))
                return std::nullopt;
            if (!from_hex(entry["address"].get<std::string>(), a.value) ||
                !from_hex(entry["pubkey"].get<std::string>(), pk))
                return std::nullopt;
            g.accounts.emplace_back(a, pk);
        }
        return g;
    }
};

inline bool write_genesis(const std::filesystem::path& path, const GenesisInfo& genesis) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) return false;
    out << genesis.to_json().dump(2) << '\n';
    return static_cast<bool>(out);
}

inline std::optional<GenesisInfo> read_genesis(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return GenesisInfo::from_json(j);
}

}  // namespace gridchain
