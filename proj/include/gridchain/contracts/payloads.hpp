#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/contracts/state.hpp"
#include "gridchain/contracts/types.hpp"

namespace gridchain {

// Deploy payload: contract kind tag followed by the kind-specific init body.

struct MeterInit {
    MeterMetadata metadata;

    void encode(ByteWriter& w) const { metadata.encode(w); }
    static bool decode(ByteReader& r, MeterInit& out) {
        return MeterMetadata::decode(r, out.metadata);
    }
};

struct DRInit {
    Address prosumer;
    Address aggregator;
    BaselineProfile baseline;

    void encode(ByteWriter& w) const {
        w.address(prosumer);
        w.address(aggregator);
        baseline.encode(w);
    }
    static bool decode(ByteReader& r, DRInit& out) {
        return r.address(out.prosumer) && r.address(out.aggregator) &&
               BaselineProfile::decode(r, out.baseline);
    }
};

struct MarketInit {
    Address oracle;

    void encode(ByteWriter& w) const { w.address(oracle); }
    static bool decode(ByteReader& r, MarketInit& out) { return r.address(out.oracle); }
};

struct VPPInit {
    Address operator_addr;
    Address oracle;

    void encode(ByteWriter& w) const {
        w.address(operator_addr);
        w.address(oracle);
    }
    static bool decode(ByteReader& r, VPPInit& out) {
        return r.address(out.operator_addr) && r.address(out.oracle);
    }
};

template <typename Init>
inline Bytes encode_deploy(ContractKind kind, const Init& init) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind));
    init.encode(w);
    return std::move(w).take();
}

// Method payloads. Each tx kind's payload is one of these, canonically
// encoded; a payload that fails to decode fails the transaction.

struct MeterUpdatePayload {
    EnergyReading reading;

    Bytes encode() const {
        ByteWriter w;
        reading.encode(w);
        return std::move(w).take();
    }
    static std::optional<MeterUpdatePayload> decode(ByteView b) {
        ByteReader r(b);
        MeterUpdatePayload p;
        if (!EnergyReading::decode(r, p.reading) || !r.done()) return std::nullopt;
        return p;
    }
};

struct DRIssueOrderPayload {
    FlexibilityOrder order;  // id field ignored; the contract assigns it

    Bytes encode() const {
        ByteWriter w;
        order.encode(w);
        return std::move(w).take();
    }
    static std::optional<DRIssueOrderPayload> decode(ByteView b) {
        ByteReader r(b);
        DRIssueOrderPayload p;
        if (!FlexibilityOrder::decode(r, p.order) || !r.done()) return std::nullopt;
        return p;
    }
};

struct DRSettlePayload {
    std::uint64_t order_id = 0;
    std::vector<EnergyReading> metered;  // one reading per slot of the window

    Bytes encode() const {
        ByteWriter w;
        w.u64(order_id);
        w.u32(static_cast<std::uint32_t>(metered.size()));
        for (const auto& m : metered) m.encode(w);
        return std::move(w).take();
    }
    static std::optional<DRSettlePayload> decode(ByteView b) {
        ByteReader r(b);
        DRSettlePayload p;
        std::uint32_t n;
        if (!r.u64(p.order_id) || !r.u32(n) || n > 65536) return std::nullopt;
        p.metered.resize(n);
        for (auto& m : p.metered)
            if (!EnergyReading::decode(r, m)) return std::nullopt;
        if (!r.done()) return std::nullopt;
        return p;
    }
};

struct MarketSubmitOrderPayload {
    Order order;  // id field ignored; the contract assigns it

    Bytes encode() const {
        ByteWriter w;
        order.encode(w);
        return std::move(w).take();
    }
    static std::optional<MarketSubmitOrderPayload> decode(ByteView b) {
        ByteReader r(b);
        MarketSubmitOrderPayload p;
        if (!Order::decode(r, p.order) || !r.done()) return std::nullopt;
        return p;
    }
};

// Carries the request linkage so an auditor can tie the recorded clearing
// back to the OracleRequest it answers and re-derive the input book.
struct MarketRecordClearingPayload {
    Address requester;
    std::uint64_t request_id = 0;
    ClearingResult result;

    Bytes encode() const {
        ByteWriter w;
        w.address(requester);
        w.u64(request_id);
        result.encode(w);
        return std::move(w).take();
    }
    static std::optional<MarketRecordClearingPayload> decode(ByteView b) {
        ByteReader r(b);
        MarketRecordClearingPayload p;
        if (!r.address(p.requester) || !r.u64(p.request_id) ||
            !ClearingResult::decode(r, p.result) || !r.done())
            return std::nullopt;
        return p;
    }
};

struct VPPRegisterAssetPayload {
    AssetRecord asset;  // id field ignored; the contract assigns it

    Bytes encode() const {
        ByteWriter w;
        asset.encode(w);
        return std::move(w).take();
    }
    static std::optional<VPPRegisterAssetPayload> decode(ByteView b) {
        ByteReader r(b);
        VPPRegisterAssetPayload p;
        if (!AssetRecord::decode(r, p.asset) || !r.done()) return std::nullopt;
        return p;
    }
};

struct VPPRecordDispatchPayload {
    DispatchRecord dispatch;  // id field ignored; the contract assigns it
    Address requester;        // oracle request linkage for audit
    std::uint64_t request_id = 0;

    Bytes encode() const {
        ByteWriter w;
        dispatch.encode(w);
        w.address(requester);
        w.u64(request_id);
        return std::move(w).take();
    }
    static std::optional<VPPRecordDispatchPayload> decode(ByteView b) {
        ByteReader r(b);
        VPPRecordDispatchPayload p;
        if (!DispatchRecord::decode(r, p.dispatch) || !r.address(p.requester) ||
            !r.u64(p.request_id) || !r.done())
            return std::nullopt;
        return p;
    }
};

struct DeliveredEntry {
    std::uint64_t asset_id = 0;
    std::int64_t delivered_wh = 0;  // total over the dispatch window

    bool operator==(const DeliveredEntry&) const = default;

    void encode(ByteWriter& w) const {
        w.u64(asset_id);
        w.i64(delivered_wh);
    }
    static bool decode(ByteReader& r, DeliveredEntry& out) {
        return r.u64(out.asset_id) && r.i64(out.delivered_wh);
    }
};

struct VPPSettlePayload {
    std::uint64_t dispatch_id = 0;
    std::vector<DeliveredEntry> delivered;

    Bytes encode() const {
        ByteWriter w;
        w.u64(dispatch_id);
        w.u32(static_cast<std::uint32_t>(delivered.size()));
        for (const auto& d : delivered) d.encode(w);
        return std::move(w).take();
    }
    static std::optional<VPPSettlePayload> decode(ByteView b) {
        ByteReader r(b);
        VPPSettlePayload p;
        std::uint32_t n;
        if (!r.u64(p.dispatch_id) || !r.u32(n) || n > 65536) return std::nullopt;
        p.delivered.resize(n);
        for (auto& d : p.delivered)
            if (!DeliveredEntry::decode(r, d)) return std::nullopt;
        if (!r.done()) return std::nullopt;
        return p;
    }
};

}  // namespace gridchain
