#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gridchain/codec.hpp"
#include "gridchain/common.hpp"
#include "gridchain/contracts/payloads.hpp"
#include "gridchain/contracts/state.hpp"
#include "gridchain/crypto.hpp"
#include "gridchain/ledger/chain.hpp"
#include "gridchain/ledger/queries.hpp"
#include "gridchain/oracle/clearing.hpp"
#include "gridchain/oracle/coalition.hpp"
#include "gridchain/oracle/flex.hpp"
#include "gridchain/oracle/forecast.hpp"
#include "gridchain/tx.hpp"

namespace gridchain {

enum class OracleServiceKind : std::uint8_t {
    Forecast = 0,
    Clearing = 1,
    Flexibility = 2,
    Coalition = 3,
};

inline constexpr std::uint8_t kMaxOracleServiceKind =
    static_cast<std::uint8_t>(OracleServiceKind::Coalition);

inline const char* oracle_service_name(OracleServiceKind k) {
    switch (k) {
        case OracleServiceKind::Forecast: return "forecast";
        case OracleServiceKind::Clearing: return "clear";
        case OracleServiceKind::Flexibility: return "flex";
        case OracleServiceKind::Coalition: return "coalition";
    }
    return "?";
}

inline std::optional<OracleServiceKind> oracle_service_from_name(std::string_view name) {
    if (name == "forecast") return OracleServiceKind::Forecast;
    if (name == "clear") return OracleServiceKind::Clearing;
    if (name == "flex") return OracleServiceKind::Flexibility;
    if (name == "coalition") return OracleServiceKind::Coalition;
    return std::nullopt;
}

// Only selection criterion with defined semantics. The tag exists so new
// criteria can be added without changing the request wire format.
inline constexpr std::uint8_t kCriteriaMinCost = 0;

struct ForecastParams {
    Address series;  // meter contract whose readings feed the model
    ForecastHorizon horizon = ForecastHorizon::DayAhead;
    std::uint64_t from_slot = 0;

    void encode(ByteWriter& w) const {
        w.address(series);
        w.u8(static_cast<std::uint8_t>(horizon));
        w.u64(from_slot);
    }
    static bool decode(ByteReader& r, ForecastParams& out) {
        std::uint8_t horizon;
        if (!r.address(out.series) || !r.u8(horizon) || horizon > 1 || !r.u64(out.from_slot))
            return false;
        out.horizon = static_cast<ForecastHorizon>(horizon);
        return true;
    }
};

struct ClearingParams {
    Address market;
    std::uint64_t slot = 0;

    void encode(ByteWriter& w) const {
        w.address(market);
        w.u64(slot);
    }
    static bool decode(ByteReader& r, ClearingParams& out) {
        return r.address(out.market) && r.u64(out.slot);
    }
};

// Candidates travel inside the request so the recorded chain carries the
// full optimization input; an auditor can rerun the selection byte-for-byte.
struct FlexParams {
    std::uint8_t criteria = kCriteriaMinCost;
    std::int64_t target_wh = 0;
    std::vector<FlexCandidate> candidates;

    void encode(ByteWriter& w) const {
        w.u8(criteria);
        w.i64(target_wh);
        w.u32(static_cast<std::uint32_t>(candidates.size()));
        for (const auto& c : candidates) c.encode(w);
    }
    static bool decode(ByteReader& r, FlexParams& out) {
        std::uint32_t n;
        if (!r.u8(out.criteria) || !r.i64(out.target_wh) || !r.u32(n) || n > 65536) return false;
        out.candidates.resize(n);
        for (auto& c : out.candidates)
            if (!FlexCandidate::decode(r, c)) return false;
        return true;
    }
};

// Coalition inputs are the registered assets of the named aggregation
// contract, read at the pinned height; only the service terms travel.
struct CoalitionParams {
    std::uint8_t criteria = kCriteriaMinCost;
    Address vpp;
    VppServiceSpec service;

    void encode(ByteWriter& w) const {
        w.u8(criteria);
        w.address(vpp);
        service.encode(w);
    }
    static bool decode(ByteReader& r, CoalitionParams& out) {
        return r.u8(out.criteria) && r.address(out.vpp) && VppServiceSpec::decode(r, out.service);
    }
};

struct OracleRequestPayload {
    OracleServiceKind service = OracleServiceKind::Forecast;
    std::uint64_t request_id = 0;
    Bytes params;

    template <typename Params>
    static OracleRequestPayload make(OracleServiceKind service, std::uint64_t request_id,
                                     const Params& params) {
        ByteWriter w;
        params.encode(w);
        return {service, request_id, std::move(w).take()};
    }

    Bytes encode() const {
        ByteWriter w;
        w.u8(static_cast<std::uint8_t>(service));
        w.u64(request_id);
        w.var_bytes(params);
        return std::move(w).take();
    }
    static std::optional<OracleRequestPayload> decode(ByteView b) {
        ByteReader r(b);
        OracleRequestPayload p;
        std::uint8_t service;
        if (!r.u8(service) || service > kMaxOracleServiceKind || !r.u64(p.request_id) ||
            !r.var_bytes(p.params) || !r.done())
            return std::nullopt;
        p.service = static_cast<OracleServiceKind>(service);
        return p;
    }
};

struct OracleResponsePayload {
    Address requester;
    std::uint64_t request_id = 0;
    bool ok = false;
    Bytes body;  // service-specific answer when ok, UTF-8 error message when not

    Bytes encode() const {
        ByteWriter w;
        w.address(requester);
        w.u64(request_id);
        w.u8(ok ? 1 : 0);
        w.var_bytes(body);
        return std::move(w).take();
    }
    static std::optional<OracleResponsePayload> decode(ByteView b) {
        ByteReader r(b);
        OracleResponsePayload p;
        std::uint8_t ok;
        if (!r.address(p.requester) || !r.u64(p.request_id) || !r.u8(ok) || ok > 1 ||
            !r.var_bytes(p.body) || !r.done())
            return std::nullopt;
        p.ok = ok;
        return p;
    }
};

struct ForecastAnswer {
    std::uint64_t from_slot = 0;
    std::vector<std::int64_t> values;

    bool operator==(const ForecastAnswer&) const = default;

    Bytes encode() const {
        ByteWriter w;
        w.u64(from_slot);
        w.u32(static_cast<std::uint32_t>(values.size()));
        for (auto v : values) w.i64(v);
        return std::move(w).take();
    }
    static std::optional<ForecastAnswer> decode(ByteView b) {
        ByteReader r(b);
        ForecastAnswer a;
        std::uint32_t n;
        if (!r.u64(a.from_slot) || !r.u32(n) || n > 65536) return std::nullopt;
        a.values.resize(n);
        for (auto& v : a.values)
            if (!r.i64(v)) return std::nullopt;
        if (!r.done()) return std::nullopt;
        return a;
    }
};

// A request found on-chain with no answer from the oracle yet. `header_ok`
// is false for payloads too short to even carry (service, request_id); such
// requests are answered under id 0 so they cannot be replayed forever.
struct PendingRequest {
    Address requester;
    std::uint64_t request_id = 0;
    std::uint64_t height = 0;  // block that committed the request; pins the data view
    bool header_ok = false;
    bool service_known = false;
    OracleServiceKind service = OracleServiceKind::Forecast;
    Bytes params;
};

namespace oracle_detail {

inline Bytes error_body(std::string_view message) {
    return Bytes(message.begin(), message.end());
}

// Key that links a response to its request across transaction kinds.
using RequestKey = std::pair<Address, std::uint64_t>;

inline std::set<RequestKey> answered_keys(const std::vector<Block>& blocks,
                                          const Address& oracle) {
    std::set<RequestKey> answered;
    for (const auto& block : blocks) {
        for (const auto& tx : block.transactions) {
            if (tx.sender != oracle) continue;
            if (tx.kind == TxKind::OracleResponse) {
                if (auto p = OracleResponsePayload::decode(tx.payload))
                    answered.insert({p->requester, p->request_id});
            } else if (tx.kind == TxKind::MarketRecordClearing) {
                if (auto p = MarketRecordClearingPayload::decode(tx.payload))
                    answered.insert({p->requester, p->request_id});
            } else if (tx.kind == TxKind::VPPRecordDispatch) {
                if (auto p = VPPRecordDispatchPayload::decode(tx.payload))
                    answered.insert({p->requester, p->request_id});
            }
        }
    }
    return answered;
}

inline std::vector<PendingRequest> unanswered_requests(const std::vector<Block>& blocks,
                                                       const Address& oracle) {
    const std::set<RequestKey> answered = answered_keys(blocks, oracle);
    std::vector<PendingRequest> pending;
    std::set<RequestKey> scheduled;
    for (const auto& block : blocks) {
        for (const auto& tx : block.transactions) {
            if (tx.kind != TxKind::OracleRequest || tx.receiver != oracle) continue;
            PendingRequest req;
            req.requester = tx.sender;
            req.height = block.height;
            ByteReader r(tx.payload);
            std::uint8_t service;
            if (r.u8(service) && r.u64(req.request_id)) {
                req.header_ok = true;
                if (service <= kMaxOracleServiceKind && r.var_bytes(req.params) && r.done()) {
                    req.service_known = true;
                    req.service = static_cast<OracleServiceKind>(service);
                }
            } else {
                req.request_id = 0;
            }
            const RequestKey key{req.requester, req.request_id};
            if (answered.count(key) || !scheduled.insert(key).second) continue;
            pending.push_back(std::move(req));
        }
    }
    std::sort(pending.begin(), pending.end(), [](const PendingRequest& a, const PendingRequest& b) {
        if (a.request_id != b.request_id) return a.request_id < b.request_id;
        return a.requester < b.requester;
    });
    return pending;
}

struct Answer {
    bool ok = false;
    Bytes body;
    // Set for clearing answers: the response must go to the market contract
    // as a clearing record, not back to the requester.
    std::optional<Address> record_to;
    std::optional<ClearingResult> clearing;
};

inline Answer answer_forecast(const Chain& chain, const PendingRequest& req) {
    ForecastParams params;
    ByteReader r(req.params);
    if (!ForecastParams::decode(r, params) || !r.done())
        return {false, error_body("malformed forecast params"), {}, {}};
    const WorldState& state = chain.state_at(req.height);
    const auto it = state.contracts.find(params.series);
    if (it == state.contracts.end() || !std::holds_alternative<MeterContractState>(it->second))
        return {false, error_body("unknown meter series"), {}, {}};
    const auto history = meter_history(chain.blocks, params.series, req.height);
    const ForecastResult result = forecast(history, params.horizon, params.from_slot);
    if (!result.ok) return {false, error_body(result.error), {}, {}};
    return {true, ForecastAnswer{params.from_slot, result.values}.encode(), {}, {}};
}

inline Answer answer_clearing(const Chain& chain, const PendingRequest& req,
                              const Address& oracle) {
    ClearingParams params;
    ByteReader r(req.params);
    if (!ClearingParams::decode(r, params) || !r.done())
        return {false, error_body("malformed clearing params"), {}, {}};
    const WorldState& state = chain.state_at(req.height);
    const auto it = state.contracts.find(params.market);
    if (it == state.contracts.end() || !std::holds_alternative<MarketContractState>(it->second))
        return {false, error_body("unknown market"), {}, {}};
    const auto& market = std::get<MarketContractState>(it->second);
    if (market.oracle != oracle) return {false, error_body("not this market's oracle"), {}, {}};
    if (market.slot_cleared(params.slot)) return {false, error_body("slot already cleared"), {}, {}};
    std::vector<Order> bids, offers;
    for (const auto& order : market.open_orders) {
        if (order.slot != params.slot) continue;
        (order.side == OrderSide::Bid ? bids : offers).push_back(order);
    }
    Answer a;
    a.ok = true;
    a.record_to = params.market;
    a.clearing = clear_market(bids, offers, params.slot);
    return a;
}

inline Answer answer_flexibility(const PendingRequest& req) {
    FlexParams params;
    ByteReader r(req.params);
    if (!FlexParams::decode(r, params) || !r.done())
        return {false, error_body("malformed flexibility params"), {}, {}};
    if (params.criteria != kCriteriaMinCost)
        return {false, error_body("unsupported selection criteria"), {}, {}};
    const FlexSelection selection = select_flexibility(params.candidates, params.target_wh);
    ByteWriter w;
    selection.encode(w);
    return {true, std::move(w).take(), {}, {}};
}

inline Answer answer_coalition(const Chain& chain, const PendingRequest& req) {
    CoalitionParams params;
    ByteReader r(req.params);
    if (!CoalitionParams::decode(r, params) || !r.done())
        return {false, error_body("malformed coalition params"), {}, {}};
    if (params.criteria != kCriteriaMinCost)
        return {false, error_body("unsupported selection criteria"), {}, {}};
    const WorldState& state = chain.state_at(req.height);
    const auto it = state.contracts.find(params.vpp);
    if (it == state.contracts.end() || !std::holds_alternative<VPPContractState>(it->second))
        return {false, error_body("unknown aggregation contract"), {}, {}};
    const auto& vpp = std::get<VPPContractState>(it->second);
    const CoalitionPlan plan = form_coalition(vpp.assets, params.service);
    ByteWriter w;
    plan.encode(w);
    return {true, std::move(w).take(), {}, {}};
}

inline Answer compute_answer(const Chain& chain, const Address& oracle,
                             const PendingRequest& req) {
    if (!req.header_ok) return {false, error_body("unreadable request payload"), {}, {}};
    if (!req.service_known) return {false, error_body("unknown service"), {}, {}};
    switch (req.service) {
        case OracleServiceKind::Forecast: return answer_forecast(chain, req);
        case OracleServiceKind::Clearing: return answer_clearing(chain, req, oracle);
        case OracleServiceKind::Flexibility: return answer_flexibility(req);
        case OracleServiceKind::Coalition: return answer_coalition(chain, req);
    }
    return {false, error_body("unknown service"), {}, {}};
}

}  // namespace oracle_detail

// One pass over a chain snapshot: answer every committed, unanswered request.
// Pure in the chain and key; identical inputs produce identical transactions.
// Answers read contract data as of the block that committed the request, so
// a response does not depend on when the oracle got around to it.
inline std::vector<Transaction> oracle_step(const Chain& chain, const KeyPair& oracle_keys,
                                            std::uint64_t base_nonce) {
    const Address oracle = address_of(oracle_keys.public_key);
    const auto pending = oracle_detail::unanswered_requests(chain.blocks, oracle);
    std::vector<Transaction> out;
    std::uint64_t nonce = base_nonce;
    for (const auto& req : pending) {
        const oracle_detail::Answer answer = oracle_detail::compute_answer(chain, oracle, req);
        Transaction tx;
        tx.nonce = nonce++;
        if (answer.record_to) {
            tx.receiver = *answer.record_to;
            tx.kind = TxKind::MarketRecordClearing;
            tx.payload =
                MarketRecordClearingPayload{req.requester, req.request_id, *answer.clearing}
                    .encode();
        } else {
            tx.receiver = req.requester;
            tx.kind = TxKind::OracleResponse;
            tx.payload =
                OracleResponsePayload{req.requester, req.request_id, answer.ok, answer.body}
                    .encode();
        }
        sign_transaction(tx, oracle_keys);
        out.push_back(std::move(tx));
    }
    return out;
}

// Stateful wrapper for the simulation loop: skips requests whose answer it
// already emitted but the chain has not committed yet, and keeps nonces
// ahead of those in-flight transactions.
class OracleService {
  public:
    explicit OracleService(KeyPair keys) : keys_(std::move(keys)), address_(address_of(keys_.public_key)) {}

    const Address& address() const { return address_; }
    const PublicKey& public_key() const { return keys_.public_key; }

    std::vector<Transaction> step(const Chain& chain) {
        const auto answered = oracle_detail::answered_keys(chain.blocks, address_);
        for (auto it = in_flight_.begin(); it != in_flight_.end();) {
            it = answered.count(it->first) ? in_flight_.erase(it) : std::next(it);
        }
        std::uint64_t nonce = chain.tip_state().nonce_of(address_);
        for (const auto& [key, used_nonce] : in_flight_) nonce = std::max(nonce, used_nonce + 1);

        const auto pending = oracle_detail::unanswered_requests(chain.blocks, address_);
        std::vector<Transaction> out;
        for (const auto& req : pending) {
            const oracle_detail::RequestKey key{req.requester, req.request_id};
            if (in_flight_.count(key)) continue;
            const auto answer = oracle_detail::compute_answer(chain, address_, req);
            Transaction tx;
            tx.nonce = nonce++;
            if (answer.record_to) {
                tx.receiver = *answer.record_to;
                tx.kind = TxKind::MarketRecordClearing;
                tx.payload =
                    MarketRecordClearingPayload{req.requester, req.request_id, *answer.clearing}
                        .encode();
            } else {
                tx.receiver = req.requester;
                tx.kind = TxKind::OracleResponse;
                tx.payload =
                    OracleResponsePayload{req.requester, req.request_id, answer.ok, answer.body}
                        .encode();
            }
            sign_transaction(tx, keys_);
            in_flight_.emplace(key, tx.nonce);
            out.push_back(std::move(tx));
        }
        return out;
    }

  private:
    KeyPair keys_;
    Address address_;
    std::map<oracle_detail::RequestKey, std::uint64_t> in_flight_;
};

}  // namespace gridchain
