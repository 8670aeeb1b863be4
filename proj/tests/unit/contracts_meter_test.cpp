#include <gtest/gtest.h>

#include "gridchain/contracts/vm.hpp"
#include "test_support.hpp"

namespace gridchain {
namespace {

using test::VmHarness;

Bytes reading_payload(const Address& device, std::uint64_t slot, std::int64_t wh) {
    MeterUpdatePayload p;
    p.reading = {slot, wh, device};
    return p.encode();
}

TEST(MeterContract, DeployStartsEmpty) {
    VmHarness h;
    auto owner = test::account(1);
    auto [receipt, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    ASSERT_TRUE(receipt.ok) << receipt.error;
    const auto& state = h.contract_as<MeterContractState>(addr);
    EXPECT_EQ(state.count, 0u);
    EXPECT_FALSE(state.latest.has_value());
    EXPECT_EQ(state.readings_root, Hash32{});
    EXPECT_EQ(state.metadata.owner, owner.address);
}

TEST(MeterContract, ConsecutiveNoncesGiveDistinctAddresses) {
    VmHarness h;
    auto owner = test::account(1);
    auto [r1, a1] = h.deploy_meter(owner, "smart-meter", "energy");
    auto [r2, a2] = h.deploy_meter(owner, "smart-meter", "energy");
    ASSERT_TRUE(r1.ok && r2.ok);
    EXPECT_NE(a1, a2);
}

TEST(MeterContract, FirstReadingAccepted) {
    VmHarness h;
    auto owner = test::account(1);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    auto receipt = h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 0, 1500));
    ASSERT_TRUE(receipt.ok) << receipt.error;
    const auto& state = h.contract_as<MeterContractState>(addr);
    EXPECT_EQ(state.count, 1u);
    ASSERT_TRUE(state.latest.has_value());
    EXPECT_EQ(state.latest->slot, 0u);
    EXPECT_EQ(state.latest->energy_wh, 1500);
}

TEST(MeterContract, NonOwnerRejected) {
    VmHarness h;
    auto owner = test::account(1);
    auto stranger = test::account(2);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    auto receipt = h.exec(stranger, addr, TxKind::MeterUpdate, reading_payload(addr, 0, 1500));
    EXPECT_FALSE(receipt.ok);
    EXPECT_EQ(h.contract_as<MeterContractState>(addr).count, 0u);
}

TEST(MeterContract, DuplicateSlotRejected) {
    VmHarness h;
    auto owner = test::account(1);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    ASSERT_TRUE(h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 5, 100)).ok);
    EXPECT_FALSE(h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 5, 200)).ok);
    EXPECT_FALSE(h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 4, 200)).ok);
    EXPECT_EQ(h.contract_as<MeterContractState>(addr).count, 1u);
}

TEST(MeterContract, ReadingBoundsEnforced) {
    VmHarness h;
    auto owner = test::account(1);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    EXPECT_FALSE(
        h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 0, kMaxReadingWh + 1)).ok);
    EXPECT_FALSE(
        h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 1, -kMaxReadingWh - 1)).ok);
    EXPECT_TRUE(
        h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 2, kMaxReadingWh)).ok);
}

TEST(MeterContract, WrongDeviceAddressRejected) {
    VmHarness h;
    auto owner = test::account(1);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    Address other = addr;
    other.value[0] ^= 1;
    EXPECT_FALSE(h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(other, 0, 100)).ok);
}

// Recomputes the rolling root with an independent fold over the same three
// readings; the contract's stored root must match step for step.
TEST(MeterContract, ReadingsRootMatchesIndependentFold) {
    VmHarness h;
    auto owner = test::account(1);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");

    std::vector<EnergyReading> readings = {
        {0, 1500, addr}, {1, -300, addr}, {2, 42, addr}};
    Hash32 expected{};
    for (const auto& r : readings) {
        ByteWriter w;
        w.fixed(expected);
        w.u64(r.slot);
        w.i64(r.energy_wh);
        w.address(r.device);
        expected = sha256(std::move(w).take());
        ASSERT_TRUE(h.exec(owner, addr, TxKind::MeterUpdate,
                           reading_payload(addr, r.slot, r.energy_wh))
                        .ok);
        EXPECT_EQ(h.contract_as<MeterContractState>(addr).readings_root, expected);
    }
    EXPECT_EQ(h.contract_as<MeterContractState>(addr).count, 3u);
}

// No reachable transaction sequence may change deployed metadata. Random
// mix of valid and invalid calls against one meter.
TEST(MeterContract, MetadataImmutableUnderRandomTraffic) {
    VmHarness h;
    auto owner = test::account(1);
    auto stranger = test::account(2);
    auto [_, addr] = h.deploy_meter(owner, "hvac-sensor", "energy");
    const MeterMetadata before = h.contract_as<MeterContractState>(addr).metadata;

    SplitMix64 rng(2024);
    std::uint64_t slot = 0;
    for (int i = 0; i < 300; ++i) {
        const auto& from = rng.below(2) ? owner : stranger;
        const auto kind = static_cast<TxKind>(rng.below(kMaxTxKind + 1));
        Bytes payload;
        switch (rng.below(3)) {
            case 0:
                payload = reading_payload(addr, ++slot, rng.srange(-5000, 5000));
                break;
            case 1: {  // garbage bytes
                payload.resize(rng.below(40));
                for (auto& b : payload) b = static_cast<std::uint8_t>(rng.next());
                break;
            }
            default:  // a deploy-ish body aimed at the meter
                payload = encode_deploy(ContractKind::Meter,
                                        MeterInit{{"spoofed", "spoofed", "Wh", stranger.address}});
                break;
        }
        h.exec(from, addr, kind, std::move(payload));
        EXPECT_EQ(h.contract_as<MeterContractState>(addr).metadata, before);
    }
}

TEST(MeterContract, FailedCallLeavesStateByteIdentical) {
    VmHarness h;
    auto owner = test::account(1);
    auto stranger = test::account(2);
    auto [_, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    ASSERT_TRUE(h.exec(owner, addr, TxKind::MeterUpdate, reading_payload(addr, 0, 777)).ok);

    ByteWriter before;
    encode_contract_state(before, h.world.contracts.at(addr));
    auto receipt = h.exec(stranger, addr, TxKind::MeterUpdate, reading_payload(addr, 1, 1));
    ASSERT_FALSE(receipt.ok);
    ByteWriter after;
    encode_contract_state(after, h.world.contracts.at(addr));
    EXPECT_EQ(before.bytes(), after.bytes());
}

TEST(MeterContract, DeployValidation) {
    VmHarness h;
    auto owner = test::account(1);
    MeterInit bad_unit{{"smart-meter", "energy", "kWh", owner.address}};
    EXPECT_FALSE(
        h.exec(owner, Address{}, TxKind::Deploy, encode_deploy(ContractKind::Meter, bad_unit)).ok);
    MeterInit empty_type{{"", "energy", "Wh", owner.address}};
    EXPECT_FALSE(
        h.exec(owner, Address{}, TxKind::Deploy, encode_deploy(ContractKind::Meter, empty_type))
            .ok);
}

TEST(Vm, MethodAgainstWrongContractKindFails) {
    VmHarness h;
    auto owner = test::account(1);
    auto oracle = test::account(9);
    auto [_, market] = h.deploy_market(owner, oracle.address);
    auto receipt = h.exec(owner, market, TxKind::MeterUpdate, reading_payload(market, 0, 1));
    EXPECT_FALSE(receipt.ok);
}

TEST(Vm, UnknownContractFails) {
    VmHarness h;
    auto owner = test::account(1);
    Address nowhere;
    nowhere.value[0] = 0xaa;
    auto receipt = h.exec(owner, nowhere, TxKind::MeterUpdate, reading_payload(nowhere, 0, 1));
    EXPECT_FALSE(receipt.ok);
    EXPECT_EQ(receipt.error, "unknown contract");
}

TEST(Vm, NonceConsumedOnFailure) {
    VmHarness h;
    auto owner = test::account(1);
    Address nowhere;
    nowhere.value[0] = 0xaa;
    EXPECT_EQ(h.world.nonce_of(owner.address), 0u);
    h.exec(owner, nowhere, TxKind::MeterUpdate, Bytes{});
    EXPECT_EQ(h.world.nonce_of(owner.address), 1u);
}

TEST(Vm, DeployMustTargetNullAddress) {
    VmHarness h;
    auto owner = test::account(1);
    auto [ok_receipt, addr] = h.deploy_meter(owner, "smart-meter", "energy");
    ASSERT_TRUE(ok_receipt.ok);
    auto receipt = h.exec(owner, addr, TxKind::Deploy,
                          encode_deploy(ContractKind::Meter,
                                        MeterInit{{"x", "y", "Wh", owner.address}}));
    EXPECT_FALSE(receipt.ok);
}

}  // namespace
}  // namespace gridchain
