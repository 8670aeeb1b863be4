#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridchain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kHashSize = 32;
inline constexpr std::size_t kAddressSize = 20;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kSeedSize = 32;

using Hash32 = std::array<std::uint8_t, kHashSize>;
using PublicKey = std::array<std::uint8_t, kPublicKeySize>;
using Signature = std::array<std::uint8_t, kSignatureSize>;
using Seed = std::array<std::uint8_t, kSeedSize>;

// 20-byte account / contract identifier. The all-zero address is reserved
// as the deploy receiver and the genesis authority.
struct Address {
    std::array<std::uint8_t, kAddressSize> value{};

    auto operator<=>(const Address&) const = default;
    bool is_null() const { return *this == Address{}; }
};

inline char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

inline std::string to_hex(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(hex_digit(b >> 4));
        out.push_back(hex_digit(b & 0x0f));
    }
    return out;
}

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& a) {
    return to_hex(ByteView(a.data(), a.size()));
}

inline std::string to_hex(const Address& a) { return to_hex(a.value); }

inline int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline bool from_hex(const std::string& s, Bytes& out) {
    if (s.size() % 2 != 0) return false;
    out.clear();
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_value(s[i]), lo = hex_value(s[i + 1]);
        if (hi < 0 || lo < 0) return false;
        out.push_back(std::uint8_t(hi << 4 | lo));
    }
    return true;
}

template <std::size_t N>
bool from_hex(const std::string& s, std::array<std::uint8_t, N>& out) {
    Bytes tmp;
    if (!from_hex(s, tmp) || tmp.size() != N) return false;
    std::memcpy(out.data(), tmp.data(), N);
    return true;
}

inline bool address_from_hex(const std::string& s, Address& out) {
    return from_hex(s, out.value);
}

// Floor division toward negative infinity; divisor must be positive.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::int64_t clamp_i64(std::int64_t v, std::int64_t lo, std::int64_t hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// SplitMix64: tiny, bit-stable PRNG used wherever the simulation needs
// seeded randomness (message jitter, drops, test fuzzing).
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased value in [0, bound) via rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {  // inclusive
        return lo + below(hi - lo + 1);
    }

    std::int64_t srange(std::int64_t lo, std::int64_t hi) {  // inclusive
        return lo + static_cast<std::int64_t>(
                        below(static_cast<std::uint64_t>(hi - lo) + 1));
    }
};

}  // namespace gridchain
