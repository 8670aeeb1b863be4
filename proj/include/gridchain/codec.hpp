#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gridchain/common.hpp"

namespace gridchain {

// Canonical byte layout used for everything that is hashed or signed:
// fixed field order, big-endian integers, u32 length prefixes on variable
// fields. Signed integers travel as two's-complement u64.

class ByteWriter {
  public:
    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(std::uint8_t(v >> shift));
    }

    void u64(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(std::uint8_t(v >> shift));
    }

    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void raw(ByteView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    template <std::size_t N>
    void fixed(const std::array<std::uint8_t, N>& a) {
        raw(ByteView(a.data(), a.size()));
    }

    void address(const Address& a) { fixed(a.value); }

    void var_bytes(ByteView data) {
        u32(static_cast<std::uint32_t>(data.size()));
        raw(data);
    }

    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

  private:
    Bytes buf_;
};

// Reader returning false on any out-of-bounds access; callers bail on the
// first failure so a truncated buffer can never read garbage.
class ByteReader {
  public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    std::size_t consumed() const { return pos_; }

    bool u8(std::uint8_t& out) {
        if (remaining() < 1) return false;
        out = data_[pos_++];
        return true;
    }

    bool u32(std::uint32_t& out) {
        if (remaining() < 4) return false;
        out = 0;
        for (int i = 0; i < 4; ++i) out = out << 8 | data_[pos_++];
        return true;
    }

    bool u64(std::uint64_t& out) {
        if (remaining() < 8) return false;
        out = 0;
        for (int i = 0; i < 8; ++i) out = out << 8 | data_[pos_++];
        return true;
    }

    bool i64(std::int64_t& out) {
        std::uint64_t raw;
        if (!u64(raw)) return false;
        out = static_cast<std::int64_t>(raw);
        return true;
    }

    template <std::size_t N>
    bool fixed(std::array<std::uint8_t, N>& out) {
        if (remaining() < N) return false;
        std::memcpy(out.data(), data_.data() + pos_, N);
        pos_ += N;
        return true;
    }

    bool address(Address& out) { return fixed(out.value); }

    bool var_bytes(Bytes& out, std::size_t max_len = kMaxVarLen) {
        std::uint32_t len;
        if (!u32(len) || len > max_len || remaining() < len) return false;
        out.assign(data_.begin() + pos_, data_.begin() + pos_ + len);
        pos_ += len;
        return true;
    }

    bool str(std::string& out, std::size_t max_len = kMaxStrLen) {
        std::uint32_t len;
        if (!u32(len) || len > max_len || remaining() < len) return false;
        out.assign(reinterpret_cast<const char*>(data_.data()) + pos_, len);
        pos_ += len;
        return true;
    }

    static constexpr std::size_t kMaxVarLen = 1u << 24;
    static constexpr std::size_t kMaxStrLen = 4096;

  private:
    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace gridchain
