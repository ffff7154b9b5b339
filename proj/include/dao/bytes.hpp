// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dao/error.hpp"

namespace dao {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Int128 = __int128;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Appends big-endian fixed-width fields. All canonical encodings go through this.
class ByteWriter {
 public:
  ByteWriter& tag(std::string_view t) {
    buf_.insert(buf_.end(), t.begin(), t.end());
    return *this;
  }
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u16(std::uint16_t v) { return be(v, 2); }
  ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
  ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
  ByteWriter& i64(std::int64_t v) { return be(static_cast<std::uint64_t>(v), 8); }
  ByteWriter& i128(Int128 v) {
    auto u = static_cast<unsigned __int128>(v);
    be(static_cast<std::uint64_t>(u >> 64), 8);
    return be(static_cast<std::uint64_t>(u), 8);
  }
  ByteWriter& raw(ByteView b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  ByteWriter& zeros(std::size_t count) {
    buf_.insert(buf_.end(), count, 0);
    return *this;
  }

  std::size_t size() const { return buf_.size(); }
  const Bytes& bytes() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  ByteWriter& be(std::uint64_t v, int width) {
    for (int shift = (width - 1) * 8; shift >= 0; shift -= 8) {
      buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    return *this;
  }

  Bytes buf_;
};

/// Strict big-endian reader; any overrun throws Errc::kParse.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  void expect_tag(std::string_view t) {
    auto got = take(t.size());
    if (!std::equal(got.begin(), got.end(), t.begin(), t.end())) {
      throw Error(Errc::kParse, "expected tag '" + std::string(t) + "'");
    }
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(be(8)); }
  Int128 i128() {
    unsigned __int128 hi = be(8);
    unsigned __int128 lo = be(8);
    return static_cast<Int128>((hi << 64) | lo);
  }
  ByteView take(std::size_t count) {
    if (count > remaining()) {
      throw Error(Errc::kParse, "truncated input");
    }
    auto out = data_.subspan(pos_, count);
    pos_ += count;
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) throw Error(Errc::kParse, "trailing bytes");
  }

 private:
  std::uint64_t be(int width) {
    std::uint64_t v = 0;
    for (auto b : take(static_cast<std::size_t>(width))) v = (v << 8) | b;
    return v;
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

inline std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(Errc::kParse, "odd-length hex");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::kParse, "non-hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

inline std::string to_string(Int128 v) {
  if (v == 0) return "0";
  bool negative = v < 0;
  auto u = negative ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  std::string out;
  while (u != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (negative) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace dao
