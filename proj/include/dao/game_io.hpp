// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// Canonical encodings of a CharacteristicTable:
//   binary: "CGAM" | version u8 | n u8 | 2^n x i64 BE raw values, ascending mask order
//   csv:    header "mask,value", one row per coalition, value in decimal units

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dao/bytes.hpp"
#include "dao/game.hpp"

namespace dao {

inline constexpr std::uint8_t kGameFormatVersion = 1;

inline Bytes encode_table(const CharacteristicTable& table) {
  ByteWriter w;
  w.tag("CGAM").u8(kGameFormatVersion).u8(static_cast<std::uint8_t>(table.agents()));
  for (auto v : table.values()) w.i64(v.raw);
  return std::move(w).take();
}

inline CharacteristicTable decode_table(ByteView data) {
  ByteReader r(data);
  r.expect_tag("CGAM");
  if (r.u8() != kGameFormatVersion) throw Error(Errc::kParse, "unsupported CGAM version");
  const unsigned n = r.u8();
  if (n < 1 || n > kMaxTableAgents) throw Error(Errc::kParse, "agent count out of range");
  std::vector<FixedValue> values(std::size_t{1} << n);
  for (auto& v : values) v.raw = r.i64();
  r.expect_done();
  return CharacteristicTable(n, std::move(values));
}

/// Formats raw units as a decimal with six fractional digits, e.g. -1.500000.
inline std::string format_fixed(FixedValue v) {
  const bool negative = v.raw < 0;
  const auto mag = negative ? static_cast<std::uint64_t>(-(v.raw + 1)) + 1 : static_cast<std::uint64_t>(v.raw);
  std::string frac = std::to_string(mag % static_cast<std::uint64_t>(kScale));
  frac.insert(0, 6 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(mag / static_cast<std::uint64_t>(kScale)) + "." + frac;
}

/// Parses a decimal with at most six fractional digits without going through double.
inline FixedValue parse_fixed(std::string_view text) {
  auto fail = [&] { return Error(Errc::kParse, "bad fixed-point value '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw fail();
  if (frac.size() > 6) throw fail();
  std::int64_t w = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc() || p != whole.data() + whole.size()) throw fail();
  }
  std::int64_t f = 0;
  if (!frac.empty()) {
    auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
    if (ec != std::errc() || p != frac.data() + frac.size()) throw fail();
    for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  }
  if (w > (INT64_MAX - f) / kScale) throw Error(Errc::kOverflow, "value out of range");
  const std::int64_t raw = w * kScale + f;
  return FixedValue{negative ? -raw : raw};
}

inline std::string table_to_csv(const CharacteristicTable& table) {
  std::string out = "mask,value\n";
  for (std::uint32_t s = 0; s < table.size(); ++s) {
    out += std::to_string(s) + "," + format_fixed(table[CoalitionMask(s)]) + "\n";
  }
  return out;
}

/// Accepts masks as decimal or 0b-prefixed binary; every coalition must appear exactly once.
inline CharacteristicTable table_from_csv(std::istream& in) {
  std::string line;
  std::vector<std::optional<FixedValue>> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line == "mask,value") continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(Errc::kParse, "line " + std::to_string(line_no) + ": missing comma");
    std::string_view mask_text(line.data(), comma);
    int base = 10;
    if (mask_text.starts_with("0b")) {
      mask_text.remove_prefix(2);
      base = 2;
    }
    std::uint32_t mask = 0;
    auto [p, ec] = std::from_chars(mask_text.data(), mask_text.data() + mask_text.size(), mask, base);
    if (ec != std::errc() || p != mask_text.data() + mask_text.size()) {
      throw Error(Errc::kParse, "line " + std::to_string(line_no) + ": bad mask");
    }
    if (mask >= (1U << kMaxTableAgents)) throw Error(Errc::kParse, "mask out of range");
    if (rows.size() <= mask) rows.resize(mask + 1);
    if (rows[mask]) throw Error(Errc::kParse, "duplicate mask " + std::to_string(mask));
    rows[mask] = parse_fixed(std::string_view(line).substr(comma + 1));
  }
  std::size_t size = 2;
  unsigned n = 1;
  while (size < rows.size()) {
    size <<= 1;
    ++n;
  }
  if (rows.size() != size) throw Error(Errc::kParse, "row count is not a power of two >= 2");
  std::vector<FixedValue> values;
  values.reserve(size);
  for (std::size_t s = 0; s < size; ++s) {
    if (!rows[s]) throw Error(Errc::kParse, "missing mask " + std::to_string(s));
    values.push_back(*rows[s]);
  }
  return CharacteristicTable(n, std::move(values));
}

inline CharacteristicTable table_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return table_from_csv(in);
}

}  // namespace dao
