// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "dao/bytes.hpp"

namespace dao {

/// 32-byte SHA-256 output.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  std::string hex() const { return to_hex(view()); }

  static Digest from_hex(std::string_view hex) {
    auto raw = dao::from_hex(hex);
    if (raw.size() != 32) throw Error(Errc::kParse, "digest must be 32 bytes");
    Digest d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
  }
  static Digest read(ByteReader& r) {
    Digest d;
    auto raw = r.take(32);
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
  }

  auto operator<=>(const Digest&) const = default;
};

/// Incremental SHA-256 over OpenSSL's EVP interface.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("EVP sha256 init failed");
    }
  }

  Sha256& update(ByteView data) {
    if (!data.empty()) EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
    return *this;
  }
  Sha256& update(std::string_view s) { return update(as_bytes(s)); }
  Sha256& update(const Digest& d) { return update(d.view()); }

  Digest finish() {
    Digest out;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), out.bytes.data(), &len);
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Digest sha256(ByteView data) { return Sha256().update(data).finish(); }

}  // namespace dao
