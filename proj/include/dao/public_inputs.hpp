// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dao/commitment.hpp"
#include "dao/game.hpp"
#include "dao/sha256.hpp"

namespace dao {

/// Statement anchored on the ledger: the claimed allocation, v(N), and every
/// per-coalition commitment. task_nonce distinguishes otherwise identical tasks.
struct PublicInputs {
  unsigned n = 0;
  std::uint64_t task_nonce = 0;
  std::vector<FixedValue> allocations;
  FixedValue grand_value;
  std::vector<Cid> output_hash_cids;
  std::vector<Digest> value_hashes;
  Digest public_digest;

  std::size_t coalition_count() const { return std::size_t{1} << n; }

  bool well_formed() const {
    return n >= 1 && n <= kMaxExactAgents && allocations.size() == n &&
           output_hash_cids.size() == coalition_count() && value_hashes.size() == coalition_count();
  }

  /// "PUB" | version u8 | n u8 | nonce u64 | allocations i64 | v(N) i64 | cids | value hashes
  Bytes canonical_bytes() const {
    ByteWriter w;
    w.tag("PUB").u8(1).u8(static_cast<std::uint8_t>(n)).u64(task_nonce);
    for (auto a : allocations) w.i64(a.raw);
    w.i64(grand_value.raw);
    for (const auto& c : output_hash_cids) w.raw(c.digest.view());
    for (const auto& h : value_hashes) w.raw(h.view());
    return std::move(w).take();
  }

  Digest compute_digest() const { return sha256(canonical_bytes()); }

  /// Recomputes public_digest; call after every field edit.
  PublicInputs& seal() {
    public_digest = compute_digest();
    return *this;
  }
};

}  // namespace dao
