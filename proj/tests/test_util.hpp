// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dao/dao.hpp"

namespace dao::testing {

/// Uniform values in [-range, range] raw units, v(empty) = 0.
inline CharacteristicTable random_game(unsigned n, Rng& rng, std::int64_t range = 5 * kScale) {
  CharacteristicTable t(n);
  for (std::uint32_t s = 1; s < t.size(); ++s) {
    const auto span = static_cast<std::uint64_t>(2 * range + 1);
    t.set(CoalitionMask(s), FixedValue{static_cast<std::int64_t>(rng.below(span)) - range});
  }
  return t;
}

/// One output per member per coalition, payload derived from (agent, salt).
inline std::vector<std::vector<OutputRecord>> synthetic_outputs(unsigned n, std::uint64_t salt = 0) {
  std::vector<std::vector<OutputRecord>> out(std::size_t{1} << n);
  for (std::uint32_t s = 0; s < out.size(); ++s) {
    for (unsigned i = 0; i < n; ++i) {
      if (!CoalitionMask(s).contains(i)) continue;
      ByteWriter w;
      w.u64(salt).u16(static_cast<std::uint16_t>(i));
      out[s].emplace_back(AgentId(i), std::move(w).take());
    }
  }
  return out;
}

/// Honest public inputs for a table and its outputs.
inline PublicInputs honest_public_inputs(const CharacteristicTable& table,
                                         const std::vector<std::vector<OutputRecord>>& outputs,
                                         std::uint64_t nonce = 0) {
  PublicInputs pub;
  pub.n = table.agents();
  pub.task_nonce = nonce;
  pub.allocations = exact_shapley(table).as_fixed();
  pub.grand_value = table.grand_value();
  for (std::uint32_t s = 0; s < table.size(); ++s) {
    pub.output_hash_cids.push_back(cid_of(HashSet::of(outputs[s])));
    pub.value_hashes.push_back(hash_value(table[CoalitionMask(s)], CoalitionMask(s)));
  }
  pub.seal();
  return pub;
}

}  // namespace dao::testing
