// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dao/kv_config.hpp"

namespace dao {

/// Reference points for the fully on-chain baseline: (agents, gas).
inline constexpr unsigned kBaselineAnchorSmallN = 4;
inline constexpr double kBaselineAnchorSmallGas = 367'000.0;
inline constexpr unsigned kBaselineAnchorLargeN = 6;
inline constexpr double kBaselineAnchorLargeGas = 1'330'000.0;

/// Work performed by one run of the reference verifier.
struct VerifierWork {
  std::uint64_t hash_calls = 0;
  /// Sum over hash calls of ceil(input bytes / 32).
  std::uint64_t hashed_words = 0;
  std::uint64_t constraint_evals = 0;
};

struct GasModel {
  /// Modeled succinct-proof verification; independent of n.
  std::uint64_t verify_constant = 27'000;
  /// Fully on-chain baseline: onchain_base + onchain_per_coalition * 2^n.
  double onchain_base = 0.0;
  double onchain_per_coalition = 0.0;
  std::uint64_t storage_write = 20'000;
  // Weights for pricing the reference backend; hashing follows the SHA-256
  // precompile schedule.
  std::uint64_t hash_base = 60;
  std::uint64_t hash_per_word = 12;
  std::uint64_t constraint_eval = 200;

  /// Affine-in-2^n baseline fitted through the two anchors.
  static GasModel calibrated() {
    GasModel m;
    const double small = static_cast<double>(1U << kBaselineAnchorSmallN);
    const double large = static_cast<double>(1U << kBaselineAnchorLargeN);
    m.onchain_per_coalition = (kBaselineAnchorLargeGas - kBaselineAnchorSmallGas) / (large - small);
    m.onchain_base = kBaselineAnchorSmallGas - m.onchain_per_coalition * small;
    return m;
  }

  /// Missing keys keep their calibrated defaults; negative values are rejected.
  static GasModel from_config(const KeyValueConfig& cfg) {
    cfg.require_known({"verify_constant", "onchain_base", "onchain_per_coalition", "storage_write", "hash_base",
                       "hash_per_word", "constraint_eval"});
    GasModel m = calibrated();
    m.verify_constant = cfg.get_u64("verify_constant", m.verify_constant);
    m.onchain_base = cfg.get_double("onchain_base", m.onchain_base);
    m.onchain_per_coalition = cfg.get_double("onchain_per_coalition", m.onchain_per_coalition);
    m.storage_write = cfg.get_u64("storage_write", m.storage_write);
    m.hash_base = cfg.get_u64("hash_base", m.hash_base);
    m.hash_per_word = cfg.get_u64("hash_per_word", m.hash_per_word);
    m.constraint_eval = cfg.get_u64("constraint_eval", m.constraint_eval);
    if (m.onchain_base < 0 || m.onchain_per_coalition < 0) throw Error(Errc::kParse, "gas weights must be non-negative");
    return m;
  }

  static GasModel load(const std::filesystem::path& path) { return from_config(KeyValueConfig::load(path)); }

  std::uint64_t reference_units(const VerifierWork& w) const {
    return w.hash_calls * hash_base + w.hashed_words * hash_per_word + w.constraint_evals * constraint_eval;
  }
};

struct GasReport {
  unsigned agents = 0;
  double baseline = 0.0;
  std::uint64_t hybrid = 0;
  /// 1 - hybrid / baseline
  double reduction = 0.0;
};

inline GasReport gas_report(unsigned n, const GasModel& model) {
  if (n < 1 || n > 31) throw Error(Errc::kInvalidArgument, "agent count out of range");
  GasReport r;
  r.agents = n;
  r.baseline = model.onchain_base + model.onchain_per_coalition * static_cast<double>(std::uint64_t{1} << n);
  r.hybrid = model.verify_constant;
  r.reduction = r.baseline > 0 ? 1.0 - static_cast<double>(r.hybrid) / r.baseline : 0.0;
  return r;
}

}  // namespace dao
