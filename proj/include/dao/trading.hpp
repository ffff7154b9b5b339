// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic trading task: a seeded geometric random walk, agents emitting
// per-step signals in [-1, 1], and a Sharpe-ratio coalition value.
//
// Signal payload: "SIG" | T u32 | T x i32 fixed-point signals (SCALE units).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dao/bytes.hpp"
#include "dao/commitment.hpp"
#include "dao/game.hpp"
#include "dao/rng.hpp"

namespace dao {

struct PriceParams {
  std::uint32_t steps = 256;
  double drift = 0.0002;
  double volatility = 0.02;
  double initial = 100.0;
  std::uint64_t seed = 7;
};

class PriceSeries {
 public:
  explicit PriceSeries(std::vector<double> prices) : prices_(std::move(prices)) {
    if (prices_.size() < 2) throw Error(Errc::kInvalidArgument, "price series needs at least 2 points");
    for (double p : prices_) {
      if (!(p > 0.0) || !std::isfinite(p)) throw Error(Errc::kInvalidArgument, "prices must be positive and finite");
    }
  }

  /// p_t = p_{t-1} * exp(drift - vol^2/2 + vol * z_t)
  static PriceSeries generate(const PriceParams& params) {
    if (params.steps < 2) throw Error(Errc::kInvalidArgument, "price series needs at least 2 steps");
    Rng rng(derive_seed(params.seed, 0x505249434553ULL));
    std::vector<double> p(params.steps);
    p[0] = params.initial;
    const double mu = params.drift - 0.5 * params.volatility * params.volatility;
    for (std::size_t t = 1; t < p.size(); ++t) p[t] = p[t - 1] * std::exp(mu + params.volatility * rng.normal());
    return PriceSeries(std::move(p));
  }

  std::size_t size() const { return prices_.size(); }
  double operator[](std::size_t t) const { return prices_[t]; }
  const std::vector<double>& prices() const { return prices_; }

  /// p_{t+1}/p_t - 1
  double forward_return(std::size_t t) const { return prices_[t + 1] / prices_[t] - 1.0; }

 private:
  std::vector<double> prices_;
};

enum class AgentRole { kDataAnalysis, kMarketPerspective, kDecision };

inline const char* role_name(AgentRole r) {
  switch (r) {
    case AgentRole::kDataAnalysis:
      return "data_analysis";
    case AgentRole::kMarketPerspective:
      return "market_perspective";
    case AgentRole::kDecision:
      return "decision";
  }
  return "?";
}

/// Skill is drawn per role from these ranges; roles differ only here.
struct SkillRange {
  double lo;
  double hi;
};

inline SkillRange role_skill_range(AgentRole r) {
  switch (r) {
    case AgentRole::kDataAnalysis:
      return {0.50, 0.70};
    case AgentRole::kMarketPerspective:
      return {0.55, 0.75};
    case AgentRole::kDecision:
      return {0.55, 0.75};
  }
  return {0.0, 0.0};
}

struct SyntheticAgent {
  AgentId id;
  AgentRole role = AgentRole::kDataAnalysis;
  std::uint64_t seed = 0;
  double skill = 0.0;
  /// Withholding proxy: 0 is full effort, 1 is pure noise.
  double degradation = 0.0;

  /// s_t = clamp(k * sign(r_{t+1}) + (1 - k) * z_t, -1, 1) with k = skill * (1 - degradation).
  /// The final step has no forward return and carries only noise.
  std::vector<std::int32_t> signals(const PriceSeries& prices) const {
    Rng rng(seed);
    const double k = skill * (1.0 - degradation);
    std::vector<std::int32_t> out(prices.size());
    for (std::size_t t = 0; t < prices.size(); ++t) {
      double dir = 0.0;
      if (t + 1 < prices.size()) {
        const double r = prices.forward_return(t);
        dir = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
      }
      const double s = std::clamp(k * dir + (1.0 - k) * rng.normal(), -1.0, 1.0);
      out[t] = static_cast<std::int32_t>(std::llround(s * static_cast<double>(kScale)));
    }
    return out;
  }

  OutputRecord output(const PriceSeries& prices) const { return OutputRecord(id, encode_signals(signals(prices))); }

  static Bytes encode_signals(std::span<const std::int32_t> s) {
    ByteWriter w;
    w.tag("SIG").u32(static_cast<std::uint32_t>(s.size()));
    for (auto v : s) w.u32(static_cast<std::uint32_t>(v));
    return std::move(w).take();
  }

  static std::vector<std::int32_t> decode_signals(ByteView payload) {
    ByteReader r(payload);
    r.expect_tag("SIG");
    std::vector<std::int32_t> out(r.u32());
    for (auto& v : out) {
      v = static_cast<std::int32_t>(r.u32());
      if (v > kScale || v < -kScale) throw Error(Errc::kParse, "signal outside [-1, 1]");
    }
    r.expect_done();
    return out;
  }
};

/// Agents ordered data-analysis first, then market-perspective, then decision.
inline std::vector<SyntheticAgent> make_agents(unsigned data_analysis, unsigned market_perspective, unsigned decision,
                                               std::uint64_t seed) {
  std::vector<SyntheticAgent> agents;
  auto add = [&](AgentRole role, unsigned count) {
    for (unsigned c = 0; c < count; ++c) {
      SyntheticAgent a;
      a.id = AgentId(static_cast<unsigned>(agents.size()));
      a.role = role;
      a.seed = derive_seed(seed, 2 * a.id.index + 1);
      Rng skill_rng(derive_seed(seed, 2 * a.id.index + 2));
      const auto range = role_skill_range(role);
      a.skill = range.lo + (range.hi - range.lo) * skill_rng.uniform();
      agents.push_back(a);
    }
  };
  add(AgentRole::kDataAnalysis, data_analysis);
  add(AgentRole::kMarketPerspective, market_perspective);
  add(AgentRole::kDecision, decision);
  return agents;
}

/// Sharpe ratio (sample std, no annualization) of the equal-weight mean signal,
/// r_t = s_{t-1} * (p_t/p_{t-1} - 1). Zero spread yields zero; the empty coalition is worth zero.
inline FixedValue evaluate_signals(std::span<const std::vector<std::int32_t>> member_signals, const PriceSeries& prices) {
  if (member_signals.empty()) return FixedValue{0};
  const std::size_t T = prices.size();
  for (const auto& s : member_signals) {
    if (s.size() != T) throw Error(Errc::kInvalidArgument, "signal length does not match price series");
  }
  std::vector<double> returns(T - 1);
  for (std::size_t t = 1; t < T; ++t) {
    std::int64_t sum = 0;
    for (const auto& s : member_signals) sum += s[t - 1];
    const double signal = static_cast<double>(sum) / static_cast<double>(kScale) / static_cast<double>(member_signals.size());
    returns[t - 1] = signal * (prices[t] / prices[t - 1] - 1.0);
  }
  if (returns.size() < 2) return FixedValue{0};
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(returns.size() - 1));
  if (sd < 1e-12) return FixedValue{0};
  return FixedValue{std::llround(static_cast<double>(kScale) * mean / sd)};
}

/// v(S) from the committed output records of S.
inline FixedValue evaluate_coalition(std::span<const OutputRecord> outputs, const PriceSeries& prices) {
  std::vector<std::vector<std::int32_t>> signals;
  signals.reserve(outputs.size());
  for (const auto& rec : outputs) signals.push_back(SyntheticAgent::decode_signals(rec.payload()));
  return evaluate_signals(signals, prices);
}

}  // namespace dao
