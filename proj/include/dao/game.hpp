// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dao/bytes.hpp"
#include "dao/error.hpp"
#include "dao/rng.hpp"

namespace dao {

/// Fixed-point scale: one value unit is kScale raw units.
inline constexpr std::int64_t kScale = 1'000'000;

/// Largest table the library will allocate (2^24 coalitions).
inline constexpr unsigned kMaxTableAgents = 24;
/// Exact Shapley numerators are 128-bit; 16! * 2^58 stays far below 2^127.
inline constexpr unsigned kMaxExactAgents = 16;
inline constexpr unsigned kMaxOracleAgents = 8;
/// Per-coalition magnitude bound for exact mode. Keeps marginals, shares and
/// per-agent sums inside int64 and numerators inside int128.
inline constexpr std::int64_t kMaxAbsRaw = std::int64_t{1} << 56;

struct AgentId {
  std::uint16_t index = 0;

  constexpr AgentId() = default;
  constexpr explicit AgentId(unsigned i) : index(static_cast<std::uint16_t>(i)) {}
  auto operator<=>(const AgentId&) const = default;
};

/// Bit i set means agent i is a member.
class CoalitionMask {
 public:
  constexpr CoalitionMask() = default;
  constexpr explicit CoalitionMask(std::uint32_t bits) : bits_(bits) {}

  static constexpr CoalitionMask empty() { return CoalitionMask{}; }
  static constexpr CoalitionMask full(unsigned n) {
    return CoalitionMask(n >= 32 ? UINT32_MAX : (std::uint32_t{1} << n) - 1);
  }
  static constexpr CoalitionMask singleton(unsigned agent) {
    return CoalitionMask(std::uint32_t{1} << agent);
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool contains(unsigned agent) const { return (bits_ >> agent) & 1U; }
  constexpr bool contains(CoalitionMask other) const { return (bits_ & other.bits_) == other.bits_; }
  constexpr CoalitionMask with(unsigned agent) const { return CoalitionMask(bits_ | (1U << agent)); }
  constexpr CoalitionMask without(unsigned agent) const { return CoalitionMask(bits_ & ~(1U << agent)); }
  constexpr unsigned size() const { return static_cast<unsigned>(std::popcount(bits_)); }
  constexpr bool is_empty() const { return bits_ == 0; }

  auto operator<=>(const CoalitionMask&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

/// The t-th subset of N \ {agent} in ascending mask order: insert a zero bit at `agent`.
constexpr CoalitionMask subset_excluding(unsigned agent, std::uint32_t t) {
  const std::uint32_t low = t & ((1U << agent) - 1U);
  const std::uint32_t high = (t >> agent) << (agent + 1);
  return CoalitionMask(high | low);
}

struct FixedValue {
  std::int64_t raw = 0;

  static FixedValue from_double(double v) { return FixedValue{std::llround(v * static_cast<double>(kScale))}; }
  double to_double() const { return static_cast<double>(raw) / static_cast<double>(kScale); }

  auto operator<=>(const FixedValue&) const = default;
};

inline Int128 factorial(unsigned n) {
  Int128 f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Integer Shapley weight |S|! (n-1-|S|)!, i.e. the textbook weight scaled by n!.
inline Int128 shapley_weight(unsigned n, unsigned coalition_size) {
  return factorial(coalition_size) * factorial(n - 1 - coalition_size);
}

/// Characteristic function v over all 2^n coalitions, indexed by mask.
class CharacteristicTable {
 public:
  explicit CharacteristicTable(unsigned n) : n_(checked_agents(n)), values_(std::size_t{1} << n) {}

  CharacteristicTable(unsigned n, std::vector<FixedValue> values) : n_(checked_agents(n)), values_(std::move(values)) {
    if (values_.size() != (std::size_t{1} << n_)) {
      throw Error(Errc::kInvalidArgument, "table needs 2^n values");
    }
  }

  unsigned agents() const { return n_; }
  std::size_t size() const { return values_.size(); }
  CoalitionMask grand_coalition() const { return CoalitionMask::full(n_); }

  FixedValue operator[](CoalitionMask s) const { return values_[s.bits()]; }
  FixedValue& at(CoalitionMask s) {
    if (s.bits() >= values_.size()) throw Error(Errc::kInvalidArgument, "mask out of range");
    return values_[s.bits()];
  }
  void set(CoalitionMask s, FixedValue v) { at(s) = v; }

  FixedValue grand_value() const { return values_.back(); }
  bool normalized() const { return values_.front().raw == 0; }
  std::span<const FixedValue> values() const { return values_; }

  bool operator==(const CharacteristicTable&) const = default;

 private:
  static unsigned checked_agents(unsigned n) {
    if (n < 1 || n > kMaxTableAgents) {
      throw Error(Errc::kInvalidArgument, "agent count must be in [1, " + std::to_string(kMaxTableAgents) + "]");
    }
    return n;
  }

  unsigned n_;
  std::vector<FixedValue> values_;
};

/// Pointwise sum of two games over the same agent set.
inline CharacteristicTable operator+(const CharacteristicTable& a, const CharacteristicTable& b) {
  if (a.agents() != b.agents()) throw Error(Errc::kInvalidArgument, "agent count mismatch");
  CharacteristicTable out(a.agents());
  for (std::uint32_t s = 0; s < a.size(); ++s) {
    CoalitionMask m(s);
    out.set(m, FixedValue{a[m].raw + b[m].raw});
  }
  return out;
}

/// Shifts every value so that v(empty) = 0.
inline CharacteristicTable normalize(const CharacteristicTable& table) {
  const std::int64_t base = table[CoalitionMask::empty()].raw;
  if (base == 0) return table;
  CharacteristicTable out(table.agents());
  for (std::uint32_t s = 0; s < table.size(); ++s) {
    CoalitionMask m(s);
    out.set(m, FixedValue{table[m].raw - base});
  }
  return out;
}

/// Floors each numerator / divisor and hands the leftover units to the largest
/// remainders, ties to the lowest index. Preserves the exact total whenever the
/// numerators sum to a multiple of the divisor.
inline std::vector<std::int64_t> largest_remainder_round(std::span<const Int128> numerators, Int128 divisor) {
  const std::size_t n = numerators.size();
  std::vector<std::int64_t> out(n);
  std::vector<Int128> remainder(n);
  Int128 remainder_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Int128 q = numerators[i] / divisor;
    Int128 r = numerators[i] % divisor;
    if (r < 0) {
      r += divisor;
      q -= 1;
    }
    out[i] = static_cast<std::int64_t>(q);
    remainder[i] = r;
    remainder_sum += r;
  }
  auto extra = static_cast<std::size_t>(remainder_sum / divisor);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; j < extra && j < n; ++j) out[order[j]] += 1;
  return out;
}

/// Exact Shapley values scaled by n!: phi_i = numerators[i] / n! in raw units.
struct ShapleyAllocation {
  unsigned n = 0;
  std::vector<Int128> numerators;

  Int128 denominator() const { return factorial(n); }

  Int128 numerator_sum() const {
    Int128 total = 0;
    for (auto v : numerators) total += v;
    return total;
  }

  std::vector<FixedValue> as_fixed() const {
    auto rounded = largest_remainder_round(numerators, denominator());
    std::vector<FixedValue> out;
    out.reserve(rounded.size());
    for (auto r : rounded) out.push_back(FixedValue{r});
    return out;
  }

  FixedValue as_fixed(unsigned agent) const { return as_fixed().at(agent); }

  bool operator==(const ShapleyAllocation&) const = default;
};

/// Throws unless the table is normalized and every value is inside the exact-mode range.
inline void check_exact_domain(const CharacteristicTable& table, unsigned max_agents) {
  if (table.agents() > max_agents) {
    throw Error(Errc::kInvalidArgument, "n=" + std::to_string(table.agents()) + " exceeds limit " +
                                            std::to_string(max_agents));
  }
  if (!table.normalized()) throw Error(Errc::kInvalidArgument, "table is not normalized (v(empty) != 0)");
  for (auto v : table.values()) {
    if (v.raw > kMaxAbsRaw || v.raw < -kMaxAbsRaw) {
      throw Error(Errc::kOverflow, "coalition value exceeds exact-mode range");
    }
  }
}

/// Weighted-sum form: Phi_i = sum over S in N\{i} of |S|!(n-1-|S|)! (v(S+i) - v(S)),
/// with S visited in ascending mask order.
inline ShapleyAllocation exact_shapley(const CharacteristicTable& table) {
  check_exact_domain(table, kMaxExactAgents);
  const unsigned n = table.agents();
  std::vector<Int128> weight(n);
  for (unsigned s = 0; s < n; ++s) weight[s] = shapley_weight(n, s);

  ShapleyAllocation out{n, std::vector<Int128>(n, 0)};
  const std::uint32_t steps = std::uint32_t{1} << (n - 1);
  for (unsigned i = 0; i < n; ++i) {
    Int128 acc = 0;
    for (std::uint32_t t = 0; t < steps; ++t) {
      const CoalitionMask s = subset_excluding(i, t);
      const std::int64_t marginal = table[s.with(i)].raw - table[s].raw;
      acc += weight[s.size()] * marginal;
    }
    out.numerators[i] = acc;
  }
  return out;
}

/// Brute force over all n! orderings; the summed marginals equal the n!-scaled numerators.
inline ShapleyAllocation permutation_oracle(const CharacteristicTable& table) {
  check_exact_domain(table, kMaxOracleAgents);
  const unsigned n = table.agents();
  std::vector<unsigned> order(n);
  std::iota(order.begin(), order.end(), 0U);
  ShapleyAllocation out{n, std::vector<Int128>(n, 0)};
  do {
    CoalitionMask prefix;
    for (unsigned agent : order) {
      const CoalitionMask next = prefix.with(agent);
      out.numerators[agent] += table[next].raw - table[prefix].raw;
      prefix = next;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

struct MonteCarloEstimate {
  unsigned n = 0;
  std::uint64_t samples = 0;
  std::vector<FixedValue> estimates;
  /// Standard error of each estimate in raw units (0 when samples == 1).
  std::vector<double> std_errors;
};

/// Uniform-permutation sampling estimator; deterministic for a given seed.
inline MonteCarloEstimate monte_carlo_shapley(const CharacteristicTable& table, std::uint64_t samples,
                                              std::uint64_t seed) {
  if (samples < 1) throw Error(Errc::kInvalidArgument, "samples must be >= 1");
  const unsigned n = table.agents();
  Rng rng(seed);
  std::vector<unsigned> order(n);
  std::vector<long double> mean(n, 0.0L);
  std::vector<long double> m2(n, 0.0L);
  for (std::uint64_t k = 1; k <= samples; ++k) {
    std::iota(order.begin(), order.end(), 0U);
    for (unsigned j = n - 1; j > 0; --j) {
      std::swap(order[j], order[rng.below(j + 1)]);
    }
    CoalitionMask prefix;
    for (unsigned agent : order) {
      const CoalitionMask next = prefix.with(agent);
      const long double x = static_cast<long double>(table[next].raw - table[prefix].raw);
      const long double delta = x - mean[agent];
      mean[agent] += delta / static_cast<long double>(k);
      m2[agent] += delta * (x - mean[agent]);
      prefix = next;
    }
  }
  MonteCarloEstimate out{n, samples, {}, {}};
  for (unsigned i = 0; i < n; ++i) {
    out.estimates.push_back(FixedValue{std::llround(static_cast<double>(mean[i]))});
    double se = 0.0;
    if (samples > 1) {
      se = std::sqrt(static_cast<double>(m2[i] / static_cast<long double>(samples - 1)) /
                     static_cast<double>(samples));
    }
    out.std_errors.push_back(se);
  }
  return out;
}

struct SuperadditivityReport {
  FixedValue grand_value;
  Int128 standalone_sum = 0;
  /// v(N) - sum_i v({i})
  Int128 surplus = 0;
  bool superadditive = false;
};

/// Diagnostic for v(N) > sum of standalone values; never an error.
inline SuperadditivityReport check_superadditivity(const CharacteristicTable& table) {
  SuperadditivityReport r;
  r.grand_value = table.grand_value();
  for (unsigned i = 0; i < table.agents(); ++i) r.standalone_sum += table[CoalitionMask::singleton(i)].raw;
  r.surplus = static_cast<Int128>(r.grand_value.raw) - r.standalone_sum;
  r.superadditive = r.surplus > 0;
  return r;
}

struct CollusionReport {
  CoalitionMask colluders;
  std::int64_t gain = 0;
  /// (|K| / n) * v(N), raw units.
  double bound = 0.0;
  /// |K|^2 / n; the constant in front of it is unspecified, so it is reported only.
  double slack_term = 0.0;
  bool within_bound = true;
};

inline CollusionReport collusion_gain(const CharacteristicTable& table, const ShapleyAllocation& honest,
                                      const ShapleyAllocation& colluded, CoalitionMask colluders) {
  if (honest.n != colluded.n || honest.n != table.agents()) {
    throw Error(Errc::kInvalidArgument, "allocations are over different agent sets");
  }
  const auto before = honest.as_fixed();
  const auto after = colluded.as_fixed();
  CollusionReport r;
  r.colluders = colluders;
  for (unsigned i = 0; i < honest.n; ++i) {
    if (colluders.contains(i)) r.gain += after[i].raw - before[i].raw;
  }
  const double k = colluders.size();
  const double n = honest.n;
  r.bound = k / n * static_cast<double>(table.grand_value().raw);
  r.slack_term = k * k / n;
  r.within_bound = static_cast<double>(r.gain) <= r.bound;
  return r;
}

}  // namespace dao
