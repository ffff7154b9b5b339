// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numeric>

#include "dao/dao.hpp"
#include "test_util.hpp"

namespace dao {
namespace {

using testing::random_game;

CharacteristicTable glove_game() {
  // Agent 0 holds a left glove, agents 1 and 2 right gloves; a pair is worth 1.
  CharacteristicTable t(3);
  for (std::uint32_t s = 0; s < 8; ++s) {
    if ((s & 1) && (s & 6)) t.set(CoalitionMask(s), FixedValue{kScale});
  }
  return t;
}

TEST(CoalitionMask, SubsetExcludingEnumeratesAscending) {
  for (unsigned agent = 0; agent < 4; ++agent) {
    std::uint32_t prev = 0;
    for (std::uint32_t t = 0; t < 8; ++t) {
      const auto s = subset_excluding(agent, t);
      EXPECT_FALSE(s.contains(agent));
      if (t > 0) {
        EXPECT_GT(s.bits(), prev);
      }
      prev = s.bits();
    }
  }
  EXPECT_EQ(subset_excluding(1, 3).bits(), 0b101U);
}

TEST(Shapley, GloveGame) {
  const auto a = exact_shapley(glove_game());
  EXPECT_EQ(a.numerators[0], 4'000'000);
  EXPECT_EQ(a.numerators[1], 1'000'000);
  EXPECT_EQ(a.numerators[2], 1'000'000);
  const auto mu = a.as_fixed();
  EXPECT_EQ(mu[0].raw, 666'667);
  EXPECT_EQ(mu[1].raw, 166'667);
  EXPECT_EQ(mu[2].raw, 166'666);
}

TEST(Shapley, ThirdsRoundToExactTotal) {
  CharacteristicTable t(3);
  t.set(CoalitionMask::full(3), FixedValue{kScale});
  const auto mu = exact_shapley(t).as_fixed();
  EXPECT_EQ(mu[0].raw, 333'334);
  EXPECT_EQ(mu[1].raw, 333'333);
  EXPECT_EQ(mu[2].raw, 333'333);
}

TEST(Shapley, TwoPlayer) {
  CharacteristicTable t(2, {FixedValue{0}, FixedValue{kScale}, FixedValue{3 * kScale}, FixedValue{5 * kScale}});
  const auto a = exact_shapley(t);
  EXPECT_EQ(a.numerators[0], 3'000'000);
  EXPECT_EQ(a.numerators[1], 7'000'000);
  EXPECT_EQ(a.as_fixed(0).raw, 1'500'000);
  EXPECT_EQ(a.as_fixed(1).raw, 3'500'000);
}

TEST(Shapley, WeightedMajority) {
  // Weights (2,1,1,1), quota 3: the heavy player gets 1/2, the others 1/6 each.
  CharacteristicTable t(4);
  const int w[] = {2, 1, 1, 1};
  for (std::uint32_t s = 0; s < 16; ++s) {
    int total = 0;
    for (unsigned i = 0; i < 4; ++i) total += CoalitionMask(s).contains(i) ? w[i] : 0;
    if (total >= 3) t.set(CoalitionMask(s), FixedValue{kScale});
  }
  const auto a = exact_shapley(t);
  EXPECT_EQ(a.numerators[0], 12'000'000);
  for (unsigned i = 1; i < 4; ++i) EXPECT_EQ(a.numerators[i], 4'000'000);
}

TEST(Shapley, SingleAgentGetsEverything) {
  CharacteristicTable t(1, {FixedValue{0}, FixedValue{-42}});
  EXPECT_EQ(exact_shapley(t).as_fixed(0).raw, -42);
}

TEST(Shapley, MatchesPermutationOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const unsigned n = 2 + static_cast<unsigned>(rng.below(6));
    const auto t = random_game(n, rng);
    EXPECT_EQ(exact_shapley(t), permutation_oracle(t)) << "n=" << n;
  }
}

TEST(Shapley, EfficiencyExactAtSixteen) {
  Rng rng(3);
  const auto t = random_game(16, rng, kMaxAbsRaw);
  const auto a = exact_shapley(t);
  EXPECT_EQ(a.numerator_sum(), factorial(16) * t.grand_value().raw);
  std::int64_t total = 0;
  for (auto v : a.as_fixed()) total += v.raw;
  EXPECT_EQ(total, t.grand_value().raw);
}

TEST(Shapley, RejectsUnnormalizedAndOutOfRange) {
  CharacteristicTable t(2);
  t.set(CoalitionMask::empty(), FixedValue{1});
  EXPECT_THROW(exact_shapley(t), Error);
  EXPECT_NO_THROW(exact_shapley(normalize(t)));
  CharacteristicTable big(2);
  big.set(CoalitionMask(3), FixedValue{kMaxAbsRaw + 1});
  try {
    exact_shapley(big);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOverflow);
  }
  EXPECT_THROW(exact_shapley(CharacteristicTable(17)), Error);
  EXPECT_THROW(permutation_oracle(CharacteristicTable(9)), Error);
}

TEST(Shapley, Axioms) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const unsigned n = 2 + static_cast<unsigned>(rng.below(5));
    auto t = random_game(n, rng);
    // Dummy: make agent n-1 add exactly its standalone value everywhere.
    const unsigned d = n - 1;
    const std::int64_t c = static_cast<std::int64_t>(rng.below(1000));
    for (std::uint32_t s = 0; s < t.size(); ++s) {
      CoalitionMask m(s);
      if (m.contains(d)) t.set(m, FixedValue{t[m.without(d)].raw + c});
    }
    const auto a = exact_shapley(t);
    EXPECT_EQ(a.numerators[d], factorial(n) * c);

    // Additivity.
    const auto u = random_game(n, rng);
    const auto sum = exact_shapley(t + u);
    const auto b = exact_shapley(u);
    for (unsigned i = 0; i < n; ++i) EXPECT_EQ(sum.numerators[i], a.numerators[i] + b.numerators[i]);
  }
}

TEST(Shapley, SymmetryUnderSwap) {
  // A game invariant under swapping agents 0 and 1 gives them equal numerators.
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = random_game(4, rng);
    for (std::uint32_t s = 0; s < 16; ++s) {
      const std::uint32_t swapped = (s & ~3U) | ((s & 1U) << 1) | ((s & 2U) >> 1);
      if (swapped > s) t.set(CoalitionMask(swapped), t[CoalitionMask(s)]);
    }
    const auto a = exact_shapley(t);
    EXPECT_EQ(a.numerators[0], a.numerators[1]);
  }
}

TEST(Rounding, NegativeNumerators) {
  const Int128 nums[] = {-5, -7, 12};
  const auto r = largest_remainder_round(nums, 6);
  EXPECT_EQ(r[0] + r[1] + r[2], 0);
  EXPECT_EQ(r[0], -1);
  EXPECT_EQ(r[1], -1);
  EXPECT_EQ(r[2], 2);
}

TEST(MonteCarlo, ConvergesAndIsDeterministic) {
  const auto t = glove_game();
  const auto a = monte_carlo_shapley(t, 20000, 1);
  const auto b = monte_carlo_shapley(t, 20000, 1);
  EXPECT_EQ(a.estimates, b.estimates);
  const auto exact = exact_shapley(t).as_fixed();
  for (unsigned i = 0; i < 3; ++i) {
    EXPECT_NEAR(static_cast<double>(a.estimates[i].raw), static_cast<double>(exact[i].raw), 5 * a.std_errors[i] + 1);
  }
  EXPECT_EQ(monte_carlo_shapley(t, 1, 1).std_errors[0], 0.0);
  EXPECT_THROW(monte_carlo_shapley(t, 0, 1), Error);
}

TEST(Diagnostics, SuperadditivityAndCollusion) {
  const auto s = check_superadditivity(glove_game());
  EXPECT_EQ(s.surplus, kScale);
  EXPECT_TRUE(s.superadditive);

  const auto t = glove_game();
  auto inflated = t;
  inflated.set(CoalitionMask(0b011), FixedValue{2 * kScale});
  const auto r = collusion_gain(t, exact_shapley(t), exact_shapley(inflated), CoalitionMask(0b011));
  EXPECT_GT(r.gain, 0);
  EXPECT_DOUBLE_EQ(r.bound, 2.0 / 3.0 * kScale);
  EXPECT_DOUBLE_EQ(r.slack_term, 4.0 / 3.0);
}

TEST(GameIo, BinaryRoundTrip) {
  Rng rng(2);
  const auto t = random_game(5, rng);
  EXPECT_EQ(decode_table(encode_table(t)), t);
  auto bytes = encode_table(t);
  bytes.push_back(0);
  EXPECT_THROW(decode_table(bytes), Error);
  bytes.resize(10);
  EXPECT_THROW(decode_table(bytes), Error);
}

TEST(GameIo, CsvRoundTripAndErrors) {
  Rng rng(4);
  const auto t = random_game(3, rng);
  EXPECT_EQ(table_from_csv(table_to_csv(t)), t);
  const auto b = table_from_csv("mask,value\n0b00,0\n0b01,1.5\n0b10,-0.25\n0b11,2\n");
  EXPECT_EQ(b[CoalitionMask(1)].raw, 1'500'000);
  EXPECT_EQ(b[CoalitionMask(2)].raw, -250'000);
  EXPECT_THROW(table_from_csv("mask,value\n0,0\n1,1\n1,2\n"), Error);
  EXPECT_THROW(table_from_csv("mask,value\n0,0\n1,1\n3,2\n"), Error);
  EXPECT_THROW(table_from_csv("mask,value\n0,0\n1,1\n2,1\n"), Error);
  EXPECT_THROW(table_from_csv("mask,value\n0,0\n1,1.0000001\n"), Error);
}

TEST(GameIo, FixedFormatting) {
  EXPECT_EQ(format_fixed(FixedValue{-1'500'000}), "-1.500000");
  EXPECT_EQ(format_fixed(FixedValue{7}), "0.000007");
  EXPECT_EQ(format_fixed(FixedValue{INT64_MIN}), "-9223372036854.775808");
  EXPECT_EQ(parse_fixed("-0.5").raw, -500'000);
  EXPECT_EQ(parse_fixed(".25").raw, 250'000);
  EXPECT_THROW(parse_fixed("abc"), Error);
  EXPECT_THROW(parse_fixed("-"), Error);
}

}  // namespace
}  // namespace dao
