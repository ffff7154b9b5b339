// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "dao/dao.hpp"
#include "test_util.hpp"

namespace dao {
namespace {

using testing::honest_public_inputs;
using testing::random_game;
using testing::synthetic_outputs;

struct Setup {
  WitnessTrace trace;
  PublicInputs pub;
  ConstraintSystem cs;
};

Setup honest(unsigned n, std::uint64_t seed) {
  Rng rng(seed);
  const auto table = random_game(n, rng);
  const auto outputs = synthetic_outputs(n, seed);
  return Setup{build_witness(table, outputs), honest_public_inputs(table, outputs), build_constraints(n)};
}

TEST(Prove, TwoAgentsTwentyOpenings) {
  const auto s = honest(2, 1);
  const Proof p = prove(s.trace, s.cs, s.pub, 20);
  EXPECT_EQ(p.openings.size(), 20U);
  EXPECT_TRUE(verify(p, s.pub, s.cs).accepted);
}

TEST(Prove, ExhaustiveModeOpensEverythingInOrder) {
  const auto s = honest(3, 2);
  const auto k = static_cast<std::uint32_t>(s.cs.size());
  const Proof p = prove(s.trace, s.cs, s.pub, k);
  ASSERT_EQ(p.openings.size(), s.cs.size());
  for (std::uint32_t i = 0; i < k; ++i) EXPECT_EQ(p.openings[i].constraint_index, i);
  EXPECT_TRUE(verify(p, s.pub, s.cs).accepted);
}

TEST(Prove, DeterministicBytes) {
  const auto s = honest(4, 3);
  EXPECT_EQ(prove(s.trace, s.cs, s.pub, 64).serialize(), prove(s.trace, s.cs, s.pub, 64).serialize());
}

TEST(Prove, RefusesUnsatisfiedTraceAndZeroK) {
  auto s = honest(3, 4);
  EXPECT_THROW(prove(s.trace, s.cs, s.pub, 0), Error);
  std::get<FinalRow>(s.trace.rows.back()).mu.raw += 1;
  try {
    prove(s.trace, s.cs, s.pub, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnsatisfied);
  }
  EXPECT_NO_THROW(prove_dishonest(s.trace, s.cs, s.pub, 8));
}

TEST(Proof, SerializationRoundTrip) {
  const auto s = honest(3, 5);
  const Proof p = prove(s.trace, s.cs, s.pub, 16);
  EXPECT_EQ(Proof::parse(p.serialize()), p);
  EXPECT_EQ(Proof::from_hex(p.to_hex()), p);
  EXPECT_TRUE(verify_bytes(p.serialize(), s.pub, s.cs).accepted);
}

TEST(Verify, CompletenessAcrossRandomGames) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const unsigned n = 1 + static_cast<unsigned>(rng.below(10));
    const auto s = honest(n, 1000 + trial);
    const auto r = verify(prove(s.trace, s.cs, s.pub, 32), s.pub, s.cs);
    EXPECT_TRUE(r.accepted) << "n=" << n << " " << r.reason;
  }
}

TEST(Verify, BindsPublicInputs) {
  const auto s = honest(3, 7);
  const Proof p = prove(s.trace, s.cs, s.pub, 16);
  auto other = s.pub;
  other.task_nonce = 99;
  other.seal();
  const auto r = verify(p, other, s.cs);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, "public digest mismatch");
}

TEST(Verify, SingleByteMutationsAllRejected) {
  const auto s = honest(3, 8);
  const Bytes bytes = prove(s.trace, s.cs, s.pub, 24).serialize();
  Rng rng(8);
  for (int trial = 0; trial < 3000; ++trial) {
    Bytes m = bytes;
    const auto pos = rng.below(m.size());
    m[pos] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    EXPECT_FALSE(verify_bytes(m, s.pub, s.cs).accepted) << "byte " << pos;
  }
}

TEST(Verify, StructuralRejections) {
  const auto s = honest(3, 9);
  const Proof p = prove(s.trace, s.cs, s.pub, 8);

  auto fewer = p;
  fewer.openings.pop_back();
  EXPECT_EQ(verify(fewer, s.pub, s.cs).reason, "wrong opening count");

  auto short_path = p;
  short_path.openings[0].rows[0].path.pop_back();
  EXPECT_EQ(verify(short_path, s.pub, s.cs).reason, "bad authentication path length");

  auto tampered = p;
  tampered.openings[0].rows[0].row_bytes.back() ^= 1;
  EXPECT_EQ(verify(tampered, s.pub, s.cs).reason, "authentication path mismatch");

  auto flipped_path = p;
  flipped_path.openings[0].rows[0].path[0].bytes[0] ^= 1;
  EXPECT_EQ(verify(flipped_path, s.pub, s.cs).reason, "authentication path mismatch");

  EXPECT_FALSE(verify_bytes(Bytes{1, 2, 3}, s.pub, s.cs).accepted);
}

TEST(Verify, FullCheckRejectsAnyViolation) {
  auto s = honest(3, 10);
  const TraceLayout layout(3);
  for (std::uint32_t r = 0; r < layout.row_count(); ++r) {
    auto t = s.trace;
    std::visit(
        [](auto& row) {
          using T = std::decay_t<decltype(row)>;
          if constexpr (std::is_same_v<T, CoalitionRow>) {
            row.value.raw += 3;
          } else if constexpr (std::is_same_v<T, AccumRow>) {
            row.acc += 3;
          } else {
            row.phi += 3;
          }
        },
        t.rows[r]);
    const Proof p = prove_dishonest(t, s.cs, s.pub, static_cast<std::uint32_t>(s.cs.size()));
    EXPECT_FALSE(verify(p, s.pub, s.cs).accepted) << "row " << r;
  }
}

TEST(Verify, SingleViolationAcceptanceNearClosedForm) {
  auto s = honest(3, 11);
  std::get<CoalitionRow>(s.trace.rows[5]).digests[0].bytes[0] ^= 1;
  ASSERT_EQ(violated_constraints(s.cs, s.trace, s.pub).size(), 1U);
  const std::uint32_t k = 8;
  const int trials = 3000;
  int accepted = 0;
  for (int t = 0; t < trials; ++t) {
    auto pub = s.pub;
    pub.task_nonce = static_cast<std::uint64_t>(t);
    pub.seal();
    accepted += verify(prove_dishonest(s.trace, s.cs, pub, k), pub, s.cs).accepted;
  }
  const double p = std::pow(1.0 - 1.0 / static_cast<double>(s.cs.size()), k);
  const double sigma = std::sqrt(trials * p * (1 - p));
  EXPECT_NEAR(accepted, trials * p, 3 * sigma);
}

TEST(VerifierCost, GrowsWithKAndDepth) {
  const auto model = GasModel::calibrated();
  const auto s = honest(5, 12);
  const Proof p32 = prove(s.trace, s.cs, s.pub, 32);
  const Proof p64 = prove(s.trace, s.cs, s.pub, 64);
  const auto c32 = verifier_cost(p32, s.pub, model);
  const auto c64 = verifier_cost(p64, s.pub, model);
  EXPECT_GT(c64, c32);
  EXPECT_LE(static_cast<double>(c64), 2.1 * static_cast<double>(c32));
}

TEST(Sampling, IndicesInRangeAndSeedBound) {
  Digest root = sha256(as_bytes("root"));
  Digest pd = sha256(as_bytes("pub"));
  const auto a = sample_constraints(root, pd, 100, 69);
  ASSERT_EQ(a.size(), 100U);
  for (auto i : a) EXPECT_LT(i, 69U);
  pd.bytes[0] ^= 1;
  EXPECT_NE(sample_constraints(root, pd, 100, 69), a);
}

}  // namespace
}  // namespace dao
