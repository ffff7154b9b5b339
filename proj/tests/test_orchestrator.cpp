// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "dao/dao.hpp"

namespace dao {
namespace {

PriceSeries rising(std::size_t steps) {
  std::vector<double> p{100.0};
  for (std::size_t t = 1; t < steps; ++t) p.push_back(p.back() * (1.0 + 0.01 * static_cast<double>(1 + t % 3)));
  return PriceSeries(std::move(p));
}

TEST(Valuation, ZeroSignalsAreWorthNothing) {
  const auto prices = rising(10);
  const std::vector<std::vector<std::int32_t>> zeros{std::vector<std::int32_t>(10, 0)};
  EXPECT_EQ(evaluate_signals(zeros, prices).raw, 0);
  EXPECT_EQ(evaluate_signals({}, prices).raw, 0);
}

TEST(Valuation, LongOnRisingSeriesIsPositiveAndSignSymmetric) {
  const auto prices = rising(10);
  const std::vector<std::vector<std::int32_t>> lng{std::vector<std::int32_t>(10, kScale)};
  const std::vector<std::vector<std::int32_t>> sht{std::vector<std::int32_t>(10, -kScale)};
  const auto v = evaluate_signals(lng, prices);
  EXPECT_GT(v.raw, 0);
  EXPECT_EQ(evaluate_signals(sht, prices).raw, -v.raw);
  // Returns 2%,3%,1% repeated three times: mean 0.02, sample sd sqrt(0.0006/8).
  EXPECT_NEAR(static_cast<double>(v.raw), 0.02 / std::sqrt(0.0006 / 8.0) * kScale, 1.0);
}

TEST(Valuation, CoalitionUsesMeanSignal) {
  const auto prices = PriceSeries::generate(PriceParams{});
  std::vector<std::int32_t> a(prices.size()), b(prices.size()), mean(prices.size());
  Rng rng(3);
  for (std::size_t t = 0; t < a.size(); ++t) {
    a[t] = static_cast<std::int32_t>(rng.below(2 * kScale + 1)) - kScale;
    b[t] = static_cast<std::int32_t>(rng.below(kScale)) * 2 - kScale;
    if ((a[t] + b[t]) % 2 != 0) ++b[t];
    mean[t] = (a[t] + b[t]) / 2;
  }
  const std::vector<std::vector<std::int32_t>> pair{a, b}, one{mean};
  EXPECT_EQ(evaluate_signals(pair, prices).raw, evaluate_signals(one, prices).raw);
  const std::vector<std::vector<std::int32_t>> short_signal{std::vector<std::int32_t>(3, 0)};
  EXPECT_THROW(evaluate_signals(short_signal, prices), Error);
}

TEST(Agents, DeterministicRolesAndSkills) {
  const auto a = make_agents(2, 1, 1, 9);
  const auto b = make_agents(2, 1, 1, 9);
  ASSERT_EQ(a.size(), 4U);
  EXPECT_EQ(a[0].role, AgentRole::kDataAnalysis);
  EXPECT_EQ(a[2].role, AgentRole::kMarketPerspective);
  EXPECT_EQ(a[3].role, AgentRole::kDecision);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].skill, b[i].skill);
    const auto r = role_skill_range(a[i].role);
    EXPECT_GE(a[i].skill, r.lo);
    EXPECT_LE(a[i].skill, r.hi);
  }
  const auto prices = PriceSeries::generate(PriceParams{});
  EXPECT_EQ(a[1].output(prices), b[1].output(prices));
  const auto sig = a[1].signals(prices);
  EXPECT_EQ(SyntheticAgent::decode_signals(SyntheticAgent::encode_signals(sig)), sig);
}

TEST(Phase1, CommitsEveryCoalitionTwice) {
  for (unsigned n : {1U, 4U}) {
    Environment env;
    const auto cfg = RunConfig::for_agents(n);
    const auto st = run_phase1(env, make_agents(cfg.data_analysis, cfg.market_perspective, cfg.decision, cfg.seed),
                               PriceSeries::generate(cfg.price));
    EXPECT_EQ(env.ledger.cid_count(), 1U << n);
    EXPECT_EQ(env.ledger.value_hash_count(), 1U << n);
    EXPECT_EQ(env.ledger.height(), 2ULL << n);
    EXPECT_EQ(st.reported_values[0].raw, 0);
    const auto p2 = run_phase2(env, st);
    EXPECT_TRUE(p2.ok) << p2.reason;
  }
}

TEST(Run, HonestFourAgentsSettle) {
  const auto out = run_honest(RunConfig::for_agents(4));
  const auto& r = out.report;
  ASSERT_TRUE(r.settled()) << r.abort_reason;
  std::int64_t total = 0;
  for (const auto& l : r.lines) {
    ASSERT_TRUE(l.payout);
    EXPECT_EQ(*l.payout, l.allocation);
    total += *l.payout;
  }
  EXPECT_EQ(total, *r.grand_value);
  EXPECT_EQ(r.constraints, 69U);
  EXPECT_EQ(r.k, 64U);
  EXPECT_EQ(r.ledger_height, 33U);
  EXPECT_TRUE(Ledger::replay(out.journal).ok);
}

TEST(Run, Deterministic) {
  const auto cfg = RunConfig::for_agents(5, 11);
  const auto a = run_honest(cfg);
  const auto b = run_honest(cfg);
  EXPECT_EQ(report_to_json(a.report).dump(), report_to_json(b.report).dump());
  EXPECT_EQ(a.proof, b.proof);
  EXPECT_EQ(a.journal, b.journal);
  EXPECT_EQ(report_to_text(a.report), report_to_text(b.report));
}

TEST(Run, NullScenarioMatchesHonest) {
  auto cfg = RunConfig::for_agents(4, 5);
  cfg.scenario.kind = ScenarioKind::kNone;
  const auto a = run_scenario(cfg);
  const auto b = run_honest(cfg);
  EXPECT_EQ(report_to_json(a.report).dump(), report_to_json(b.report).dump());
  EXPECT_EQ(a.proof, b.proof);
}

TEST(Attack, OutputManipulationAbortsInPhase2) {
  auto cfg = RunConfig::for_agents(4);
  cfg.scenario.kind = ScenarioKind::kOutputManipulation;
  cfg.scenario.coalition = 0b0110;
  const auto r = run_scenario(cfg).report;
  EXPECT_EQ(r.status, "aborted");
  EXPECT_EQ(r.abort_phase, 2);
  EXPECT_EQ(r.failing_coalition, 6U);
  EXPECT_NE(r.abort_reason.find("output set mismatch for coalition 6"), std::string::npos) << r.abort_reason;
}

TEST(Attack, ValueTamperAbortsInPhase2) {
  auto cfg = RunConfig::for_agents(4);
  cfg.scenario.kind = ScenarioKind::kValueTamper;
  const auto r = run_scenario(cfg).report;
  EXPECT_EQ(r.abort_phase, 2);
  EXPECT_EQ(r.failing_coalition, 15U);
  EXPECT_NE(r.abort_reason.find("value hash mismatch for coalition 15"), std::string::npos) << r.abort_reason;
}

TEST(Attack, AllocationTamperRejectedUnderFullCheck) {
  auto cfg = RunConfig::for_agents(4);
  cfg.scenario.kind = ScenarioKind::kAllocationTamper;
  cfg.full_check = true;
  const auto out = run_scenario(cfg);
  EXPECT_EQ(out.report.abort_phase, 4);
  EXPECT_EQ(out.report.abort_reason, kAbortProofInvalid);
  EXPECT_EQ(out.report.violated_constraints, 2U);
  EXPECT_EQ(*out.report.predicted_acceptance, 0.0);
  for (const auto& l : out.report.lines) EXPECT_FALSE(l.payout);
}

TEST(Attack, AllocationTamperSpotCheckPrediction) {
  auto cfg = RunConfig::for_agents(4);
  cfg.scenario.kind = ScenarioKind::kAllocationTamper;
  cfg.k = 8;
  cfg.allow_deficit = true;
  const auto r = run_scenario(cfg).report;
  EXPECT_NEAR(*r.predicted_acceptance, std::pow(1.0 - 2.0 / 69.0, 8), 1e-12);
  if (!r.settled()) {
    EXPECT_EQ(r.abort_reason, kAbortProofInvalid);
  }
}

TEST(Attack, CollusionSettlesWithReport) {
  auto cfg = RunConfig::for_agents(4);
  cfg.scenario.kind = ScenarioKind::kCollusion;
  const auto out = run_scenario(cfg);
  const auto& r = out.report;
  EXPECT_TRUE(r.settled()) << r.abort_reason;
  ASSERT_TRUE(r.collusion);
  EXPECT_EQ(r.collusion->colluders.bits(), 0b11U);
  EXPECT_GT(r.collusion->gain, 0);
  const auto honest = run_honest(RunConfig::for_agents(4));
  EXPECT_EQ(*r.grand_value, *honest.report.grand_value);
}

TEST(Attack, WithholdingLowersShare) {
  auto cfg = RunConfig::for_agents(4);
  cfg.scenario.kind = ScenarioKind::kWithholding;
  const auto r = run_scenario(cfg).report;
  ASSERT_TRUE(r.withholding_agent && r.honest_share && r.degraded_share);
  EXPECT_EQ(*r.withholding_agent, 0U);
  EXPECT_LT(*r.degraded_share, *r.honest_share);
}

TEST(Attack, ScenarioPreconditions) {
  auto cfg = RunConfig::for_agents(1);
  cfg.scenario.kind = ScenarioKind::kCollusion;
  EXPECT_THROW(run_scenario(cfg), Error);
  cfg = RunConfig::for_agents(3);
  cfg.scenario.kind = ScenarioKind::kWithholding;
  cfg.scenario.agents = {7};
  EXPECT_THROW(run_scenario(cfg), Error);
}

TEST(Config, ParsesAndRejects) {
  const auto c = RunConfig::from_kv(KeyValueConfig::parse(
      "agents = 5\ndata_analysis = 2\nmarket_perspective = 2\ndecision = 1\nseed = 3\nk = 16\n"
      "scenario = collusion\nscenario_agents = 1,3\nscenario_coalition = 0b101\ndelta = 0.25\n"));
  EXPECT_EQ(c.agents(), 5U);
  EXPECT_EQ(c.seed, 3U);
  EXPECT_EQ(c.price.seed, 3U);
  EXPECT_EQ(c.k, 16U);
  EXPECT_EQ(c.scenario.kind, ScenarioKind::kCollusion);
  EXPECT_EQ(c.scenario.agents, (std::vector<unsigned>{1, 3}));
  EXPECT_EQ(*c.scenario.coalition, 5U);
  EXPECT_EQ(c.scenario.delta.raw, 250000);
  EXPECT_EQ(parse_scenario("A4"), ScenarioKind::kCollusion);
  EXPECT_EQ(parse_scenario("A3_allocation_tamper"), ScenarioKind::kAllocationTamper);
  EXPECT_THROW(parse_scenario("tamper"), Error);

  for (const char* bad : {"agents = 3\n", "k = 0\n", "colour = red\n", "scenario = A9\n", "data_analysis = 20\n",
                          "scenario_agents = 9\n", "degradation = 1.5\n", "price_steps = 1\n"}) {
    EXPECT_THROW(RunConfig::from_kv(KeyValueConfig::parse(bad)), Error) << bad;
  }
}

TEST(Bench, ProofBenchVerifies) {
  const auto b = bench_proof(4, 64, 42, GasModel::calibrated());
  EXPECT_TRUE(b.verified);
  EXPECT_EQ(b.trace_rows, 52U);
  EXPECT_EQ(b.constraints, 69U);
  EXPECT_EQ(b.merkle_depth, 6U);
  EXPECT_EQ(b.hybrid_units, GasModel::calibrated().verify_constant);
}

}  // namespace
}  // namespace dao
