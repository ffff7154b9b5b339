// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end settlement pipeline over synthetic trading agents, plus the
// adversary harness.
//
//   phase 1  every coalition runs, output hash sets are stored and committed,
//            values are hashed and committed
//   phase 2  the coordinator re-checks every output set and value against the
//            ledger, then computes exact Shapley shares
//   phase 3  witness, constraints, public inputs, proof
//   phase 4  on-ledger verification and settlement

#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dao/circuit.hpp"
#include "dao/commitment.hpp"
#include "dao/game.hpp"
#include "dao/game_io.hpp"
#include "dao/gas.hpp"
#include "dao/kv_config.hpp"
#include "dao/ledger.hpp"
#include "dao/proof.hpp"
#include "dao/public_inputs.hpp"
#include "dao/trading.hpp"

namespace dao {

enum class ScenarioKind { kNone, kOutputManipulation, kValueTamper, kAllocationTamper, kCollusion, kWithholding };

inline const char* scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kNone:
      return "none";
    case ScenarioKind::kOutputManipulation:
      return "A1";
    case ScenarioKind::kValueTamper:
      return "A2";
    case ScenarioKind::kAllocationTamper:
      return "A3";
    case ScenarioKind::kCollusion:
      return "A4";
    case ScenarioKind::kWithholding:
      return "A5";
  }
  return "?";
}

/// Accepts the short id ("A3"), the long form ("A3_allocation_tamper") or the bare name ("allocation_tamper").
inline ScenarioKind parse_scenario(std::string_view name) {
  if (name.empty() || name == "none") return ScenarioKind::kNone;
  const std::pair<const char*, ScenarioKind> table[] = {
      {"A1", ScenarioKind::kOutputManipulation}, {"A1_output_manipulation", ScenarioKind::kOutputManipulation},
      {"A2", ScenarioKind::kValueTamper},        {"A2_value_tamper", ScenarioKind::kValueTamper},
      {"A3", ScenarioKind::kAllocationTamper},   {"A3_allocation_tamper", ScenarioKind::kAllocationTamper},
      {"A4", ScenarioKind::kCollusion},          {"A4_collusion", ScenarioKind::kCollusion},
      {"A5", ScenarioKind::kWithholding},        {"A5_withholding", ScenarioKind::kWithholding},
  };
  for (const auto& [key, kind] : table) {
    const std::string_view k(key);
    if (name == k || (k.size() > 3 && name == k.substr(3))) return kind;
  }
  throw Error(Errc::kParse, "unknown scenario '" + std::string(name) + "'");
}

struct AdversaryScenario {
  ScenarioKind kind = ScenarioKind::kNone;
  /// A4 colluders (default {0, 1}), A5 withholding agent (first entry, default 0).
  std::vector<unsigned> agents;
  /// A1/A2 target coalition; defaults to the grand coalition.
  std::optional<std::uint32_t> coalition;
  double degradation = 1.0;
  FixedValue delta{kScale / 10};
};

struct RunConfig {
  unsigned data_analysis = 2;
  unsigned market_perspective = 1;
  unsigned decision = 1;
  std::uint64_t seed = 42;
  PriceParams price;
  std::uint32_t k = kDefaultSpotChecks;
  bool full_check = false;
  bool allow_deficit = false;
  std::uint64_t nonce = 0;
  std::string gas_model_path;
  AdversaryScenario scenario;

  unsigned agents() const { return data_analysis + market_perspective + decision; }

  /// Two data-analysis agents and one decision agent, the rest market-perspective.
  static RunConfig for_agents(unsigned n, std::uint64_t seed = 42) {
    if (n < 1 || n > kMaxExactAgents) throw Error(Errc::kInvalidArgument, "agent count out of range");
    RunConfig c;
    c.seed = seed;
    c.price.seed = seed;
    c.decision = 1;
    c.data_analysis = std::min(2U, n - 1);
    c.market_perspective = n - 1 - c.data_analysis;
    return c;
  }

  static RunConfig from_kv(const KeyValueConfig& kv) {
    kv.require_known({"agents", "data_analysis", "market_perspective", "decision", "seed", "price_steps", "drift",
                      "volatility", "initial_price", "price_seed", "k", "nonce", "full_check", "allow_deficit",
                      "gas_model", "scenario", "scenario_agents", "scenario_coalition", "degradation", "delta"});
    RunConfig c;
    auto u32 = [&](const char* key, unsigned fallback) {
      const auto v = kv.get_u64(key, fallback);
      if (v > 0xffffffffULL) throw Error(Errc::kParse, std::string("value too large for '") + key + "'");
      return static_cast<unsigned>(v);
    };
    c.data_analysis = u32("data_analysis", c.data_analysis);
    c.market_perspective = u32("market_perspective", c.market_perspective);
    c.decision = u32("decision", c.decision);
    if (kv.has("agents") && u32("agents", 0) != c.agents()) {
      throw Error(Errc::kParse, "'agents' disagrees with the role counts");
    }
    if (c.agents() < 1 || c.agents() > kMaxExactAgents) throw Error(Errc::kParse, "agent count must be in [1, 16]");
    c.seed = kv.get_u64("seed", c.seed);
    c.price.seed = kv.get_u64("price_seed", c.seed);
    c.price.steps = u32("price_steps", c.price.steps);
    c.price.drift = kv.get_double("drift", c.price.drift);
    c.price.volatility = kv.get_double("volatility", c.price.volatility);
    c.price.initial = kv.get_double("initial_price", c.price.initial);
    if (c.price.steps < 2) throw Error(Errc::kParse, "price_steps must be >= 2");
    if (!(c.price.volatility >= 0) || !(c.price.initial > 0)) throw Error(Errc::kParse, "bad price parameters");
    c.k = u32("k", c.k);
    if (c.k < 1) throw Error(Errc::kParse, "k must be >= 1");
    c.nonce = kv.get_u64("nonce", c.nonce);
    c.full_check = kv.get_bool("full_check", c.full_check);
    c.allow_deficit = kv.get_bool("allow_deficit", c.allow_deficit);
    c.gas_model_path = kv.get_string("gas_model", "");
    c.scenario.kind = parse_scenario(kv.get_string("scenario", "none"));
    c.scenario.degradation = kv.get_double("degradation", c.scenario.degradation);
    if (!(c.scenario.degradation >= 0.0 && c.scenario.degradation <= 1.0)) {
      throw Error(Errc::kParse, "degradation must be in [0, 1]");
    }
    if (kv.has("delta")) c.scenario.delta = parse_fixed(kv.get_string("delta", ""));
    if (kv.has("scenario_coalition")) {
      std::string text = kv.get_string("scenario_coalition", "");
      std::uint32_t mask = 0;
      int base = 10;
      std::string_view digits(text);
      if (digits.starts_with("0b")) {
        digits.remove_prefix(2);
        base = 2;
      }
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), mask, base);
      if (ec != std::errc() || p != digits.data() + digits.size()) throw Error(Errc::kParse, "bad scenario_coalition");
      if (mask >= (1U << c.agents())) throw Error(Errc::kParse, "scenario_coalition outside the agent set");
      c.scenario.coalition = mask;
    }
    if (kv.has("scenario_agents")) {
      std::stringstream ss(kv.get_string("scenario_agents", ""));
      std::string item;
      while (std::getline(ss, item, ',')) {
        unsigned a = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), a);
        if (ec != std::errc() || p != item.data() + item.size() || a >= c.agents()) {
          throw Error(Errc::kParse, "bad scenario_agents entry '" + item + "'");
        }
        c.scenario.agents.push_back(a);
      }
    }
    return c;
  }

  static RunConfig load(const std::filesystem::path& path) { return from_kv(KeyValueConfig::load(path)); }
};

/// Content store and ledger for one task.
struct Environment {
  std::unique_ptr<ContentStore> store;
  Ledger ledger;

  explicit Environment(GasModel model = GasModel::calibrated(),
                       const std::optional<std::filesystem::path>& persist = std::nullopt)
      : store(persist ? std::make_unique<ContentStore>(*persist) : std::make_unique<ContentStore>()), ledger(model) {}
};

/// Off-chain material after phase 1: what the coordinator receives, plus ledger handles.
struct CommittedState {
  unsigned n = 0;
  std::vector<SyntheticAgent> agents;
  std::vector<std::vector<OutputRecord>> outputs;
  std::vector<FixedValue> reported_values;
  std::vector<Cid> cids;
  std::vector<Digest> value_hashes;
  std::vector<TxReceipt> receipts;
};

using ValueAdjust = std::function<void(std::vector<FixedValue>&)>;

inline CommittedState run_phase1(Environment& env, const std::vector<SyntheticAgent>& agents, const PriceSeries& prices,
                                 const ValueAdjust& before_commit = {}) {
  const unsigned n = static_cast<unsigned>(agents.size());
  if (n < 1 || n > kMaxExactAgents) throw Error(Errc::kInvalidArgument, "agent count out of range");
  std::vector<OutputRecord> own;
  own.reserve(n);
  for (const auto& a : agents) own.push_back(a.output(prices));

  CommittedState st;
  st.n = n;
  st.agents = agents;
  const std::uint32_t count = 1U << n;
  st.outputs.resize(count);
  st.reported_values.resize(count);
  for (std::uint32_t bits = 0; bits < count; ++bits) {
    const CoalitionMask s(bits);
    for (unsigned i = 0; i < n; ++i) {
      if (s.contains(i)) st.outputs[bits].push_back(own[i]);
    }
    st.reported_values[bits] = bits == 0 ? FixedValue{0} : evaluate_coalition(st.outputs[bits], prices);
  }
  if (before_commit) before_commit(st.reported_values);
  for (std::uint32_t bits = 0; bits < count; ++bits) {
    const CoalitionMask s(bits);
    const Cid cid = env.store->store(HashSet::of(st.outputs[bits]));
    st.cids.push_back(cid);
    st.receipts.push_back(env.ledger.commit_cid(s, cid));
    const Digest vh = hash_value(st.reported_values[bits], s);
    st.value_hashes.push_back(vh);
    st.receipts.push_back(env.ledger.commit_value_hash(s, vh));
  }
  return st;
}

struct Phase2Result {
  bool ok = false;
  std::string reason;
  std::optional<std::uint32_t> failing_coalition;
  std::optional<CharacteristicTable> table;
  std::optional<ShapleyAllocation> allocation;
};

/// Coordinator checks in ascending coalition order; the first failure aborts.
inline Phase2Result run_phase2(Environment& env, const CommittedState& st) {
  Phase2Result r;
  auto fail = [&](std::uint32_t bits, std::string why) {
    r.ok = false;
    r.failing_coalition = bits;
    r.reason = std::move(why);
    return r;
  };
  for (std::uint32_t bits = 0; bits < st.outputs.size(); ++bits) {
    const CoalitionMask s(bits);
    const std::string which = "coalition " + std::to_string(bits);
    try {
      if (!accept_outputs(*env.store, st.outputs[bits], env.ledger.get_cid(s))) {
        return fail(bits, "output set mismatch for " + which);
      }
    } catch (const Error& e) {
      return fail(bits, "output set unavailable for " + which + ": " + e.what());
    }
    if (hash_value(st.reported_values[bits], s) != env.ledger.get_value_hash(s)) {
      return fail(bits, "value hash mismatch for " + which);
    }
  }
  CharacteristicTable table(st.n, st.reported_values);
  try {
    r.allocation = exact_shapley(table);
  } catch (const Error& e) {
    r.reason = std::string("shapley computation failed: ") + e.what();
    return r;
  }
  r.table = std::move(table);
  r.ok = true;
  return r;
}

struct Phase34Result {
  Settlement settlement;
  PublicInputs pub;
  Proof proof;
  std::size_t constraints = 0;
  std::size_t trace_rows = 0;
  std::uint32_t k = 0;
  std::size_t violated = 0;
  bool verifier_accepted = false;
  std::string verifier_reason;
  std::uint64_t reference_units = 0;
  double witness_ms = 0;
  double prove_ms = 0;
  double settle_ms = 0;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline Phase34Result run_phase3_phase4(Environment& env, const CommittedState& st, const CharacteristicTable& table,
                                       const ShapleyAllocation& allocation, const RunConfig& cfg,
                                       const GasModel& model) {
  Phase34Result r;
  auto t0 = std::chrono::steady_clock::now();
  WitnessTrace trace = build_witness(table, st.outputs);
  const ConstraintSystem cs = build_constraints(st.n);
  r.constraints = cs.size();
  r.trace_rows = trace.rows.size();

  PublicInputs pub;
  pub.n = st.n;
  pub.task_nonce = cfg.nonce;
  pub.allocations = allocation.as_fixed();
  pub.grand_value = table.grand_value();
  pub.output_hash_cids = st.cids;
  pub.value_hashes = st.value_hashes;

  const bool tamper = cfg.scenario.kind == ScenarioKind::kAllocationTamper;
  if (tamper) {
    if (st.n < 2) throw Error(Errc::kInvalidArgument, "allocation tamper needs at least 2 agents");
    pub.allocations[0].raw += kScale;
    pub.allocations[1].raw -= kScale;
    const TraceLayout layout(st.n);
    std::get<FinalRow>(trace.rows[layout.final_row(0)]).mu.raw += kScale;
    std::get<FinalRow>(trace.rows[layout.final_row(1)]).mu.raw -= kScale;
  }
  pub.seal();
  r.witness_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  r.k = cfg.full_check ? static_cast<std::uint32_t>(cs.size()) : cfg.k;
  if (tamper) {
    r.violated = violated_constraints(cs, trace, pub).size();
    r.proof = prove_dishonest(trace, cs, pub, r.k);
  } else {
    r.proof = prove(trace, cs, pub, r.k);
  }
  r.prove_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  const VerifyResult vr = verify(r.proof, pub, cs);
  r.verifier_accepted = vr.accepted;
  r.verifier_reason = vr.reason;
  r.reference_units = model.reference_units(vr.work);
  r.settlement = env.ledger.verify_and_settle(r.proof, pub, SettlementPolicy{cfg.allow_deficit});
  r.settle_ms = elapsed_ms(t0);
  r.pub = std::move(pub);
  return r;
}

struct AgentLine {
  unsigned agent = 0;
  std::string role;
  double skill = 0;
  std::int64_t allocation = 0;
  std::optional<std::int64_t> payout;
};

struct RunReport {
  unsigned agents = 0;
  std::string scenario = "none";
  std::string status;
  int abort_phase = 0;
  std::string abort_reason;
  std::optional<std::uint32_t> failing_coalition;
  std::vector<AgentLine> lines;
  std::optional<std::int64_t> grand_value;
  std::optional<SuperadditivityReport> superadditivity;
  GasReport gas;
  std::uint64_t ledger_gas = 0;
  std::uint64_t ledger_height = 0;
  std::string ledger_state;
  std::uint64_t reference_units = 0;
  std::size_t constraints = 0;
  std::size_t trace_rows = 0;
  std::uint32_t k = 0;
  bool full_check = false;
  std::size_t proof_bytes = 0;
  std::string proof_digest;
  std::size_t violated_constraints = 0;
  std::optional<double> predicted_acceptance;
  std::optional<CollusionReport> collusion;
  std::optional<std::int64_t> honest_share;
  std::optional<std::int64_t> degraded_share;
  std::optional<unsigned> withholding_agent;

  bool settled() const { return status == "settled"; }
};

struct Timings {
  double phase1_ms = 0;
  double phase2_ms = 0;
  double witness_ms = 0;
  double prove_ms = 0;
  double settle_ms = 0;
};

struct RunOutcome {
  RunReport report;
  Bytes proof;
  std::string journal;
  Timings timings;
};

inline std::string int128_text(Int128 v) { return to_string(v); }

inline nlohmann::ordered_json report_to_json(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["agents"] = r.agents;
  j["scenario"] = r.scenario;
  j["status"] = r.status;
  if (!r.settled()) {
    j["abort"] = {{"phase", r.abort_phase}, {"reason", r.abort_reason}};
    if (r.failing_coalition) j["abort"]["coalition"] = *r.failing_coalition;
  }
  ordered_json lines = ordered_json::array();
  for (const auto& l : r.lines) {
    ordered_json a{{"agent", l.agent},
                   {"role", l.role},
                   {"skill", l.skill},
                   {"allocation_raw", l.allocation},
                   {"allocation", format_fixed(FixedValue{l.allocation})}};
    a["payout_raw"] = l.payout ? ordered_json(*l.payout) : ordered_json(nullptr);
    lines.push_back(a);
  }
  j["agents_detail"] = lines;
  if (r.grand_value) {
    j["grand_value_raw"] = *r.grand_value;
    j["grand_value"] = format_fixed(FixedValue{*r.grand_value});
  }
  if (r.superadditivity) {
    j["superadditivity"] = {{"standalone_sum_raw", int128_text(r.superadditivity->standalone_sum)},
                            {"surplus_raw", int128_text(r.superadditivity->surplus)},
                            {"superadditive", r.superadditivity->superadditive}};
  }
  j["gas"] = {{"baseline", r.gas.baseline},
              {"hybrid", r.gas.hybrid},
              {"reduction", r.gas.reduction},
              {"reference_backend", r.reference_units},
              {"ledger_total", r.ledger_gas}};
  j["proof"] = {{"k", r.k},
                {"full_check", r.full_check},
                {"constraints", r.constraints},
                {"trace_rows", r.trace_rows},
                {"bytes", r.proof_bytes},
                {"sha256", r.proof_digest}};
  j["ledger"] = {{"height", r.ledger_height}, {"state", r.ledger_state}};
  if (r.scenario != "none") {
    ordered_json d{{"detected", !r.settled()}};
    if (r.scenario == "A3") {
      d["violated_constraints"] = r.violated_constraints;
      if (r.predicted_acceptance) d["predicted_acceptance"] = *r.predicted_acceptance;
    }
    if (r.collusion) {
      d["colluders_mask"] = r.collusion->colluders.bits();
      d["gain_raw"] = r.collusion->gain;
      d["bound_raw"] = r.collusion->bound;
      d["slack_term"] = r.collusion->slack_term;
      d["within_bound"] = r.collusion->within_bound;
    }
    if (r.withholding_agent) {
      d["agent"] = *r.withholding_agent;
      d["honest_share_raw"] = *r.honest_share;
      d["degraded_share_raw"] = *r.degraded_share;
      d["share_lowered"] = *r.degraded_share < *r.honest_share;
    }
    j["scenario_outcome"] = d;
  }
  return j;
}

inline std::string report_to_text(const RunReport& r) {
  std::ostringstream o;
  o << "agents: " << r.agents << "  scenario: " << r.scenario << "  status: " << r.status << "\n";
  if (!r.settled()) o << "abort (phase " << r.abort_phase << "): " << r.abort_reason << "\n";
  o << "\nagent  role                skill     allocation        payout\n";
  for (const auto& l : r.lines) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%5u  %-18s  %.4f  %14s  %12s\n", l.agent, l.role.c_str(), l.skill,
                  format_fixed(FixedValue{l.allocation}).c_str(),
                  l.payout ? format_fixed(FixedValue{*l.payout}).c_str() : "-");
    o << buf;
  }
  if (r.grand_value) o << "v(N) = " << format_fixed(FixedValue{*r.grand_value}) << "\n";
  char buf[200];
  std::snprintf(buf, sizeof buf, "\ngas: baseline %.0f  hybrid %llu  reduction %.2f%%  reference backend %llu\n",
                r.gas.baseline, static_cast<unsigned long long>(r.gas.hybrid), 100.0 * r.gas.reduction,
                static_cast<unsigned long long>(r.reference_units));
  o << buf;
  o << "proof: k=" << r.k << (r.full_check ? " (full check)" : "") << "  constraints=" << r.constraints
    << "  bytes=" << r.proof_bytes << "\n";
  o << "ledger: height=" << r.ledger_height << "  state=" << r.ledger_state << "\n";
  return o.str();
}

inline std::string timings_to_json(const Timings& t) {
  nlohmann::ordered_json j{{"phase1_ms", t.phase1_ms},
                           {"phase2_ms", t.phase2_ms},
                           {"witness_ms", t.witness_ms},
                           {"prove_ms", t.prove_ms},
                           {"verify_settle_ms", t.settle_ms}};
  return j.dump(2) + "\n";
}

inline GasModel load_gas_model(const RunConfig& cfg) {
  return cfg.gas_model_path.empty() ? GasModel::calibrated() : GasModel::load(cfg.gas_model_path);
}

namespace detail {

inline std::vector<SyntheticAgent> agents_for(const RunConfig& cfg, std::optional<unsigned> degraded) {
  auto agents = make_agents(cfg.data_analysis, cfg.market_perspective, cfg.decision, cfg.seed);
  if (degraded) agents.at(*degraded).degradation = cfg.scenario.degradation;
  return agents;
}

/// Phase-2 allocation of an untampered run in a scratch environment.
inline std::optional<ShapleyAllocation> baseline_allocation(const RunConfig& cfg, const PriceSeries& prices,
                                                            const GasModel& model,
                                                            std::optional<CharacteristicTable>* table_out = nullptr) {
  Environment scratch(model);
  const auto st = run_phase1(scratch, agents_for(cfg, std::nullopt), prices);
  auto p2 = run_phase2(scratch, st);
  if (table_out) *table_out = p2.table;
  return p2.allocation;
}

}  // namespace detail

/// Runs the pipeline with the configured scenario. Outcomes are data: aborts
/// land in the report, never as exceptions. Errors in the configuration itself
/// still throw.
inline RunOutcome run_scenario(const RunConfig& cfg, const std::optional<std::filesystem::path>& persist = std::nullopt) {
  const GasModel model = load_gas_model(cfg);
  const unsigned n = cfg.agents();
  const auto kind = cfg.scenario.kind;
  if (n < 1 || n > kMaxExactAgents) throw Error(Errc::kInvalidArgument, "agent count out of range");
  if ((kind == ScenarioKind::kAllocationTamper || kind == ScenarioKind::kCollusion) && n < 2) {
    throw Error(Errc::kInvalidArgument, std::string(scenario_name(kind)) + " needs at least 2 agents");
  }
  std::vector<unsigned> targets = cfg.scenario.agents;
  if (targets.empty() && kind == ScenarioKind::kCollusion) targets = {0, 1};
  if (targets.empty() && kind == ScenarioKind::kWithholding) targets = {0};
  for (auto a : targets) {
    if (a >= n) throw Error(Errc::kInvalidArgument, "scenario agent outside the agent set");
  }

  RunOutcome out;
  RunReport& rep = out.report;
  rep.agents = n;
  rep.scenario = scenario_name(kind);
  rep.gas = gas_report(n, model);
  rep.full_check = cfg.full_check;

  const PriceSeries prices = PriceSeries::generate(cfg.price);
  std::optional<unsigned> degraded;
  if (kind == ScenarioKind::kWithholding) degraded = targets.front();
  const auto agents = detail::agents_for(cfg, degraded);
  for (const auto& a : agents) rep.lines.push_back(AgentLine{a.id.index, role_name(a.role), a.skill, 0, std::nullopt});

  CoalitionMask colluders;
  for (auto a : targets) colluders = colluders.with(a);
  ValueAdjust inflate;
  if (kind == ScenarioKind::kCollusion) {
    inflate = [&](std::vector<FixedValue>& values) {
      const CoalitionMask grand = CoalitionMask::full(n);
      for (std::uint32_t bits = 0; bits < values.size(); ++bits) {
        const CoalitionMask s(bits);
        if (s.contains(colluders) && s != grand) values[bits].raw += cfg.scenario.delta.raw;
      }
    };
  }

  Environment env(model, persist);
  auto finish = [&] {
    rep.ledger_gas = env.ledger.gas_used();
    rep.ledger_height = env.ledger.height();
    rep.ledger_state = env.ledger.state_digest().hex();
    out.journal = env.ledger.journal();
    return std::move(out);
  };

  auto t0 = std::chrono::steady_clock::now();
  CommittedState st = run_phase1(env, agents, prices, inflate);
  out.timings.phase1_ms = elapsed_ms(t0);

  if (kind == ScenarioKind::kOutputManipulation || kind == ScenarioKind::kValueTamper) {
    const std::uint32_t target = cfg.scenario.coalition.value_or((1U << n) - 1);
    if (target == 0 && kind == ScenarioKind::kOutputManipulation) {
      throw Error(Errc::kInvalidArgument, "A1 needs a non-empty target coalition");
    }
    if (kind == ScenarioKind::kOutputManipulation) {
      st.outputs[target].front().mutable_payload().back() ^= 0x01;
    } else {
      st.reported_values[target].raw += cfg.scenario.delta.raw;
    }
  }

  t0 = std::chrono::steady_clock::now();
  Phase2Result p2 = run_phase2(env, st);
  out.timings.phase2_ms = elapsed_ms(t0);
  if (!p2.ok) {
    const Settlement s = env.ledger.record_abort("phase 2: " + p2.reason);
    rep.status = "aborted";
    rep.abort_phase = 2;
    rep.abort_reason = s.reason;
    rep.failing_coalition = p2.failing_coalition;
    return finish();
  }

  const auto mu = p2.allocation->as_fixed();
  for (unsigned i = 0; i < n; ++i) rep.lines[i].allocation = mu[i].raw;
  rep.grand_value = p2.table->grand_value().raw;
  rep.superadditivity = check_superadditivity(*p2.table);

  if (kind == ScenarioKind::kCollusion) {
    std::optional<CharacteristicTable> honest_table;
    auto honest = detail::baseline_allocation(cfg, prices, model, &honest_table);
    if (honest && honest_table) rep.collusion = collusion_gain(*honest_table, *honest, *p2.allocation, colluders);
  }
  if (kind == ScenarioKind::kWithholding) {
    auto honest = detail::baseline_allocation(cfg, prices, model);
    rep.withholding_agent = *degraded;
    rep.degraded_share = mu[*degraded].raw;
    if (honest) rep.honest_share = honest->as_fixed(*degraded).raw;
  }

  Phase34Result p34;
  try {
    p34 = run_phase3_phase4(env, st, *p2.table, *p2.allocation, cfg, model);
  } catch (const Error& e) {
    const Settlement s = env.ledger.record_abort(std::string("phase 3: ") + e.what());
    rep.status = "aborted";
    rep.abort_phase = 3;
    rep.abort_reason = s.reason;
    return finish();
  }
  out.timings.witness_ms = p34.witness_ms;
  out.timings.prove_ms = p34.prove_ms;
  out.timings.settle_ms = p34.settle_ms;
  out.proof = p34.proof.serialize();
  rep.constraints = p34.constraints;
  rep.trace_rows = p34.trace_rows;
  rep.k = p34.k;
  rep.proof_bytes = out.proof.size();
  rep.proof_digest = sha256(out.proof).hex();
  rep.reference_units = p34.reference_units;
  if (kind == ScenarioKind::kAllocationTamper) {
    rep.violated_constraints = p34.violated;
    rep.predicted_acceptance =
        p34.k == p34.constraints
            ? (p34.violated ? 0.0 : 1.0)
            : std::pow(1.0 - static_cast<double>(p34.violated) / static_cast<double>(p34.constraints), p34.k);
  }
  if (p34.settlement.settled()) {
    rep.status = "settled";
    for (unsigned i = 0; i < n; ++i) rep.lines[i].payout = p34.settlement.payouts[i].raw;
  } else {
    rep.status = "aborted";
    rep.abort_phase = 4;
    rep.abort_reason = p34.settlement.reason;
  }
  return finish();
}

inline RunOutcome run_honest(RunConfig cfg, const std::optional<std::filesystem::path>& persist = std::nullopt) {
  cfg.scenario = AdversaryScenario{};
  return run_scenario(cfg, persist);
}

struct ProofBench {
  unsigned agents = 0;
  std::uint32_t k = 0;
  std::size_t trace_rows = 0;
  std::size_t constraints = 0;
  unsigned merkle_depth = 0;
  std::size_t proof_bytes = 0;
  std::uint64_t reference_units = 0;
  std::uint64_t hybrid_units = 0;
  bool verified = false;
  double prove_ms = 0;
  double verify_ms = 0;
};

/// Honest pipeline for n agents, then timing and counting of prove and verify alone.
inline ProofBench bench_proof(unsigned n, std::uint32_t k, std::uint64_t seed, const GasModel& model) {
  RunConfig cfg = RunConfig::for_agents(n, seed);
  cfg.k = k;
  Environment env(model);
  const PriceSeries prices = PriceSeries::generate(cfg.price);
  const auto st = run_phase1(env, detail::agents_for(cfg, std::nullopt), prices);
  const auto p2 = run_phase2(env, st);
  if (!p2.ok) throw Error(Errc::kUnsatisfied, "benchmark pipeline aborted: " + p2.reason);
  const WitnessTrace trace = build_witness(*p2.table, st.outputs);
  const ConstraintSystem cs = build_constraints(n);
  PublicInputs pub;
  pub.n = n;
  pub.allocations = p2.allocation->as_fixed();
  pub.grand_value = p2.table->grand_value();
  pub.output_hash_cids = st.cids;
  pub.value_hashes = st.value_hashes;
  pub.seal();

  ProofBench b;
  b.agents = n;
  b.k = k;
  b.trace_rows = trace.rows.size();
  b.constraints = cs.size();
  b.merkle_depth = merkle_depth(trace.rows.size());
  auto t0 = std::chrono::steady_clock::now();
  const Proof proof = prove(trace, cs, pub, k);
  b.prove_ms = elapsed_ms(t0);
  b.proof_bytes = proof.serialize().size();
  t0 = std::chrono::steady_clock::now();
  const VerifyResult vr = verify(proof, pub, cs);
  b.verify_ms = elapsed_ms(t0);
  b.verified = vr.accepted;
  b.reference_units = model.reference_units(vr.work);
  b.hybrid_units = model.verify_constant;
  return b;
}

}  // namespace dao
