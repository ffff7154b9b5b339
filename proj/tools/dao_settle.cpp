// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// dao-settle: run the settlement pipeline, benchmarks and adversary scenarios.
//
// Exit codes: 0 settled / success, 1 usage or input error, 2 abort, 3 replay divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dao/dao.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;
constexpr int kExitDivergence = 3;

std::vector<unsigned> parse_agent_list(const std::string& text) {
  std::vector<unsigned> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1 || v > 31) {
      throw dao::Error(dao::Errc::kParse, "bad agent count '" + item + "'");
    }
    out.push_back(static_cast<unsigned>(v));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dao::Error(dao::Errc::kInvalidArgument, "cannot write " + path.string());
  out << text;
}

struct RunFlags {
  std::string config;
  std::string persist;
  std::string gas_model;
  std::optional<std::uint32_t> k;
  std::optional<std::uint64_t> seed;
  std::string out = "dao-out";
  std::string scenario;
  bool full_check = false;
  bool allow_deficit = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool scenario_required) {
  cmd->add_option("--config", f.config, "run config (key = value)")->required();
  cmd->add_option("--persist", f.persist, "directory for the content store");
  cmd->add_option("--gas-model", f.gas_model, "gas model config");
  cmd->add_option("--k", f.k, "spot-check count");
  cmd->add_option("--seed", f.seed, "agent and price seed");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  auto* sc = cmd->add_option("--scenario", f.scenario, "none, A1, A2, A3, A4 or A5");
  if (scenario_required) sc->required();
  cmd->add_flag("--full-check", f.full_check, "open every constraint");
  cmd->add_flag("--allow-deficit", f.allow_deficit, "settle negative payouts");
}

int cmd_run(const RunFlags& f) {
  const auto kv = dao::KeyValueConfig::load(f.config);
  dao::RunConfig cfg = dao::RunConfig::from_kv(kv);
  if (f.seed) {
    cfg.seed = *f.seed;
    if (!kv.has("price_seed")) cfg.price.seed = *f.seed;
  }
  if (f.k) {
    if (*f.k < 1) throw dao::Error(dao::Errc::kInvalidArgument, "k must be >= 1");
    cfg.k = *f.k;
  }
  if (!f.gas_model.empty()) cfg.gas_model_path = f.gas_model;
  if (!f.scenario.empty()) cfg.scenario.kind = dao::parse_scenario(f.scenario);
  cfg.full_check = cfg.full_check || f.full_check;
  cfg.allow_deficit = cfg.allow_deficit || f.allow_deficit;

  std::optional<std::filesystem::path> persist;
  if (!f.persist.empty()) persist = f.persist;
  const dao::RunOutcome outcome = dao::run_scenario(cfg, persist);

  const std::filesystem::path out(f.out);
  std::filesystem::create_directories(out);
  write_text(out / "report.json", dao::report_to_json(outcome.report).dump(2) + "\n");
  const std::string table = dao::report_to_text(outcome.report);
  write_text(out / "report.txt", table);
  write_text(out / "proof.hex", dao::to_hex(outcome.proof) + "\n");
  write_text(out / "journal.txt", outcome.journal);
  write_text(out / "timings.json", dao::timings_to_json(outcome.timings));
  std::cout << table;
  return outcome.report.settled() ? kExitOk : kExitAbort;
}

int cmd_shapley(const std::string& game, std::uint64_t samples, std::uint64_t seed) {
  std::ifstream in(game);
  if (!in) throw dao::Error(dao::Errc::kNotFound, "cannot read " + game);
  const dao::CharacteristicTable table = dao::table_from_csv(in);
  if (samples > 0) {
    const auto est = dao::monte_carlo_shapley(table, samples, seed);
    std::cout << "agent,estimate,std_error\n";
    for (unsigned i = 0; i < est.n; ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f", est.std_errors[i]);
      std::cout << i << "," << dao::format_fixed(est.estimates[i]) << "," << buf << "\n";
    }
    return kExitOk;
  }
  const auto alloc = dao::exact_shapley(table);
  const auto mu = alloc.as_fixed();
  std::cout << "agent,numerator,denominator,share\n";
  for (unsigned i = 0; i < alloc.n; ++i) {
    std::cout << i << "," << dao::to_string(alloc.numerators[i]) << "," << dao::to_string(alloc.denominator()) << ","
              << dao::format_fixed(mu[i]) << "\n";
  }
  return kExitOk;
}

int cmd_bench_gas(const std::string& n_list, const std::string& gas_model, const std::string& out) {
  const auto model = gas_model.empty() ? dao::GasModel::calibrated() : dao::GasModel::load(gas_model);
  std::ostringstream csv;
  csv << "agents,baseline,hybrid,reduction\n";
  for (unsigned n : parse_agent_list(n_list)) {
    const auto r = dao::gas_report(n, model);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%u,%.0f,%llu,%.4f\n", r.agents, r.baseline,
                  static_cast<unsigned long long>(r.hybrid), 100.0 * r.reduction);
    csv << buf;
  }
  if (!out.empty()) write_text(out, csv.str());
  std::cout << csv.str();
  return kExitOk;
}

int cmd_bench_proof(const std::string& n_list, std::uint32_t k, std::uint64_t seed, const std::string& gas_model,
                    bool timings) {
  if (k < 1) throw dao::Error(dao::Errc::kInvalidArgument, "k must be >= 1");
  const auto model = gas_model.empty() ? dao::GasModel::calibrated() : dao::GasModel::load(gas_model);
  std::cout << "agents,k,trace_rows,constraints,merkle_depth,proof_bytes,reference_units,hybrid_units,verified";
  std::cout << (timings ? ",prove_ms,verify_ms\n" : "\n");
  for (unsigned n : parse_agent_list(n_list)) {
    const auto b = dao::bench_proof(n, k, seed, model);
    std::cout << b.agents << "," << b.k << "," << b.trace_rows << "," << b.constraints << "," << b.merkle_depth << ","
              << b.proof_bytes << "," << b.reference_units << "," << b.hybrid_units << ","
              << (b.verified ? "true" : "false");
    if (timings) {
      char buf[64];
      std::snprintf(buf, sizeof buf, ",%.3f,%.3f", b.prove_ms, b.verify_ms);
      std::cout << buf;
    }
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_replay(const std::string& journal) {
  const auto r = dao::Ledger::replay_file(journal);
  if (r.ok) {
    std::cout << "replay ok: " << r.transactions << " transactions, state " << r.state.hex() << "\n";
    return kExitOk;
  }
  std::cerr << "replay diverged at transaction " << r.divergent_height << ": " << r.reason << "\n";
  return kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dao-settle: verifiable Shapley settlement for agent coalitions"};
  app.require_subcommand(1, 1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run all four phases from a config");
  add_run_flags(run, run_flags, false);

  RunFlags attack_flags;
  auto* attack = app.add_subcommand("attack", "run an adversary scenario");
  add_run_flags(attack, attack_flags, true);

  std::string game;
  std::uint64_t mc_samples = 0;
  std::uint64_t mc_seed = 1;
  auto* shapley = app.add_subcommand("shapley", "exact Shapley shares of a CSV game");
  shapley->add_option("--game", game, "CSV with header mask,value")->required();
  shapley->add_option("--monte-carlo", mc_samples, "estimate with N sampled permutations instead");
  shapley->add_option("--seed", mc_seed, "Monte Carlo seed");

  std::string gas_n = "4,6,8,10";
  std::string gas_model;
  std::string gas_out;
  auto* bench_gas = app.add_subcommand("bench-gas", "on-chain baseline vs hybrid gas");
  bench_gas->add_option("--n", gas_n, "comma-separated agent counts")->capture_default_str();
  bench_gas->add_option("--gas-model", gas_model, "gas model config");
  bench_gas->add_option("--out", gas_out, "also write the CSV here");

  std::string proof_n = "4,6,8,10";
  std::uint32_t proof_k = dao::kDefaultSpotChecks;
  std::uint64_t proof_seed = 42;
  std::string proof_gas_model;
  bool proof_timings = false;
  auto* bench_proof = app.add_subcommand("bench-proof", "reference backend size and verifier cost");
  bench_proof->add_option("--n", proof_n, "comma-separated agent counts")->capture_default_str();
  bench_proof->add_option("--k", proof_k, "spot-check count")->capture_default_str();
  bench_proof->add_option("--seed", proof_seed, "agent and price seed")->capture_default_str();
  bench_proof->add_option("--gas-model", proof_gas_model, "gas model config");
  bench_proof->add_flag("--timings", proof_timings, "append wall-clock columns");

  std::string journal;
  auto* replay = app.add_subcommand("replay", "replay a ledger journal");
  replay->add_option("--journal,journal", journal, "journal file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*attack) return cmd_run(attack_flags);
    if (*shapley) return cmd_shapley(game, mc_samples, mc_seed);
    if (*bench_gas) return cmd_bench_gas(gas_n, gas_model, gas_out);
    if (*bench_proof) return cmd_bench_proof(proof_n, proof_k, proof_seed, proof_gas_model, proof_timings);
    if (*replay) return cmd_replay(journal);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
