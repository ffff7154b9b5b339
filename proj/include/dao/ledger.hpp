// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// Single-task simulated chain. One transaction per block, heights from 1.
//
// Transaction bytes: "TX" | kind u8 | height u64 | body
//   commit cid:        mask u32 | cid digest
//   commit value hash: mask u32 | digest
//   settle:            public_digest | proof digest | n u8 | payouts i64
//   abort:             public_digest | reason length u16 | reason
//
// State chain: state_0 = 32 zero bytes, state_k = SHA-256("STATE" | state_{k-1} | tx_hash_k).
// Journal: one line "<height> <tx hex> <state hex>" per transaction, then
// "end <count> <state hex>".

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include "dao/commitment.hpp"
#include "dao/gas.hpp"
#include "dao/proof.hpp"
#include "dao/public_inputs.hpp"

namespace dao {

enum class TxKind : std::uint8_t { kCommitCid = 1, kCommitValueHash = 2, kSettle = 3, kAbort = 4 };

struct TxReceipt {
  std::uint64_t height = 0;
  Digest tx_hash;
};

enum class SettlementStatus { kSettled, kAborted };

struct Settlement {
  SettlementStatus status = SettlementStatus::kAborted;
  std::vector<FixedValue> payouts;
  Digest tx_hash;
  std::uint64_t height = 0;
  std::string reason;

  bool settled() const { return status == SettlementStatus::kSettled; }
};

struct SettlementPolicy {
  /// Settle signed balances instead of aborting on a negative payout.
  bool allow_deficit = false;
};

inline constexpr const char* kAbortDivergence = "public-input/ledger divergence";
inline constexpr const char* kAbortProofInvalid = "proof invalid";
inline constexpr const char* kAbortUnsettleable = "unsettleable allocation";

struct ReplayResult {
  bool ok = false;
  /// Height of the first transaction that failed to reproduce; 0 when ok.
  std::uint64_t divergent_height = 0;
  std::string reason;
  std::uint64_t transactions = 0;
  Digest state;
};

class Ledger {
 public:
  explicit Ledger(GasModel model = GasModel::calibrated()) : model_(model) {}

  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  TxReceipt commit_cid(CoalitionMask s, const Cid& cid) {
    std::unique_lock lock(mu_);
    if (cids_.contains(s.bits())) throw Error(Errc::kDuplicate, "cid already committed for coalition " + mask_text(s));
    ByteWriter body;
    body.u32(s.bits()).raw(cid.digest.view());
    const TxReceipt r = append(TxKind::kCommitCid, body.bytes());
    cids_.emplace(s.bits(), cid);
    gas_used_ += model_.storage_write;
    return r;
  }

  TxReceipt commit_value_hash(CoalitionMask s, const Digest& h) {
    std::unique_lock lock(mu_);
    if (value_hashes_.contains(s.bits())) {
      throw Error(Errc::kDuplicate, "value hash already committed for coalition " + mask_text(s));
    }
    ByteWriter body;
    body.u32(s.bits()).raw(h.view());
    const TxReceipt r = append(TxKind::kCommitValueHash, body.bytes());
    value_hashes_.emplace(s.bits(), h);
    gas_used_ += model_.storage_write;
    return r;
  }

  Cid get_cid(CoalitionMask s) const {
    std::shared_lock lock(mu_);
    auto it = cids_.find(s.bits());
    if (it == cids_.end()) throw Error(Errc::kNotFound, "no cid committed for coalition " + mask_text(s));
    return it->second;
  }

  Digest get_value_hash(CoalitionMask s) const {
    std::shared_lock lock(mu_);
    auto it = value_hashes_.find(s.bits());
    if (it == value_hashes_.end()) throw Error(Errc::kNotFound, "no value hash committed for coalition " + mask_text(s));
    return it->second;
  }

  /// Checks pub against the committed records, verifies the proof and pays out.
  /// Every outcome is recorded as a terminal transaction.
  Settlement verify_and_settle(const Proof& proof, const PublicInputs& pub, SettlementPolicy policy = {}) {
    std::unique_lock lock(mu_);
    require_open();
    const Digest pub_digest = pub.well_formed() ? pub.compute_digest() : Digest{};
    if (!matches_ledger(pub)) return abort_locked(pub_digest, kAbortDivergence);
    gas_used_ += model_.verify_constant;
    const VerifyResult vr = verify(proof, pub, build_constraints(pub.n));
    if (!vr.accepted) return abort_locked(pub_digest, kAbortProofInvalid);

    Int128 total = 0;
    bool negative = false;
    for (auto a : pub.allocations) {
      total += a.raw;
      negative = negative || a.raw < 0;
    }
    if (total != pub.grand_value.raw || (negative && !policy.allow_deficit)) {
      return abort_locked(pub_digest, kAbortUnsettleable);
    }

    ByteWriter body;
    body.raw(pub_digest.view()).raw(sha256(proof.serialize()).view()).u8(static_cast<std::uint8_t>(pub.n));
    for (auto a : pub.allocations) body.i64(a.raw);
    const TxReceipt r = append(TxKind::kSettle, body.bytes());
    closed_ = true;
    gas_used_ += model_.storage_write;
    return Settlement{SettlementStatus::kSettled, pub.allocations, r.tx_hash, r.height, {}};
  }

  /// Off-chain abort (for example a failed coordinator assertion) anchored as a transaction.
  Settlement record_abort(const std::string& reason, const Digest& public_digest = {}) {
    std::unique_lock lock(mu_);
    require_open();
    return abort_locked(public_digest, reason);
  }

  std::uint64_t height() const {
    std::shared_lock lock(mu_);
    return transactions_.size();
  }

  Digest state_digest() const {
    std::shared_lock lock(mu_);
    return state_;
  }

  std::uint64_t gas_used() const {
    std::shared_lock lock(mu_);
    return gas_used_;
  }

  std::size_t cid_count() const {
    std::shared_lock lock(mu_);
    return cids_.size();
  }

  std::size_t value_hash_count() const {
    std::shared_lock lock(mu_);
    return value_hashes_.size();
  }

  bool closed() const {
    std::shared_lock lock(mu_);
    return closed_;
  }

  std::vector<Bytes> transactions() const {
    std::shared_lock lock(mu_);
    return transactions_;
  }

  std::string journal() const {
    std::shared_lock lock(mu_);
    std::string out;
    for (std::size_t i = 0; i < transactions_.size(); ++i) {
      out += std::to_string(i + 1) + " " + to_hex(transactions_[i]) + " " + states_[i].hex() + "\n";
    }
    out += "end " + std::to_string(transactions_.size()) + " " + state_.hex() + "\n";
    return out;
  }

  void write_journal(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kInvalidArgument, "cannot write journal " + path.string());
    out << journal();
  }

  static Digest chain(const Digest& prev, const Digest& tx_hash) {
    return Sha256().update("STATE").update(prev).update(tx_hash).finish();
  }

  /// Re-applies every journaled transaction to a fresh ledger. An empty journal
  /// replays to the empty state.
  static ReplayResult replay(std::string_view journal) {
    ReplayResult res;
    Ledger ledger;
    std::istringstream in{std::string(journal)};
    std::string line;
    bool ended = false;
    auto fail = [&](std::uint64_t height, std::string why) {
      res.ok = false;
      res.divergent_height = height;
      res.reason = std::move(why);
      res.transactions = ledger.transactions_.size();
      res.state = ledger.state_;
      return res;
    };
    bool any = false;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      any = true;
      const std::uint64_t next = ledger.transactions_.size() + 1;
      if (ended) return fail(next, "content after end marker");
      std::istringstream fields(line);
      std::string a, b, c, extra;
      fields >> a >> b >> c;
      if (c.empty() || (fields >> extra)) return fail(next, "malformed journal line");
      if (a == "end") {
        if (b != std::to_string(ledger.transactions_.size())) return fail(next, "transaction count mismatch");
        if (c != ledger.state_.hex()) return fail(next, "terminal state mismatch");
        ended = true;
        continue;
      }
      if (a != std::to_string(next)) return fail(next, "unexpected height " + a);
      try {
        ledger.apply(from_hex(b));
      } catch (const Error& e) {
        return fail(next, e.what());
      }
      if (c != ledger.state_.hex()) return fail(next, "state digest mismatch");
    }
    if (any && !ended) return fail(ledger.transactions_.size() + 1, "journal truncated: missing end marker");
    res.ok = true;
    res.transactions = ledger.transactions_.size();
    res.state = ledger.state_;
    return res;
  }

  static ReplayResult replay_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::kNotFound, "cannot read journal " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return replay(ss.str());
  }

 private:
  static std::string mask_text(CoalitionMask s) { return std::to_string(s.bits()); }

  void require_open() const {
    if (closed_) throw Error(Errc::kDuplicate, "task already settled or aborted");
  }

  bool matches_ledger(const PublicInputs& pub) const {
    if (!pub.well_formed()) return false;
    if (cids_.size() != pub.coalition_count() || value_hashes_.size() != pub.coalition_count()) return false;
    for (std::uint32_t s = 0; s < pub.coalition_count(); ++s) {
      auto c = cids_.find(s);
      auto v = value_hashes_.find(s);
      if (c == cids_.end() || v == value_hashes_.end()) return false;
      if (c->second != pub.output_hash_cids[s] || v->second != pub.value_hashes[s]) return false;
    }
    return true;
  }

  Settlement abort_locked(const Digest& public_digest, const std::string& reason) {
    ByteWriter body;
    body.raw(public_digest.view()).u16(static_cast<std::uint16_t>(reason.size())).raw(as_bytes(reason));
    const TxReceipt r = append(TxKind::kAbort, body.bytes());
    closed_ = true;
    return Settlement{SettlementStatus::kAborted, {}, r.tx_hash, r.height, reason};
  }

  TxReceipt append(TxKind kind, ByteView body) {
    const std::uint64_t height = transactions_.size() + 1;
    ByteWriter w;
    w.tag("TX").u8(static_cast<std::uint8_t>(kind)).u64(height).raw(body);
    Bytes bytes = std::move(w).take();
    const Digest h = sha256(bytes);
    state_ = chain(state_, h);
    transactions_.push_back(std::move(bytes));
    states_.push_back(state_);
    return TxReceipt{height, h};
  }

  /// Replays one canonical transaction, enforcing the same rules as the live path.
  void apply(const Bytes& tx) {
    ByteReader r(tx);
    r.expect_tag("TX");
    const auto kind = static_cast<TxKind>(r.u8());
    if (r.u64() != transactions_.size() + 1) throw Error(Errc::kCorruption, "height field mismatch");
    switch (kind) {
      case TxKind::kCommitCid: {
        const CoalitionMask s(r.u32());
        const Cid cid{Digest::read(r)};
        r.expect_done();
        commit_cid(s, cid);
        return;
      }
      case TxKind::kCommitValueHash: {
        const CoalitionMask s(r.u32());
        const Digest h = Digest::read(r);
        r.expect_done();
        commit_value_hash(s, h);
        return;
      }
      case TxKind::kSettle: {
        require_open();
        Digest::read(r);
        Digest::read(r);
        const unsigned n = r.u8();
        for (unsigned i = 0; i < n; ++i) r.i64();
        r.expect_done();
        break;
      }
      case TxKind::kAbort: {
        require_open();
        Digest::read(r);
        r.take(r.u16());
        r.expect_done();
        break;
      }
      default:
        throw Error(Errc::kParse, "unknown transaction kind");
    }
    const Digest h = sha256(tx);
    state_ = chain(state_, h);
    transactions_.push_back(tx);
    states_.push_back(state_);
    closed_ = true;
  }

  GasModel model_;
  mutable std::shared_mutex mu_;
  std::map<std::uint32_t, Cid> cids_;
  std::map<std::uint32_t, Digest> value_hashes_;
  std::vector<Bytes> transactions_;
  std::vector<Digest> states_;
  Digest state_{};
  std::uint64_t gas_used_ = 0;
  bool closed_ = false;
};

}  // namespace dao
