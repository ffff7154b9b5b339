// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// Transparent spot-check argument over a Merkle-committed witness trace.
//
// The prover commits to every encoded trace row, derives a Fiat-Shamir seed
// from (root, public digest), samples k constraint indices from it, and opens
// every row each sampled constraint reads. The verifier replays the sampling,
// checks every authentication path and evaluates the sampled constraints.
// Openings reveal trace cells: this backend is sound but not zero-knowledge.
//
// Wire format:
//   "DAPF" | version u8 | root | public_digest | k u32
//   then per opening: constraint index u32 | row count u16 |
//     per row: row index u32 | row length u16 | row bytes | path length u8 | path digests

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dao/circuit.hpp"
#include "dao/gas.hpp"
#include "dao/merkle.hpp"
#include "dao/public_inputs.hpp"
#include "dao/sha256.hpp"

namespace dao {

inline constexpr std::uint32_t kDefaultSpotChecks = 64;
inline constexpr std::uint8_t kProofFormatVersion = 1;

struct RowOpening {
  std::uint32_t row_index = 0;
  Bytes row_bytes;
  std::vector<Digest> path;

  bool operator==(const RowOpening&) const = default;
};

struct ConstraintOpening {
  std::uint32_t constraint_index = 0;
  std::vector<RowOpening> rows;

  bool operator==(const ConstraintOpening&) const = default;
};

struct Proof {
  Digest root;
  Digest public_digest;
  std::uint32_t k = 0;
  std::vector<ConstraintOpening> openings;

  Bytes serialize() const {
    ByteWriter w;
    w.tag("DAPF").u8(kProofFormatVersion).raw(root.view()).raw(public_digest.view()).u32(k);
    for (const auto& o : openings) {
      w.u32(o.constraint_index).u16(static_cast<std::uint16_t>(o.rows.size()));
      for (const auto& r : o.rows) {
        w.u32(r.row_index).u16(static_cast<std::uint16_t>(r.row_bytes.size())).raw(r.row_bytes);
        w.u8(static_cast<std::uint8_t>(r.path.size()));
        for (const auto& d : r.path) w.raw(d.view());
      }
    }
    return std::move(w).take();
  }

  static Proof parse(ByteView data) {
    ByteReader r(data);
    r.expect_tag("DAPF");
    if (r.u8() != kProofFormatVersion) throw Error(Errc::kParse, "unsupported proof version");
    Proof p;
    p.root = Digest::read(r);
    p.public_digest = Digest::read(r);
    p.k = r.u32();
    while (!r.done()) {
      ConstraintOpening o;
      o.constraint_index = r.u32();
      const std::uint16_t rows = r.u16();
      for (std::uint16_t i = 0; i < rows; ++i) {
        RowOpening row;
        row.row_index = r.u32();
        auto bytes = r.take(r.u16());
        row.row_bytes.assign(bytes.begin(), bytes.end());
        const std::uint8_t depth = r.u8();
        for (std::uint8_t d = 0; d < depth; ++d) row.path.push_back(Digest::read(r));
        o.rows.push_back(std::move(row));
      }
      p.openings.push_back(std::move(o));
    }
    return p;
  }

  std::string to_hex() const { return dao::to_hex(serialize()); }
  static Proof from_hex(std::string_view hex) { return parse(dao::from_hex(hex)); }

  bool operator==(const Proof&) const = default;
};

namespace detail {

inline void count_hash(VerifierWork& w, std::size_t input_bytes) {
  ++w.hash_calls;
  w.hashed_words += (input_bytes + 31) / 32;
}

}  // namespace detail

/// Fiat-Shamir seed: SHA-256("FS" | root | public_digest).
inline Digest fiat_shamir_seed(const Digest& root, const Digest& public_digest) {
  return Sha256().update("FS").update(root).update(public_digest).finish();
}

/// Sampled constraint indices. k == |cs| opens every constraint in order (the
/// exhaustive mode); otherwise k indices are drawn with replacement as
/// SHA-256(seed | j) mod |cs| over the leading 64 bits.
inline std::vector<std::uint32_t> sample_constraints(const Digest& root, const Digest& public_digest, std::uint32_t k,
                                                     std::size_t constraint_count) {
  std::vector<std::uint32_t> out;
  if (constraint_count == 0) return out;
  out.reserve(k);
  if (k == constraint_count) {
    for (std::uint32_t i = 0; i < k; ++i) out.push_back(i);
    return out;
  }
  const Digest seed = fiat_shamir_seed(root, public_digest);
  for (std::uint32_t j = 0; j < k; ++j) {
    ByteWriter w;
    w.u32(j);
    const Digest h = Sha256().update(seed).update(w.bytes()).finish();
    std::uint64_t x = 0;
    for (int b = 0; b < 8; ++b) x = (x << 8) | h.bytes[static_cast<std::size_t>(b)];
    out.push_back(static_cast<std::uint32_t>(x % constraint_count));
  }
  return out;
}

/// Builds a proof without checking the trace; used to simulate a cheating prover.
inline Proof prove_dishonest(const WitnessTrace& trace, const ConstraintSystem& cs, const PublicInputs& pub,
                             std::uint32_t k) {
  if (k < 1) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  if (trace.n != cs.n) throw Error(Errc::kInvalidArgument, "trace and constraint system disagree on n");
  std::vector<Bytes> encoded;
  encoded.reserve(trace.rows.size());
  for (const auto& row : trace.rows) encoded.push_back(encode_row(trace.n, row));
  const MerkleTree tree = MerkleTree::from_rows(encoded);

  Proof p;
  p.root = tree.root();
  p.public_digest = pub.compute_digest();
  p.k = k;
  for (auto idx : sample_constraints(p.root, p.public_digest, k, cs.size())) {
    ConstraintOpening o{idx, {}};
    for (auto ref : cs.constraints[idx].cell_refs) {
      if (ref >= encoded.size()) throw Error(Errc::kStructural, "constraint references a missing row");
      o.rows.push_back(RowOpening{ref, encoded[ref], tree.auth_path(ref)});
    }
    p.openings.push_back(std::move(o));
  }
  return p;
}

/// Honest prover: refuses to prove a trace that fails the full recheck.
inline Proof prove(const WitnessTrace& trace, const ConstraintSystem& cs, const PublicInputs& pub, std::uint32_t k) {
  if (k < 1) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  if (!check_all(cs, trace, pub)) throw Error(Errc::kUnsatisfied, "trace does not satisfy the constraint system");
  return prove_dishonest(trace, cs, pub, k);
}

struct VerifyResult {
  bool accepted = false;
  std::string reason;
  VerifierWork work;

  explicit operator bool() const { return accepted; }
};

/// `cs` must be rebuilt locally from pub.n; nothing in the proof is trusted.
inline VerifyResult verify(const Proof& proof, const PublicInputs& pub, const ConstraintSystem& cs) {
  VerifyResult res;
  auto reject = [&](std::string why) {
    res.accepted = false;
    res.reason = std::move(why);
    return res;
  };
  if (!pub.well_formed() || pub.n != cs.n) return reject("public inputs do not match circuit shape");
  const Bytes pub_bytes = pub.canonical_bytes();
  detail::count_hash(res.work, pub_bytes.size());
  if (sha256(pub_bytes) != proof.public_digest) return reject("public digest mismatch");
  if (proof.k < 1) return reject("k must be >= 1");
  // Every mode opens exactly k constraints; checked before sampling so a forged k costs nothing.
  if (proof.openings.size() != proof.k) return reject("wrong opening count");

  const TraceLayout layout(cs.n);
  const unsigned depth = merkle_depth(layout.row_count());
  const std::size_t width = layout.row_width();

  const auto indices = sample_constraints(proof.root, proof.public_digest, proof.k, cs.size());
  if (proof.k != cs.size()) {
    detail::count_hash(res.work, 2 + 64);
    for (std::size_t j = 0; j < indices.size(); ++j) detail::count_hash(res.work, 32 + 4);
  }
  if (proof.openings.size() != indices.size()) return reject("wrong opening count");

  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto& opening = proof.openings[j];
    if (opening.constraint_index != indices[j]) return reject("opening does not match sampled constraint");
    const Constraint& c = cs.constraints[indices[j]];
    if (opening.rows.size() != c.cell_refs.size()) return reject("wrong row count for constraint");

    std::map<std::uint32_t, TraceRow> opened;
    for (std::size_t r = 0; r < opening.rows.size(); ++r) {
      const auto& row = opening.rows[r];
      if (row.row_index != c.cell_refs[r]) return reject("opened row is not the referenced cell");
      if (row.row_bytes.size() != width) return reject("bad row width");
      if (row.path.size() != depth) return reject("bad authentication path length");
      detail::count_hash(res.work, 4 + width);
      const Digest leaf = merkle_leaf(row.row_bytes);
      for (std::size_t d = 0; d < depth; ++d) detail::count_hash(res.work, 4 + 64);
      if (!merkle_verify(leaf, row.row_index, row.path, proof.root)) return reject("authentication path mismatch");
      try {
        opened.emplace(row.row_index, decode_row(cs.n, row.row_bytes));
      } catch (const Error&) {
        return reject("malformed row");
      }
    }

    ++res.work.constraint_evals;
    if (c.kind == ConstraintKind::kHashOutputs) {
      detail::count_hash(res.work, 7 + 32 * std::size_t{CoalitionMask(c.subject).size()});
    } else if (c.kind == ConstraintKind::kHashValue) {
      detail::count_hash(res.work, 15);
    }
    auto rows = [&](std::uint32_t ref) -> const TraceRow* {
      auto it = opened.find(ref);
      return it == opened.end() ? nullptr : &it->second;
    };
    try {
      if (!evaluate_constraint(cs, c, rows, pub)) {
        return reject(std::string("constraint ") + std::to_string(indices[j]) + " (" + constraint_kind_name(c.kind) +
                      ") violated");
      }
    } catch (const Error& e) {
      return reject(std::string("structural: ") + e.what());
    }
  }
  res.accepted = true;
  return res;
}

inline VerifyResult verify_bytes(ByteView proof_bytes, const PublicInputs& pub, const ConstraintSystem& cs) {
  try {
    return verify(Proof::parse(proof_bytes), pub, cs);
  } catch (const Error& e) {
    return VerifyResult{false, std::string("malformed proof: ") + e.what(), {}};
  }
}

/// Reference-backend gas: the verifier's counted work priced by the model.
inline std::uint64_t verifier_cost(const Proof& proof, const PublicInputs& pub, const GasModel& model) {
  const auto res = verify(proof, pub, build_constraints(pub.n));
  return model.reference_units(res.work);
}

}  // namespace dao
