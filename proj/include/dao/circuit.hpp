// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

// Witness trace and constraint system for the Shapley computation.
//
// Row layout (linear index):
//   [0, 2^n)                        coalition rows, index = mask
//   2^n + i * 2^(n-1) + t           accumulation step t of agent i
//   2^n + n * 2^(n-1) + i           final row of agent i
//
// Every row encodes to the same width W(n) = max(14 + 32n, 43) bytes, zero padded:
//   coalition: 0x01 | mask u32 | v i64 | count u8 | count x digest
//   accum:     0x02 | agent u16 | step u32 | mask u32 | coeff i64 | marginal i64 | acc i128
//   final:     0x03 | agent u16 | phi i128 | mu i64
// Accumulation rows store the running sum after their step, so acc_0 = 0 is implicit.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "dao/bytes.hpp"
#include "dao/commitment.hpp"
#include "dao/game.hpp"
#include "dao/public_inputs.hpp"

namespace dao {

struct CoalitionRow {
  CoalitionMask mask;
  FixedValue value;
  std::vector<Digest> digests;

  bool operator==(const CoalitionRow&) const = default;
};

struct AccumRow {
  AgentId agent;
  std::uint32_t step = 0;
  CoalitionMask mask;
  std::int64_t coeff = 0;
  std::int64_t marginal = 0;
  Int128 acc = 0;

  bool operator==(const AccumRow&) const = default;
};

struct FinalRow {
  AgentId agent;
  Int128 phi = 0;
  FixedValue mu;

  bool operator==(const FinalRow&) const = default;
};

using TraceRow = std::variant<CoalitionRow, AccumRow, FinalRow>;

class TraceLayout {
 public:
  explicit TraceLayout(unsigned n) : n_(n) {
    if (n < 1 || n > kMaxExactAgents) throw Error(Errc::kInvalidArgument, "circuit supports 1 <= n <= 16");
  }

  unsigned agents() const { return n_; }
  std::uint32_t coalitions() const { return std::uint32_t{1} << n_; }
  std::uint32_t steps_per_agent() const { return std::uint32_t{1} << (n_ - 1); }

  std::uint32_t coalition_row(CoalitionMask s) const { return s.bits(); }
  std::uint32_t accum_row(unsigned agent, std::uint32_t step) const {
    return coalitions() + agent * steps_per_agent() + step;
  }
  std::uint32_t final_row(unsigned agent) const { return coalitions() + n_ * steps_per_agent() + agent; }
  std::uint32_t row_count() const { return coalitions() + n_ * steps_per_agent() + n_; }
  std::size_t row_width() const { return std::max<std::size_t>(14 + 32 * std::size_t{n_}, 43); }

  // Flat index space for public-input references.
  std::uint32_t allocation_ref(unsigned agent) const { return agent; }
  std::uint32_t grand_value_ref() const { return n_; }
  std::uint32_t cid_ref(CoalitionMask s) const { return n_ + 1 + s.bits(); }
  std::uint32_t value_hash_ref(CoalitionMask s) const { return n_ + 1 + coalitions() + s.bits(); }

 private:
  unsigned n_;
};

struct WitnessTrace {
  unsigned n = 0;
  std::vector<TraceRow> rows;

  TraceLayout layout() const { return TraceLayout(n); }
  bool operator==(const WitnessTrace&) const = default;
};

namespace row_tag {
inline constexpr std::uint8_t kCoalition = 0x01;
inline constexpr std::uint8_t kAccum = 0x02;
inline constexpr std::uint8_t kFinal = 0x03;
}  // namespace row_tag

inline Bytes encode_row(unsigned n, const TraceRow& row) {
  const std::size_t width = TraceLayout(n).row_width();
  ByteWriter w;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, CoalitionRow>) {
          w.u8(row_tag::kCoalition).u32(r.mask.bits()).i64(r.value.raw).u8(static_cast<std::uint8_t>(r.digests.size()));
          for (const auto& d : r.digests) w.raw(d.view());
        } else if constexpr (std::is_same_v<T, AccumRow>) {
          w.u8(row_tag::kAccum).u16(r.agent.index).u32(r.step).u32(r.mask.bits()).i64(r.coeff).i64(r.marginal).i128(r.acc);
        } else {
          w.u8(row_tag::kFinal).u16(r.agent.index).i128(r.phi).i64(r.mu.raw);
        }
      },
      row);
  if (w.size() > width) throw Error(Errc::kInvalidArgument, "row does not fit layout width");
  w.zeros(width - w.size());
  return std::move(w).take();
}

/// Strict inverse of encode_row: wrong width, unknown tag, oversize digest list or
/// non-zero padding all throw Errc::kParse.
inline TraceRow decode_row(unsigned n, ByteView bytes) {
  const std::size_t width = TraceLayout(n).row_width();
  if (bytes.size() != width) throw Error(Errc::kParse, "row width mismatch");
  ByteReader r(bytes);
  TraceRow out;
  switch (r.u8()) {
    case row_tag::kCoalition: {
      CoalitionRow c;
      c.mask = CoalitionMask(r.u32());
      c.value.raw = r.i64();
      const unsigned count = r.u8();
      if (count > n) throw Error(Errc::kParse, "coalition row lists too many digests");
      for (unsigned i = 0; i < count; ++i) c.digests.push_back(Digest::read(r));
      out = std::move(c);
      break;
    }
    case row_tag::kAccum: {
      AccumRow a;
      a.agent = AgentId(r.u16());
      a.step = r.u32();
      a.mask = CoalitionMask(r.u32());
      a.coeff = r.i64();
      a.marginal = r.i64();
      a.acc = r.i128();
      out = a;
      break;
    }
    case row_tag::kFinal: {
      FinalRow f;
      f.agent = AgentId(r.u16());
      f.phi = r.i128();
      f.mu.raw = r.i64();
      out = f;
      break;
    }
    default:
      throw Error(Errc::kParse, "unknown row tag");
  }
  for (auto b : r.take(r.remaining())) {
    if (b != 0) throw Error(Errc::kParse, "non-zero row padding");
  }
  return out;
}

/// "DTRC" | version u8 | n u8 | row count u32 | row width u16 | rows
inline Bytes serialize_trace(const WitnessTrace& trace) {
  const TraceLayout layout = trace.layout();
  ByteWriter w;
  w.tag("DTRC").u8(1).u8(static_cast<std::uint8_t>(trace.n)).u32(static_cast<std::uint32_t>(trace.rows.size()));
  w.u16(static_cast<std::uint16_t>(layout.row_width()));
  for (const auto& row : trace.rows) w.raw(encode_row(trace.n, row));
  return std::move(w).take();
}

inline WitnessTrace parse_trace(ByteView data) {
  ByteReader r(data);
  r.expect_tag("DTRC");
  if (r.u8() != 1) throw Error(Errc::kParse, "unsupported trace version");
  WitnessTrace trace;
  trace.n = r.u8();
  const TraceLayout layout(trace.n);
  const std::uint32_t count = r.u32();
  if (r.u16() != layout.row_width()) throw Error(Errc::kParse, "row width mismatch");
  if (r.remaining() != std::size_t{count} * layout.row_width()) throw Error(Errc::kParse, "trace length mismatch");
  trace.rows.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) trace.rows.push_back(decode_row(trace.n, r.take(layout.row_width())));
  return trace;
}

/// Builds the full trace: coalition inputs, per-agent running sums in ascending
/// mask order, and final Phi_i with the rounded allocation mu_i.
inline WitnessTrace build_witness(const CharacteristicTable& table, std::span<const std::vector<OutputRecord>> outputs) {
  check_exact_domain(table, kMaxExactAgents);
  const unsigned n = table.agents();
  const TraceLayout layout(n);
  if (outputs.size() != layout.coalitions()) {
    throw Error(Errc::kInvalidArgument, "outputs must cover all 2^n coalitions");
  }

  WitnessTrace trace{n, {}};
  trace.rows.reserve(layout.row_count());
  for (std::uint32_t bits = 0; bits < layout.coalitions(); ++bits) {
    const CoalitionMask s(bits);
    CoalitionMask seen;
    for (const auto& rec : outputs[bits]) {
      const unsigned a = rec.agent().index;
      if (a >= n || !s.contains(a) || seen.contains(a)) {
        throw Error(Errc::kInvalidArgument, "outputs for coalition " + std::to_string(bits) + " do not match its members");
      }
      seen = seen.with(a);
    }
    if (seen != s) throw Error(Errc::kInvalidArgument, "missing outputs for coalition " + std::to_string(bits));
    trace.rows.emplace_back(CoalitionRow{s, table[s], HashSet::of(outputs[bits]).entries()});
  }

  std::vector<Int128> phi(n);
  for (unsigned i = 0; i < n; ++i) {
    Int128 acc = 0;
    for (std::uint32_t t = 0; t < layout.steps_per_agent(); ++t) {
      const CoalitionMask s = subset_excluding(i, t);
      const auto coeff = static_cast<std::int64_t>(shapley_weight(n, s.size()));
      const std::int64_t marginal = table[s.with(i)].raw - table[s].raw;
      acc += static_cast<Int128>(coeff) * marginal;
      trace.rows.emplace_back(AccumRow{AgentId(i), t, s, coeff, marginal, acc});
    }
    phi[i] = acc;
  }
  const auto mu = largest_remainder_round(phi, factorial(n));
  for (unsigned i = 0; i < n; ++i) trace.rows.emplace_back(FinalRow{AgentId(i), phi[i], FixedValue{mu[i]}});
  return trace;
}

enum class ConstraintKind : std::uint8_t { kHashOutputs = 0, kHashValue, kAccumStep, kFinalize, kEfficiency };

inline const char* constraint_kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::kHashOutputs: return "HashOutputs";
    case ConstraintKind::kHashValue: return "HashValue";
    case ConstraintKind::kAccumStep: return "AccumStep";
    case ConstraintKind::kFinalize: return "Finalize";
    case ConstraintKind::kEfficiency: return "Efficiency";
  }
  return "?";
}

struct Constraint {
  ConstraintKind kind;
  /// Agent for AccumStep/Finalize.
  std::uint16_t agent = 0;
  /// Coalition mask for HashOutputs/HashValue, step index for AccumStep.
  std::uint32_t subject = 0;
  std::vector<std::uint32_t> cell_refs;
  std::vector<std::uint32_t> public_refs;
};

struct ConstraintSystem {
  unsigned n = 0;
  std::vector<Constraint> constraints;
  std::array<std::size_t, 5> counts{};

  std::size_t size() const { return constraints.size(); }
  std::size_t count(ConstraintKind k) const { return counts[static_cast<std::size_t>(k)]; }
};

/// Emits HashOutputs and HashValue per coalition, AccumStep per (agent, step),
/// Finalize per agent, then a single Efficiency constraint. Pure function of n.
inline ConstraintSystem build_constraints(unsigned n) {
  const TraceLayout layout(n);
  ConstraintSystem cs;
  cs.n = n;
  cs.constraints.reserve(2 * layout.coalitions() + n * layout.steps_per_agent() + n + 1);
  auto emit = [&](Constraint c) {
    ++cs.counts[static_cast<std::size_t>(c.kind)];
    cs.constraints.push_back(std::move(c));
  };

  for (std::uint32_t bits = 0; bits < layout.coalitions(); ++bits) {
    const CoalitionMask s(bits);
    emit({ConstraintKind::kHashOutputs, 0, bits, {layout.coalition_row(s)}, {layout.cid_ref(s)}});
  }
  for (std::uint32_t bits = 0; bits < layout.coalitions(); ++bits) {
    const CoalitionMask s(bits);
    emit({ConstraintKind::kHashValue, 0, bits, {layout.coalition_row(s)}, {layout.value_hash_ref(s)}});
  }
  for (unsigned i = 0; i < n; ++i) {
    for (std::uint32_t t = 0; t < layout.steps_per_agent(); ++t) {
      const CoalitionMask s = subset_excluding(i, t);
      Constraint c{ConstraintKind::kAccumStep, static_cast<std::uint16_t>(i), t, {}, {}};
      c.cell_refs = {layout.coalition_row(s), layout.coalition_row(s.with(i))};
      if (t > 0) c.cell_refs.push_back(layout.accum_row(i, t - 1));
      c.cell_refs.push_back(layout.accum_row(i, t));
      emit(std::move(c));
    }
  }
  for (unsigned i = 0; i < n; ++i) {
    Constraint c{ConstraintKind::kFinalize, static_cast<std::uint16_t>(i), 0, {}, {layout.allocation_ref(i)}};
    c.cell_refs.push_back(layout.accum_row(i, layout.steps_per_agent() - 1));
    for (unsigned j = 0; j < n; ++j) c.cell_refs.push_back(layout.final_row(j));
    emit(std::move(c));
  }
  Constraint eff{ConstraintKind::kEfficiency, 0, 0, {layout.coalition_row(CoalitionMask::full(n))}, {}};
  for (unsigned j = 0; j < n; ++j) eff.cell_refs.push_back(layout.final_row(j));
  eff.public_refs.push_back(layout.grand_value_ref());
  for (unsigned j = 0; j < n; ++j) eff.public_refs.push_back(layout.allocation_ref(j));
  emit(std::move(eff));
  return cs;
}

namespace detail {

inline bool checked_add(Int128 a, Int128 b, Int128& out) { return !__builtin_add_overflow(a, b, &out); }
inline bool checked_mul(Int128 a, Int128 b, Int128& out) { return !__builtin_mul_overflow(a, b, &out); }

template <typename T>
const T* row_as(const TraceRow* row) {
  return row ? std::get_if<T>(row) : nullptr;
}

}  // namespace detail

/// Evaluates one constraint. `rows(index)` returns the row at a trace index or
/// nullptr when it cannot be resolved; an unresolvable reference or malformed
/// public input throws Errc::kStructural, while a false return means the
/// referenced cells violate the constraint.
template <typename RowSource>
bool evaluate_constraint(const ConstraintSystem& cs, const Constraint& c, RowSource&& rows, const PublicInputs& pub) {
  const unsigned n = cs.n;
  if (pub.n != n || !pub.well_formed()) throw Error(Errc::kStructural, "public inputs do not match circuit shape");
  std::vector<const TraceRow*> cells;
  cells.reserve(c.cell_refs.size());
  for (auto ref : c.cell_refs) {
    const TraceRow* row = rows(ref);
    if (row == nullptr) throw Error(Errc::kStructural, "unresolvable cell reference " + std::to_string(ref));
    cells.push_back(row);
  }
  auto in_range = [](FixedValue v) { return v.raw <= kMaxAbsRaw && v.raw >= -kMaxAbsRaw; };

  switch (c.kind) {
    case ConstraintKind::kHashOutputs: {
      const CoalitionMask s(c.subject);
      const auto* row = detail::row_as<CoalitionRow>(cells[0]);
      if (!row || row->mask != s || row->digests.size() != s.size()) return false;
      if (!std::is_sorted(row->digests.begin(), row->digests.end()) ||
          std::adjacent_find(row->digests.begin(), row->digests.end()) != row->digests.end()) {
        return false;
      }
      return cid_of(HashSet::from_digests(row->digests)) == pub.output_hash_cids[s.bits()];
    }
    case ConstraintKind::kHashValue: {
      const CoalitionMask s(c.subject);
      const auto* row = detail::row_as<CoalitionRow>(cells[0]);
      if (!row || row->mask != s) return false;
      return hash_value(row->value, s) == pub.value_hashes[s.bits()];
    }
    case ConstraintKind::kAccumStep: {
      const unsigned i = c.agent;
      const std::uint32_t t = c.subject;
      const CoalitionMask s = subset_excluding(i, t);
      const auto* without = detail::row_as<CoalitionRow>(cells[0]);
      const auto* with = detail::row_as<CoalitionRow>(cells[1]);
      const auto* prev = t > 0 ? detail::row_as<AccumRow>(cells[2]) : nullptr;
      const auto* cur = detail::row_as<AccumRow>(cells.back());
      if (!without || !with || !cur || (t > 0 && !prev)) return false;
      if (without->mask != s || with->mask != s.with(i)) return false;
      if (!in_range(without->value) || !in_range(with->value)) return false;
      if (cur->agent.index != i || cur->step != t || cur->mask != s) return false;
      if (prev && (prev->agent.index != i || prev->step != t - 1)) return false;
      if (static_cast<Int128>(cur->coeff) != shapley_weight(n, s.size())) return false;
      if (cur->marginal != with->value.raw - without->value.raw) return false;
      Int128 term = 0;
      Int128 expected = 0;
      if (!detail::checked_mul(cur->coeff, cur->marginal, term)) return false;
      if (!detail::checked_add(prev ? prev->acc : 0, term, expected)) return false;
      return cur->acc == expected;
    }
    case ConstraintKind::kFinalize: {
      const unsigned i = c.agent;
      const auto* last = detail::row_as<AccumRow>(cells[0]);
      const TraceLayout layout(n);
      if (!last || last->agent.index != i || last->step != layout.steps_per_agent() - 1) return false;
      std::vector<Int128> phi(n);
      const FinalRow* mine = nullptr;
      for (unsigned j = 0; j < n; ++j) {
        const auto* f = detail::row_as<FinalRow>(cells[1 + j]);
        if (!f || f->agent.index != j) return false;
        phi[j] = f->phi;
        if (j == i) mine = f;
      }
      if (mine->phi != last->acc) return false;
      // Keep the rounding arithmetic clear of int128 overflow on hostile input.
      const Int128 limit = static_cast<Int128>(1) << 120;
      for (auto p : phi) {
        if (p > limit || p < -limit) return false;
      }
      const auto rounded = largest_remainder_round(phi, factorial(n));
      return mine->mu.raw == rounded[i] && pub.allocations[i] == mine->mu;
    }
    case ConstraintKind::kEfficiency: {
      const auto* grand = detail::row_as<CoalitionRow>(cells[0]);
      if (!grand || grand->mask != CoalitionMask::full(n) || !in_range(grand->value)) return false;
      Int128 total = 0;
      for (unsigned j = 0; j < n; ++j) {
        const auto* f = detail::row_as<FinalRow>(cells[1 + j]);
        if (!f || f->agent.index != j) return false;
        if (!detail::checked_add(total, f->phi, total)) return false;
      }
      if (total != factorial(n) * grand->value.raw) return false;
      if (pub.grand_value != grand->value) return false;
      Int128 allocated = 0;
      for (auto a : pub.allocations) allocated += a.raw;
      return allocated == pub.grand_value.raw;
    }
  }
  return false;
}

inline bool eval_constraint(const ConstraintSystem& cs, std::size_t index, const WitnessTrace& trace,
                            const PublicInputs& pub) {
  if (index >= cs.size()) throw Error(Errc::kStructural, "constraint index out of range");
  auto rows = [&](std::uint32_t ref) -> const TraceRow* { return ref < trace.rows.size() ? &trace.rows[ref] : nullptr; };
  return evaluate_constraint(cs, cs.constraints[index], rows, pub);
}

/// Indices of every violated constraint, ascending.
inline std::vector<std::size_t> violated_constraints(const ConstraintSystem& cs, const WitnessTrace& trace,
                                                     const PublicInputs& pub) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!eval_constraint(cs, i, trace, pub)) out.push_back(i);
  }
  return out;
}

/// Full-recheck oracle: conjunction of every constraint.
inline bool check_all(const ConstraintSystem& cs, const WitnessTrace& trace, const PublicInputs& pub) {
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!eval_constraint(cs, i, trace, pub)) return false;
  }
  return true;
}

}  // namespace dao
