// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "dao/sha256.hpp"

namespace dao {

inline Digest merkle_leaf(ByteView row_bytes) { return Sha256().update("LEAF").update(row_bytes).finish(); }

inline Digest merkle_node(const Digest& left, const Digest& right) {
  return Sha256().update("NODE").update(left).update(right).finish();
}

/// ceil(log2 leaves); zero for a single leaf.
inline unsigned merkle_depth(std::size_t leaves) {
  return leaves <= 1 ? 0U : static_cast<unsigned>(std::bit_width(leaves - 1));
}

/// Binary SHA-256 tree. Leaves are padded to a power of two by repeating the
/// last leaf; the LEAF/NODE tags keep the two hash domains apart.
class MerkleTree {
 public:
  explicit MerkleTree(std::vector<Digest> leaves) {
    if (leaves.empty()) throw Error(Errc::kInvalidArgument, "merkle tree needs at least one leaf");
    leaf_count_ = leaves.size();
    const std::size_t width = std::size_t{1} << merkle_depth(leaf_count_);
    leaves.resize(width, leaves.back());
    levels_.push_back(std::move(leaves));
    while (levels_.back().size() > 1) {
      const auto& below = levels_.back();
      std::vector<Digest> above(below.size() / 2);
      for (std::size_t i = 0; i < above.size(); ++i) above[i] = merkle_node(below[2 * i], below[2 * i + 1]);
      levels_.push_back(std::move(above));
    }
  }

  static MerkleTree from_rows(std::span<const Bytes> rows) {
    std::vector<Digest> leaves;
    leaves.reserve(rows.size());
    for (const auto& r : rows) leaves.push_back(merkle_leaf(r));
    return MerkleTree(std::move(leaves));
  }

  const Digest& root() const { return levels_.back().front(); }
  std::size_t leaf_count() const { return leaf_count_; }
  unsigned depth() const { return static_cast<unsigned>(levels_.size() - 1); }

  /// Sibling digests from the leaf level upwards.
  std::vector<Digest> auth_path(std::size_t index) const {
    if (index >= leaf_count_) throw Error(Errc::kInvalidArgument, "leaf index out of range");
    std::vector<Digest> path;
    path.reserve(depth());
    for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
      path.push_back(levels_[level][index ^ 1U]);
      index >>= 1U;
    }
    return path;
  }

 private:
  std::size_t leaf_count_ = 0;
  std::vector<std::vector<Digest>> levels_;
};

/// Recomputes the root from a leaf and its path; false on any mismatch.
inline bool merkle_verify(const Digest& leaf, std::size_t index, std::span<const Digest> path, const Digest& root) {
  Digest acc = leaf;
  for (const auto& sibling : path) {
    acc = (index & 1U) == 0 ? merkle_node(acc, sibling) : merkle_node(sibling, acc);
    index >>= 1U;
  }
  return index == 0 && acc == root;
}

}  // namespace dao
