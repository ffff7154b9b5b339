// Copyright 2026 The dao-settle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "dao/bytes.hpp"
#include "dao/game.hpp"
#include "dao/sha256.hpp"

namespace dao {

/// One agent's output o_i in canonical bytes.
class OutputRecord {
 public:
  OutputRecord(AgentId agent, Bytes payload) : agent_(agent), payload_(std::move(payload)) {
    if (payload_.empty()) throw Error(Errc::kInvalidArgument, "output payload must be non-empty");
  }

  AgentId agent() const { return agent_; }
  const Bytes& payload() const { return payload_; }
  Bytes& mutable_payload() { return payload_; }

  bool operator==(const OutputRecord&) const = default;

 private:
  AgentId agent_;
  Bytes payload_;
};

/// SHA-256("OUT" | agent u16 | len u32 | payload)
inline Digest hash_output(const OutputRecord& record) {
  ByteWriter w;
  w.tag("OUT").u16(record.agent().index).u32(static_cast<std::uint32_t>(record.payload().size()));
  return Sha256().update(w.bytes()).update(record.payload()).finish();
}

/// SHA-256("VAL" | mask u32 | raw i64)
inline Digest hash_value(FixedValue v, CoalitionMask s) {
  ByteWriter w;
  w.tag("VAL").u32(s.bits()).i64(v.raw);
  return sha256(w.bytes());
}

/// Sorted, duplicate-free set of output digests for one coalition.
class HashSet {
 public:
  HashSet() = default;

  static HashSet from_digests(std::vector<Digest> digests) {
    std::sort(digests.begin(), digests.end());
    if (std::adjacent_find(digests.begin(), digests.end()) != digests.end()) {
      throw Error(Errc::kInvalidArgument, "duplicate digest in hash set");
    }
    HashSet h;
    h.entries_ = std::move(digests);
    return h;
  }

  static HashSet of(std::span<const OutputRecord> records) {
    std::vector<Digest> digests;
    digests.reserve(records.size());
    for (const auto& r : records) digests.push_back(hash_output(r));
    return from_digests(std::move(digests));
  }

  const std::vector<Digest>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// "SET" | count u32 | digests ascending
  Bytes serialize() const {
    ByteWriter w;
    w.tag("SET").u32(static_cast<std::uint32_t>(entries_.size()));
    for (const auto& d : entries_) w.raw(d.view());
    return std::move(w).take();
  }

  static HashSet parse(ByteView data) {
    ByteReader r(data);
    r.expect_tag("SET");
    const std::uint32_t count = r.u32();
    if (r.remaining() != std::size_t{count} * 32) throw Error(Errc::kParse, "hash set length mismatch");
    std::vector<Digest> digests;
    digests.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      digests.push_back(Digest::read(r));
      if (i > 0 && !(digests[i - 1] < digests[i])) throw Error(Errc::kParse, "hash set not strictly sorted");
    }
    HashSet h;
    h.entries_ = std::move(digests);
    return h;
  }

  bool operator==(const HashSet&) const = default;

 private:
  std::vector<Digest> entries_;
};

/// Content identifier: digest of a HashSet's canonical serialization.
struct Cid {
  Digest digest;

  std::string hex() const { return digest.hex(); }
  auto operator<=>(const Cid&) const = default;
};

inline Cid cid_of(const HashSet& h) { return Cid{sha256(h.serialize())}; }

/// Content-addressed object store standing in for IPFS. Reads may run
/// concurrently; writes take an exclusive lock.
class ContentStore {
 public:
  ContentStore() = default;
  explicit ContentStore(std::filesystem::path persist_dir) : dir_(std::move(persist_dir)) {
    std::filesystem::create_directories(*dir_);
  }

  ContentStore(const ContentStore&) = delete;
  ContentStore& operator=(const ContentStore&) = delete;

  Cid store(const HashSet& h) {
    Bytes bytes = h.serialize();
    Cid cid{sha256(bytes)};
    std::unique_lock lock(mu_);
    if (objects_.contains(cid)) return cid;
    if (dir_) write_file(path_for(cid), bytes);
    objects_.emplace(cid, std::move(bytes));
    return cid;
  }

  HashSet retrieve(const Cid& cid) const {
    Bytes bytes;
    {
      std::shared_lock lock(mu_);
      auto it = objects_.find(cid);
      if (it != objects_.end()) {
        bytes = it->second;
      } else if (dir_ && std::filesystem::exists(path_for(cid))) {
        std::ifstream in(path_for(cid), std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
      } else {
        throw Error(Errc::kNotFound, "unknown cid " + cid.hex());
      }
    }
    if (sha256(bytes) != cid.digest) throw Error(Errc::kCorruption, "stored object does not match cid " + cid.hex());
    try {
      return HashSet::parse(bytes);
    } catch (const Error&) {
      throw Error(Errc::kCorruption, "stored object under cid " + cid.hex() + " is malformed");
    }
  }

  bool contains(const Cid& cid) const {
    std::shared_lock lock(mu_);
    return objects_.contains(cid);
  }

  std::size_t object_count() const {
    std::shared_lock lock(mu_);
    return objects_.size();
  }

  /// Fault injection: replaces the bytes stored under `cid` without re-addressing.
  void overwrite_for_testing(const Cid& cid, Bytes bytes) {
    std::unique_lock lock(mu_);
    if (dir_) write_file(path_for(cid), bytes);
    objects_[cid] = std::move(bytes);
  }

 private:
  std::filesystem::path path_for(const Cid& cid) const { return *dir_ / cid.hex(); }

  static void write_file(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::map<Cid, Bytes> objects_;
};

/// Accept predicate: the candidate's sorted digests equal the committed set exactly.
/// Duplicated records are kept, so they never match a duplicate-free commitment.
inline bool accept_outputs(const ContentStore& store, std::span<const OutputRecord> candidate, const Cid& cid) {
  const HashSet committed = store.retrieve(cid);
  std::vector<Digest> digests;
  digests.reserve(candidate.size());
  for (const auto& r : candidate) digests.push_back(hash_output(r));
  std::sort(digests.begin(), digests.end());
  return digests == committed.entries();
}

}  // namespace dao
