// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pstore/bytes.hpp"
#include "pstore/cid.hpp"
#include "pstore/sim_time.hpp"

namespace pstore {

// Where a block came from. Cached blocks are subject to the node's sharing
// policy; local blocks (added or pinned here) are always shared.
enum class Origin : std::uint8_t { local, cached };

struct StoredBlock {
  Bytes data;
  SimTime last_access{};
  Origin origin = Origin::cached;
  std::uint64_t access_seq = 0;
};

/// Content-addressed block storage with LRU garbage collection.
class Blockstore {
 public:
  explicit Blockstore(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  // Returns true if the block was not present. An existing cached block
  // is upgraded to local when re-stored as local.
  bool put(const Cid& cid, Bytes data, Origin origin, SimTime now);
  // Marks as accessed.
  const Bytes* get(const Cid& cid, SimTime now);
  const StoredBlock* peek(const Cid& cid) const;
  bool has(const Cid& cid) const { return blocks_.contains(cid); }
  bool erase(const Cid& cid);
  void set_origin(const Cid& cid, Origin origin);

  // Evicts blocks not in `keep`, least recently accessed first, until used
  // bytes plus `reserve` fit the capacity. Sets storage_full() if that is
  // impossible.
  std::vector<Cid> gc(const std::set<Cid>& keep, std::uint64_t reserve = 0);

  std::uint64_t used_bytes() const { return used_; }
  std::uint64_t capacity() const { return capacity_; }
  void set_capacity(std::uint64_t bytes) { capacity_ = bytes; }
  bool over_capacity() const { return used_ > capacity_; }
  bool storage_full() const { return storage_full_; }
  std::size_t count() const { return blocks_.size(); }
  std::vector<Cid> cids() const;
  // Least recently accessed first.
  std::vector<Cid> lru_order() const;

 private:
  void touch(const Cid& cid, StoredBlock& block, SimTime now);

  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::uint64_t next_seq_ = 0;
  bool storage_full_ = false;
  std::map<Cid, StoredBlock> blocks_;
  std::map<std::uint64_t, Cid> lru_;
};

/// Pinned roots. Recursive pins protect the whole DAG below the root.
class PinSet {
 public:
  void pin(const Cid& root, bool recursive);
  bool unpin(const Cid& root);
  bool is_root(const Cid& root) const { return roots_.contains(root); }
  const std::map<Cid, bool>& roots() const { return roots_; }

  // Every locally present block protected by a pin. Missing descendants
  // are skipped.
  std::set<Cid> closure(const Blockstore& store) const;

 private:
  std::map<Cid, bool> roots_;
};

}  // namespace pstore
