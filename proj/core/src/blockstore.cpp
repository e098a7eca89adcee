// SPDX-License-Identifier: Apache-2.0

#include "pstore/blockstore.hpp"

#include <vector>

#include "pstore/dag.hpp"
#include "pstore/error.hpp"

namespace pstore {

void Blockstore::touch(const Cid& cid, StoredBlock& block, SimTime now) {
  lru_.erase(block.access_seq);
  block.access_seq = next_seq_++;
  block.last_access = now;
  lru_.emplace(block.access_seq, cid);
}

bool Blockstore::put(const Cid& cid, Bytes data, Origin origin, SimTime now) {
  auto it = blocks_.find(cid);
  if (it != blocks_.end()) {
    if (origin == Origin::local) it->second.origin = Origin::local;
    touch(cid, it->second, now);
    return false;
  }
  used_ += data.size();
  auto& block = blocks_[cid];
  block.data = std::move(data);
  block.origin = origin;
  block.access_seq = next_seq_++;
  block.last_access = now;
  lru_.emplace(block.access_seq, cid);
  return true;
}

const Bytes* Blockstore::get(const Cid& cid, SimTime now) {
  auto it = blocks_.find(cid);
  if (it == blocks_.end()) return nullptr;
  touch(cid, it->second, now);
  return &it->second.data;
}

const StoredBlock* Blockstore::peek(const Cid& cid) const {
  auto it = blocks_.find(cid);
  return it == blocks_.end() ? nullptr : &it->second;
}

bool Blockstore::erase(const Cid& cid) {
  auto it = blocks_.find(cid);
  if (it == blocks_.end()) return false;
  used_ -= it->second.data.size();
  lru_.erase(it->second.access_seq);
  blocks_.erase(it);
  return true;
}

void Blockstore::set_origin(const Cid& cid, Origin origin) {
  auto it = blocks_.find(cid);
  if (it != blocks_.end()) it->second.origin = origin;
}

std::vector<Cid> Blockstore::gc(const std::set<Cid>& keep, std::uint64_t reserve) {
  std::vector<Cid> evicted;
  for (auto it = lru_.begin(); it != lru_.end() && used_ + reserve > capacity_;) {
    const Cid cid = it->second;
    ++it;
    if (keep.contains(cid)) continue;
    erase(cid);
    evicted.push_back(cid);
  }
  storage_full_ = used_ + reserve > capacity_;
  return evicted;
}

std::vector<Cid> Blockstore::cids() const {
  std::vector<Cid> out;
  out.reserve(blocks_.size());
  for (const auto& [cid, _] : blocks_) out.push_back(cid);
  return out;
}

std::vector<Cid> Blockstore::lru_order() const {
  std::vector<Cid> out;
  out.reserve(lru_.size());
  for (const auto& [_, cid] : lru_) out.push_back(cid);
  return out;
}

void PinSet::pin(const Cid& root, bool recursive) {
  auto [it, inserted] = roots_.emplace(root, recursive);
  if (!inserted) it->second = it->second || recursive;
}

bool PinSet::unpin(const Cid& root) { return roots_.erase(root) > 0; }

std::set<Cid> PinSet::closure(const Blockstore& store) const {
  std::set<Cid> out;
  std::vector<Cid> stack;
  for (const auto& [root, recursive] : roots_) {
    out.insert(root);
    if (recursive) stack.push_back(root);
  }
  while (!stack.empty()) {
    auto cid = stack.back();
    stack.pop_back();
    const auto* block = store.peek(cid);
    if (!block) continue;
    dag::DagNode node;
    try {
      node = dag::node_deserialize(block->data);
    } catch (const Error&) {
      continue;
    }
    for (const auto& l : node.links)
      if (out.insert(l.target).second) stack.push_back(l.target);
  }
  return out;
}

}  // namespace pstore
