// SPDX-License-Identifier: Apache-2.0

#include "pstore/exchange.hpp"

#include <iterator>

namespace pstore::exchange {

bool WantList::add(const Cid& cid, std::uint32_t priority, SessionId session) {
  return entries_.emplace(std::make_pair(cid, session), priority).second;
}

bool WantList::remove(const Cid& cid, SessionId session) { return entries_.erase({cid, session}) > 0; }

std::vector<SessionId> WantList::remove_all(const Cid& cid) {
  std::vector<SessionId> sessions;
  auto it = entries_.lower_bound({cid, 0});
  while (it != entries_.end() && it->first.first == cid) {
    sessions.push_back(it->first.second);
    it = entries_.erase(it);
  }
  return sessions;
}

std::size_t WantList::remove_session(SessionId session) {
  return std::erase_if(entries_, [&](const auto& kv) { return kv.first.second == session; });
}

bool WantList::wants(const Cid& cid) const {
  auto it = entries_.lower_bound({cid, 0});
  return it != entries_.end() && it->first.first == cid;
}

std::vector<WantEntry> WantList::entries() const {
  std::vector<WantEntry> out;
  out.reserve(entries_.size());
  for (const auto& [key, priority] : entries_) out.push_back({key.first, priority, key.second});
  return out;
}

}  // namespace pstore::exchange
