// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "pstore/cid.hpp"

namespace pstore::exchange {

using SessionId = std::uint64_t;

struct WantEntry {
  Cid cid;
  std::uint32_t priority = 1;
  SessionId session = 0;
};

/// Outstanding block requests, at most one entry per (cid, session).
class WantList {
 public:
  // Returns false if the cid is already wanted by the session.
  bool add(const Cid& cid, std::uint32_t priority, SessionId session);
  bool remove(const Cid& cid, SessionId session);
  // Removes every entry for the cid, returning the sessions that wanted it.
  std::vector<SessionId> remove_all(const Cid& cid);
  std::size_t remove_session(SessionId session);

  bool wants(const Cid& cid) const;
  bool wants(const Cid& cid, SessionId session) const { return entries_.contains({cid, session}); }
  std::vector<WantEntry> entries() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::pair<Cid, SessionId>, std::uint32_t> entries_;
};

}  // namespace pstore::exchange
