// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>

#include "node_internal.hpp"

namespace pstore {

void Node::store_new(const std::vector<dag::Block>& nodes) {
  std::uint64_t incoming = 0;
  std::set<Cid> keep;
  for (const auto& b : nodes) {
    if (keep.insert(b.cid).second && !blocks_.has(b.cid)) incoming += b.data.size();
  }
  if (blocks_.used_bytes() + incoming > blocks_.capacity()) {
    gc(keep, incoming);
    if (blocks_.used_bytes() + incoming > blocks_.capacity())
      throw Error(ErrorCode::storage_full, std::to_string(incoming) + " bytes do not fit");
  }
  for (const auto& b : nodes) blocks_.put(b.cid, b.data, Origin::local, env_.now());
}

dag::FileDag Node::import(ByteView data, bool pin) {
  auto leaves = dag::chunk(data, config_.chunk_size);
  auto file = dag::build_file_dag(leaves, config_.fanout);
  store_new(file.nodes);
  if (pin) pins_.pin(file.root, true);
  return file;
}

void Node::provide_many(std::vector<Cid> cids, Callback<Unit> done) {
  std::sort(cids.begin(), cids.end());
  cids.erase(std::unique(cids.begin(), cids.end()), cids.end());
  if (cids.empty()) {
    done(Unit{});
    return;
  }
  auto remaining = std::make_shared<std::size_t>(cids.size());
  for (const auto& cid : cids) {
    provide(cid, [remaining, done](Result<ProvideResult>) {
      if (--*remaining == 0) done(Unit{});
    });
  }
}

void Node::add(Bytes data, bool pin, Callback<Cid> done) {
  dag::FileDag file;
  try {
    file = import(data, pin);
  } catch (const Error& e) {
    done(e);
    return;
  }
  std::vector<Cid> cids;
  for (const auto& b : file.nodes) cids.push_back(b.cid);
  provide_many(std::move(cids), [root = file.root, done = std::move(done)](Result<Unit>) { done(root); });
}

void Node::add_directory(std::vector<std::pair<std::string, Bytes>> entries, bool pin, Callback<Cid> done) {
  std::vector<Cid> cids;
  Cid root;
  try {
    std::vector<dag::DirectoryEntry> dir;
    for (const auto& [name, data] : entries) {
      if (!dag::valid_entry_name(name)) throw Error(ErrorCode::invalid_name, name);
    }
    for (const auto& [name, data] : entries) {
      auto file = import(data, false);
      for (const auto& b : file.nodes) cids.push_back(b.cid);
      dir.push_back(dag::DirectoryEntry{name, file.root, file.size});
    }
    auto built = dag::build_directory_dag(std::move(dir));
    store_new({built.node});
    cids.push_back(built.root);
    root = built.root;
    if (pin) pins_.pin(root, true);
  } catch (const Error& e) {
    done(e);
    return;
  }
  provide_many(std::move(cids), [root, done = std::move(done)](Result<Unit>) { done(root); });
}

void Node::get_block(const Cid& cid, Callback<dag::Block> done) {
  if (const auto* data = blocks_.get(cid, env_.now())) {
    done(dag::Block{cid, *data});
    return;
  }
  dht_resolver()(cid, [this, cid, done = std::move(done)](Result<std::vector<dht::PeerInfo>> peers) {
    if (!peers.ok()) {
      done(peers.error());
      return;
    }
    fetch_block(cid, std::move(peers.value()), config_.fetch_timeout, done);
  });
}

void Node::resolve_segments(dag::IpfsPath path, std::size_t index, Callback<Cid> done) {
  if (index >= path.segments.size()) {
    done(path.root);
    return;
  }
  const auto root = path.root;
  get_block(root, [this, path = std::move(path), index, done = std::move(done)](Result<dag::Block> block) mutable {
    if (!block.ok()) {
      done(block.error());
      return;
    }
    const auto& segment = path.segments[index];
    try {
      auto node = dag::verified_node(block.value().cid, block.value().data);
      if (node.kind != dag::NodeKind::directory) throw Error(ErrorCode::not_a_directory, segment);
      auto it = std::ranges::lower_bound(node.links, segment, {}, &dag::Link::name);
      if (it == node.links.end() || it->name != segment) throw Error(ErrorCode::segment_not_found, segment);
      path.root = it->target;
    } catch (const Error& e) {
      done(e);
      return;
    }
    resolve_segments(std::move(path), index + 1, std::move(done));
  });
}

void Node::resolve(std::string path, Callback<Cid> done) {
  resolve_name_path(std::move(path), [this, done = std::move(done)](Result<dag::IpfsPath> p) {
    if (!p.ok()) {
      done(p.error());
      return;
    }
    resolve_segments(std::move(p.value()), 0, done);
  });
}

void Node::ls(std::string path, Callback<std::vector<dag::Link>> done) {
  resolve(std::move(path), [this, done = std::move(done)](Result<Cid> cid) {
    if (!cid.ok()) {
      done(cid.error());
      return;
    }
    get_block(cid.value(), [done](Result<dag::Block> block) {
      if (!block.ok()) {
        done(block.error());
        return;
      }
      try {
        done(dag::verified_node(block.value().cid, block.value().data).links);
      } catch (const Error& e) {
        done(e);
      }
    });
  });
}

void Node::announce_cached(const std::vector<dag::Block>& blocks) {
  for (const auto& b : blocks) {
    const auto* stored = blocks_.peek(b.cid);
    if (!stored || stored->origin != Origin::cached || provided_.contains(b.cid)) continue;
    if (!can_share(b.cid) || !reprovide_enabled(b.cid)) continue;
    provide(b.cid, [](Result<ProvideResult>) {});
  }
}

void Node::get(std::string path, Callback<Content> done) {
  struct State {
    Callback<Content> done;
    Environment::TimerId timer = 0;
    bool finished = false;
  };
  auto state = std::make_shared<State>();
  state->done = std::move(done);
  auto finish = [this, state](Result<Content> r) {
    if (state->finished) return;
    state->finished = true;
    env_.cancel(state->timer);
    state->done(std::move(r));
  };
  state->timer = env_.schedule(config_.request_timeout, [finish, path] { finish(Error(ErrorCode::timeout, path)); });

  resolve(path, [this, state, finish](Result<Cid> cid) {
    if (state->finished) return;
    if (!cid.ok()) {
      finish(cid.error());
      return;
    }
    auto root = cid.value();
    fetch_dag(root, dht_resolver(), [this, root, state, finish](Result<std::vector<dag::Block>> blocks) {
      if (state->finished) return;
      if (!blocks.ok()) {
        finish(blocks.error());
        return;
      }
      std::map<Cid, const Bytes*> fetched;
      for (const auto& b : blocks.value()) fetched.emplace(b.cid, &b.data);
      auto fetcher = [&](const Cid& c) -> std::optional<Bytes> {
        if (auto it = fetched.find(c); it != fetched.end()) return *it->second;
        return local_block(c);
      };
      Bytes data;
      try {
        data = dag::reassemble(root, fetcher);
      } catch (const Error& e) {
        finish(e);
        return;
      }
      announce_cached(blocks.value());
      finish(Content{root, std::move(data)});
    });
  });
}

void Node::pin(const Cid& cid, bool recursive, Callback<Unit> done) {
  auto finish = [this, cid, recursive, done](const std::vector<dag::Block>& blocks) {
    pins_.pin(cid, recursive);
    std::vector<Cid> fresh;
    for (const auto& b : blocks) {
      blocks_.set_origin(b.cid, Origin::local);
      if (!provided_.contains(b.cid)) fresh.push_back(b.cid);
    }
    provide_many(std::move(fresh), [done](Result<Unit>) { done(Unit{}); });
  };
  if (!recursive) {
    get_block(cid, [finish, done](Result<dag::Block> block) {
      if (!block.ok()) {
        done(block.error());
        return;
      }
      finish({block.value()});
    });
    return;
  }
  fetch_dag(cid, dht_resolver(), [finish, done](Result<std::vector<dag::Block>> blocks) {
    if (!blocks.ok()) {
      done(blocks.error());
      return;
    }
    finish(blocks.value());
  });
}

bool Node::unpin(const Cid& cid) { return pins_.unpin(cid); }

}  // namespace pstore
