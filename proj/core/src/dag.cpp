// SPDX-License-Identifier: Apache-2.0

#include "pstore/dag.hpp"

#include <algorithm>
#include <istream>
#include <set>

#include "pstore/error.hpp"

namespace pstore::dag {

std::uint64_t DagNode::total_size() const {
  if (kind == NodeKind::leaf) return data.size();
  std::uint64_t total = 0;
  for (const auto& l : links) total += l.subtree_size;
  return total;
}

Bytes node_serialize(const DagNode& node) {
  Bytes out;
  out.reserve(node.data.size() + node.links.size() * 48 + 8);
  out.push_back(static_cast<std::uint8_t>(node.kind));
  put_varint(out, node.links.size());
  for (const auto& l : node.links) {
    put_varint(out, l.name.size());
    out.insert(out.end(), l.name.begin(), l.name.end());
    const auto& cid = l.target.bytes();
    put_varint(out, cid.size());
    out.insert(out.end(), cid.begin(), cid.end());
    put_varint(out, l.subtree_size);
  }
  put_varint(out, node.data.size());
  out.insert(out.end(), node.data.begin(), node.data.end());
  return out;
}

DagNode node_deserialize(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::malformed_node);
  DagNode node;
  auto kind = in.u8();
  if (kind > static_cast<std::uint8_t>(NodeKind::directory)) throw Error(ErrorCode::malformed_node, "unknown node kind");
  node.kind = static_cast<NodeKind>(kind);

  auto count = in.varint();
  // Each link needs at least three bytes; bounds the reservation.
  if (count > in.remaining() / 3) throw Error(ErrorCode::malformed_node, "link count exceeds input");
  node.links.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Link l;
    l.name = in.take_string(in.varint());
    auto cid_len = in.varint();
    try {
      l.target = Cid::from_multihash(in.take(cid_len));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::malformed_node) throw;
      throw Error(ErrorCode::malformed_node, std::string("bad link cid: ") + e.what());
    }
    l.subtree_size = in.varint();
    node.links.push_back(std::move(l));
  }
  node.data = in.take_bytes(in.varint());
  if (!in.done()) throw Error(ErrorCode::malformed_node, "trailing bytes");

  switch (node.kind) {
    case NodeKind::leaf:
      if (!node.links.empty()) throw Error(ErrorCode::malformed_node, "leaf with links");
      break;
    case NodeKind::file:
      if (node.links.empty() || !node.data.empty()) throw Error(ErrorCode::malformed_node, "bad file node");
      for (const auto& l : node.links)
        if (!l.name.empty()) throw Error(ErrorCode::malformed_node, "named file link");
      break;
    case NodeKind::directory:
      if (!node.data.empty()) throw Error(ErrorCode::malformed_node, "directory with data");
      for (std::size_t i = 0; i < node.links.size(); ++i) {
        if (!valid_entry_name(node.links[i].name)) throw Error(ErrorCode::malformed_node, "bad entry name");
        if (i > 0 && !(node.links[i - 1].name < node.links[i].name))
          throw Error(ErrorCode::malformed_node, "directory entries not sorted");
      }
      break;
  }
  return node;
}

Block Block::from_node(const DagNode& node) {
  Block b;
  b.data = node_serialize(node);
  b.cid = Cid::from_bytes(b.data);
  return b;
}

DagNode verified_node(const Cid& cid, ByteView bytes) {
  if (!cid_verify(bytes, cid)) throw Error(ErrorCode::integrity_violation, cid.to_string());
  return node_deserialize(bytes);
}

std::vector<Block> chunk(ByteView input, std::size_t chunk_size) {
  if (chunk_size == 0) throw Error(ErrorCode::invalid_argument, "chunk size must be positive");
  std::vector<Block> blocks;
  if (input.empty()) {
    blocks.push_back(Block::from_node(DagNode::leaf({})));
    return blocks;
  }
  blocks.reserve((input.size() + chunk_size - 1) / chunk_size);
  for (std::size_t off = 0; off < input.size(); off += chunk_size)
    blocks.push_back(Block::from_node(DagNode::leaf(input.subspan(off, std::min(chunk_size, input.size() - off)))));
  return blocks;
}

std::vector<Block> chunk(std::istream& input, std::size_t chunk_size) {
  if (chunk_size == 0) throw Error(ErrorCode::invalid_argument, "chunk size must be positive");
  std::vector<Block> blocks;
  Bytes buf(chunk_size);
  while (input) {
    input.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(chunk_size));
    auto got = static_cast<std::size_t>(input.gcount());
    if (got == 0) break;
    blocks.push_back(Block::from_node(DagNode::leaf(ByteView(buf).first(got))));
  }
  if (blocks.empty()) blocks.push_back(Block::from_node(DagNode::leaf({})));
  return blocks;
}

FileDag build_file_dag(std::span<const Block> leaves, std::size_t fanout) {
  if (leaves.empty()) throw Error(ErrorCode::invalid_argument, "no blocks");
  if (fanout < 2) throw Error(ErrorCode::invalid_argument, "fanout must be at least 2");

  FileDag dag;
  dag.nodes.assign(leaves.begin(), leaves.end());

  struct Ref {
    Cid cid;
    std::uint64_t size;
  };
  std::vector<Ref> level;
  level.reserve(leaves.size());
  for (const auto& b : leaves) level.push_back({b.cid, b.node().total_size()});

  while (level.size() > 1) {
    std::vector<Ref> next;
    next.reserve(level.size() / fanout + 1);
    for (std::size_t i = 0; i < level.size(); i += fanout) {
      std::size_t end = std::min(level.size(), i + fanout);
      if (end - i == 1) {
        next.push_back(level[i]);
        continue;
      }
      DagNode node{NodeKind::file, {}, {}};
      node.links.reserve(end - i);
      for (std::size_t j = i; j < end; ++j) node.links.push_back({"", level[j].cid, level[j].size});
      auto block = Block::from_node(node);
      next.push_back({block.cid, node.total_size()});
      dag.nodes.push_back(std::move(block));
    }
    level = std::move(next);
  }
  dag.root = level.front().cid;
  dag.size = level.front().size;
  return dag;
}

bool valid_entry_name(std::string_view name) {
  return !name.empty() && name.find('/') == std::string_view::npos && name.find('\0') == std::string_view::npos;
}

DirectoryDag build_directory_dag(std::vector<DirectoryEntry> entries) {
  std::ranges::sort(entries, {}, &DirectoryEntry::name);
  DagNode node{NodeKind::directory, {}, {}};
  node.links.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!valid_entry_name(entries[i].name)) throw Error(ErrorCode::invalid_name, "'" + entries[i].name + "'");
    if (i > 0 && entries[i].name == entries[i - 1].name) throw Error(ErrorCode::duplicate_name, entries[i].name);
    node.links.push_back({entries[i].name, entries[i].cid, entries[i].size});
  }
  DirectoryDag dir;
  dir.node = Block::from_node(node);
  dir.root = dir.node.cid;
  dir.size = node.total_size();
  return dir;
}

std::vector<std::string> split_segments(std::string_view rest) {
  std::vector<std::string> segments;
  while (!rest.empty()) {
    if (rest.front() != '/') throw Error(ErrorCode::invalid_path, "expected '/'");
    rest.remove_prefix(1);
    if (rest.empty()) break;  // trailing slash
    auto end = rest.find('/');
    auto seg = rest.substr(0, end);
    if (seg.empty()) throw Error(ErrorCode::invalid_path, "empty path segment");
    segments.emplace_back(seg);
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  }
  return segments;
}

IpfsPath IpfsPath::parse(std::string_view text) {
  constexpr std::string_view kPrefix = "/ipfs/";
  if (!text.starts_with(kPrefix)) throw Error(ErrorCode::invalid_path, "path must start with /ipfs/");
  text.remove_prefix(kPrefix.size());
  auto end = text.find('/');
  auto cid_text = text.substr(0, end);
  if (cid_text.empty()) throw Error(ErrorCode::invalid_path, "missing cid");
  IpfsPath path;
  path.root = Cid::parse(cid_text);
  path.segments = split_segments(end == std::string_view::npos ? std::string_view{} : text.substr(end));
  return path;
}

std::string IpfsPath::to_string() const {
  std::string out = "/ipfs/" + root.to_string();
  for (const auto& s : segments) out += "/" + s;
  return out;
}

Cid resolve_path(const IpfsPath& path, const BlockFetcher& fetch) {
  Cid current = path.root;
  for (const auto& segment : path.segments) {
    auto bytes = fetch(current);
    if (!bytes) throw Error(ErrorCode::fetch_failure, current.to_string());
    auto node = verified_node(current, *bytes);
    if (node.kind != NodeKind::directory) throw Error(ErrorCode::not_a_directory, segment);
    auto it = std::ranges::lower_bound(node.links, segment, {}, &Link::name);
    if (it == node.links.end() || it->name != segment) throw Error(ErrorCode::segment_not_found, segment);
    current = it->target;
  }
  return current;
}

namespace {

void append_leaves(const Cid& cid, const BlockFetcher& fetch, Bytes& out, bool is_root) {
  auto bytes = fetch(cid);
  if (!bytes) throw Error(ErrorCode::missing_block, cid.to_string());
  auto node = verified_node(cid, *bytes);
  switch (node.kind) {
    case NodeKind::leaf:
      out.insert(out.end(), node.data.begin(), node.data.end());
      break;
    case NodeKind::file:
      for (const auto& l : node.links) append_leaves(l.target, fetch, out, false);
      break;
    case NodeKind::directory:
      throw Error(is_root ? ErrorCode::is_a_directory : ErrorCode::malformed_node, cid.to_string());
  }
}

}  // namespace

Bytes reassemble(const Cid& root, const BlockFetcher& fetch) {
  Bytes out;
  append_leaves(root, fetch, out, true);
  return out;
}

}  // namespace pstore::dag
