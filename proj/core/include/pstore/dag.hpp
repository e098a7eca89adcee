// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pstore/bytes.hpp"
#include "pstore/cid.hpp"

namespace pstore::dag {

inline constexpr std::size_t kDefaultChunkSize = 262144;
inline constexpr std::size_t kDefaultFanout = 174;

enum class NodeKind : std::uint8_t { leaf = 0, file = 1, directory = 2 };

struct Link {
  std::string name;  // empty for file links
  Cid target;
  std::uint64_t subtree_size = 0;

  bool operator==(const Link&) const = default;
};

struct DagNode {
  NodeKind kind = NodeKind::leaf;
  std::vector<Link> links;
  Bytes data;  // leaf payload only

  bool operator==(const DagNode&) const = default;

  static DagNode leaf(ByteView payload) { return DagNode{NodeKind::leaf, {}, Bytes(payload.begin(), payload.end())}; }
  // Leaf payload bytes, or the sum of link subtree sizes.
  std::uint64_t total_size() const;
};

// Canonical node layout:
//   kind(1) varint(links) [varint(name_len) name varint(cid_len) cid varint(size)]* varint(data_len) data
Bytes node_serialize(const DagNode& node);
// Throws malformed-node on anything the canonical encoder would not emit.
DagNode node_deserialize(ByteView bytes);

/// A stored unit: the canonical serialization of one DAG node and its Cid.
struct Block {
  Cid cid;
  Bytes data;

  static Block from_node(const DagNode& node);
  // Decodes data; does not re-verify the Cid.
  DagNode node() const { return node_deserialize(data); }

  bool operator==(const Block&) const = default;
};

// Decodes bytes claimed to be the block for `cid`, throwing
// integrity-violation if they do not hash to it.
DagNode verified_node(const Cid& cid, ByteView bytes);

// Fixed-size slicing into leaf blocks. Empty input gives one empty leaf.
std::vector<Block> chunk(ByteView input, std::size_t chunk_size = kDefaultChunkSize);
std::vector<Block> chunk(std::istream& input, std::size_t chunk_size = kDefaultChunkSize);

struct FileDag {
  Cid root;
  std::uint64_t size = 0;
  // Every node of the tree, leaves first, the root last.
  std::vector<Block> nodes;
};

// Groups nodes `fanout` at a time level by level until one remains. A lone
// node left over at the end of a level is carried up unwrapped, so a single
// block is its own root.
FileDag build_file_dag(std::span<const Block> leaves, std::size_t fanout = kDefaultFanout);

struct DirectoryEntry {
  std::string name;
  Cid cid;
  std::uint64_t size = 0;
};

struct DirectoryDag {
  Cid root;
  Block node;
  std::uint64_t size = 0;
};

DirectoryDag build_directory_dag(std::vector<DirectoryEntry> entries);

bool valid_entry_name(std::string_view name);

/// "/ipfs/<cid>/seg1/seg2"
struct IpfsPath {
  Cid root;
  std::vector<std::string> segments;

  static IpfsPath parse(std::string_view text);
  std::string to_string() const;

  bool operator==(const IpfsPath&) const = default;
};

// Splits "/a/b/c" into segments; rejects empty segments except one trailing slash.
std::vector<std::string> split_segments(std::string_view rest);

using BlockFetcher = std::function<std::optional<Bytes>(const Cid&)>;

Cid resolve_path(const IpfsPath& path, const BlockFetcher& fetch);

// Depth-first, left-to-right concatenation of leaf payloads. Every block is
// verified before use; nothing is returned unless the whole file verified.
Bytes reassemble(const Cid& root, const BlockFetcher& fetch);

}  // namespace pstore::dag
