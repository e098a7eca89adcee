// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "pstore/node.hpp"

namespace pstore::persist {

/// On-disk node state:
///   <dir>/blocks/<cid>   one file per block, raw canonical bytes
///   <dir>/manifest.json  identity seed, pins, IPNS sequence and record,
///                        per-cid reprovide opt-outs, cached-origin cids
class Repo {
 public:
  explicit Repo(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  // Existing identity, or a new random one written to the manifest.
  Bytes identity_seed();
  // Restores blocks, pins and naming state. Corrupt block files are skipped.
  void load(Node& node);
  // Writes new blocks, removes evicted ones and rewrites the manifest.
  void save(const Node& node);

 private:
  std::filesystem::path dir_;
};

}  // namespace pstore::persist
