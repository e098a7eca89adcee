// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include "pstore/bytes.hpp"

namespace pstore::crypto {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(ByteView data);

// Ed25519 signing identity. Keys are derived from a 32-byte seed so that
// seeded simulations reproduce identical identities.
class KeyPair {
 public:
  static constexpr std::size_t kSeedSize = 32;
  static constexpr std::size_t kPublicKeySize = 32;
  static constexpr std::size_t kSignatureSize = 64;
  static constexpr std::uint8_t kEd25519Tag = 0x01;

  static KeyPair from_seed(ByteView seed);

  const Bytes& seed() const { return seed_; }
  const Bytes& raw_public_key() const { return public_key_; }
  // Tag byte followed by the raw key; this is what identities hash.
  Bytes encoded_public_key() const;

  Bytes sign(ByteView message) const;

 private:
  KeyPair() = default;
  Bytes seed_;
  Bytes public_key_;
};

// Verifies against an encoded public key (as produced by encoded_public_key).
// Returns false for malformed keys or signatures.
bool verify(ByteView encoded_public_key, ByteView message, ByteView signature);

}  // namespace pstore::crypto
