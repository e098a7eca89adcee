// SPDX-License-Identifier: Apache-2.0

#include "pstore/crypto.hpp"

#include <openssl/evp.h>

#include <memory>

#include "pstore/error.hpp"

namespace pstore::crypto {
namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

PkeyPtr private_key(ByteView seed) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
  if (!key) throw Error(ErrorCode::internal, "ed25519 key construction failed");
  return key;
}

}  // namespace

Sha256Digest sha256(ByteView data) {
  Sha256Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
    throw Error(ErrorCode::internal, "sha256 failed");
  return out;
}

KeyPair KeyPair::from_seed(ByteView seed) {
  if (seed.size() != kSeedSize) throw Error(ErrorCode::invalid_argument, "ed25519 seed must be 32 bytes");
  auto key = private_key(seed);
  KeyPair kp;
  kp.seed_.assign(seed.begin(), seed.end());
  kp.public_key_.resize(kPublicKeySize);
  std::size_t len = kp.public_key_.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), kp.public_key_.data(), &len) != 1 || len != kPublicKeySize)
    throw Error(ErrorCode::internal, "ed25519 public key extraction failed");
  return kp;
}

Bytes KeyPair::encoded_public_key() const {
  Bytes out;
  out.reserve(1 + public_key_.size());
  out.push_back(kEd25519Tag);
  out.insert(out.end(), public_key_.begin(), public_key_.end());
  return out;
}

Bytes KeyPair::sign(ByteView message) const {
  auto key = private_key(seed_);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  Bytes sig(kSignatureSize);
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
    throw Error(ErrorCode::internal, "ed25519 signing failed");
  sig.resize(len);
  return sig;
}

bool verify(ByteView encoded_public_key, ByteView message, ByteView signature) {
  if (encoded_public_key.size() != 1 + KeyPair::kPublicKeySize || encoded_public_key[0] != KeyPair::kEd25519Tag ||
      signature.size() != KeyPair::kSignatureSize)
    return false;
  auto raw = encoded_public_key.subspan(1);
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, raw.data(), raw.size()));
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
}

}  // namespace pstore::crypto
