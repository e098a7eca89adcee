// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "oracles.hpp"
#include "pstore/cid.hpp"
#include "pstore/error.hpp"

using namespace pstore;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::internal;
}

}  // namespace

TEST_SUITE("cid") {
  TEST_CASE("known vector") {
    // sha256("hello world")
    auto cid = Cid::from_bytes(to_bytes("hello world"));
    CHECK(cid.to_string() == "QmaozNR7DZHQK1ZcU9p7QdrshMvXqWK6gpu5rmrkPdT3L4");
    CHECK(cid.bytes().size() == 34);
  }

  TEST_CASE("round trip, prefix and oracle agreement over random inputs") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
      auto x = oracle::random_bytes(rng, rng() % 600);
      auto cid = Cid::from_bytes(x);
      auto text = cid.to_string();
      REQUIRE(Cid::parse(text) == cid);
      REQUIRE(text.starts_with("Qm"));
      REQUIRE(text == oracle::base58(cid.bytes()));
      auto d = oracle::sha256(x);
      REQUIRE(std::equal(d.begin(), d.end(), cid.digest().begin(), cid.digest().end()));
    }
  }

  TEST_CASE("base58 is a bijection") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
      auto x = oracle::random_bytes(rng, rng() % 40);
      if (i % 7 == 0) x.insert(x.begin(), static_cast<std::size_t>(rng() % 4), 0);
      auto text = base58_encode(x);
      REQUIRE(text == oracle::base58(x));
      REQUIRE(base58_decode(text) == x);
      REQUIRE(base58_encode(base58_decode(text)) == text);
    }
    CHECK(base58_encode({}).empty());
    CHECK(code_of([] { base58_decode("abc0"); }) == ErrorCode::invalid_character);
    CHECK(code_of([] { base58_decode("Il"); }) == ErrorCode::invalid_character);
  }

  TEST_CASE("verification is sound") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      auto x = oracle::random_bytes(rng, 1 + rng() % 100);
      auto cid = Cid::from_bytes(x);
      REQUIRE(cid_verify(x, cid));
      auto y = x;
      y[rng() % y.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      REQUIRE_FALSE(cid_verify(y, cid));
    }
  }

  TEST_CASE("parse errors") {
    auto good = Cid::from_bytes(to_bytes("x")).bytes();
    auto truncated = Bytes(good.begin(), good.end() - 3);
    CHECK(code_of([&] { Cid::parse(base58_encode(truncated)); }) == ErrorCode::truncated_multihash);
    auto wrong_len = good;
    wrong_len[1] = 0x10;
    wrong_len.resize(18);
    CHECK(code_of([&] { Cid::parse(base58_encode(wrong_len)); }) == ErrorCode::length_mismatch);
    auto unknown = good;
    unknown[0] = 0x33;
    CHECK(code_of([&] { Cid::parse(base58_encode(unknown)); }) == ErrorCode::unknown_code);
    CHECK(code_of([] { Cid::parse("Qm0000"); }) == ErrorCode::invalid_character);
    CHECK(code_of([] { Cid::parse(""); }) == ErrorCode::truncated_multihash);
  }

  TEST_CASE("alternate hash functions can be registered") {
    constexpr std::uint64_t code = 0x99;
    register_hash_function({code, "fnv1a-32", 4, [](ByteView data) {
                              std::uint32_t h = 2166136261u;
                              for (auto b : data) h = (h ^ b) * 16777619u;
                              return Bytes{std::uint8_t(h >> 24), std::uint8_t(h >> 16), std::uint8_t(h >> 8),
                                           std::uint8_t(h)};
                            }});
    auto cid = Cid::from_bytes(to_bytes("abc"), code);
    CHECK(cid.code() == code);
    CHECK(cid.bytes().size() == 2 + 4 + 1);  // 0x99 needs a two-byte varint
    CHECK(Cid::parse(cid.to_string()) == cid);
    CHECK(cid_verify(to_bytes("abc"), cid));
    unregister_hash_function(code);
    CHECK_FALSE(hash_function_known(code));
  }
}
