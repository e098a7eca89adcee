// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pstore/error.hpp"

namespace pstore {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);

// Unsigned LEB128.
void put_varint(Bytes& out, std::uint64_t value);
std::size_t varint_size(std::uint64_t value);

// Sequential reader over a byte view. Every read throws Error on underflow
// with the error code given at construction.
class ByteReader {
 public:
  ByteReader(ByteView data, ErrorCode error_code) : data_(data), code_(error_code) {}

  std::uint8_t u8();
  std::uint64_t varint();
  std::uint64_t u64();
  ByteView take(std::size_t n);
  Bytes take_bytes(std::size_t n) {
    auto v = take(n);
    return Bytes(v.begin(), v.end());
  }
  std::string take_string(std::size_t n) {
    auto v = take(n);
    return std::string(v.begin(), v.end());
  }

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  [[noreturn]] void fail(const char* what) const;

  ByteView data_;
  std::size_t pos_ = 0;
  ErrorCode code_;
};

void put_u64(Bytes& out, std::uint64_t v);

}  // namespace pstore
