// SPDX-License-Identifier: Apache-2.0

#include "pstore/bytes.hpp"

namespace pstore {

std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto c : b) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(ErrorCode::invalid_argument, "odd-length hex");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::invalid_argument, "bad hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

void put_varint(Bytes& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(value | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

std::size_t varint_size(std::uint64_t value) {
  std::size_t n = 1;
  while (value >= 0x80) {
    value >>= 7;
    ++n;
  }
  return n;
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteReader::fail(const char* what) const {
  throw Error(code_, what);
}

std::uint8_t ByteReader::u8() {
  if (pos_ >= data_.size()) fail("unexpected end of input");
  return data_[pos_++];
}

// Rejects overlong (non-minimal) encodings so every value has one byte form.
std::uint64_t ByteReader::varint() {
  std::uint64_t value = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    std::uint8_t b = u8();
    if (shift == 63 && b > 1) fail("varint overflow");
    value |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if ((b & 0x80) == 0) {
      if (b == 0 && shift != 0) fail("non-minimal varint");
      return value;
    }
  }
  fail("varint too long");
}

std::uint64_t ByteReader::u64() {
  auto v = take(8);
  std::uint64_t out = 0;
  for (auto b : v) out = out << 8 | b;
  return out;
}

ByteView ByteReader::take(std::size_t n) {
  if (n > remaining()) fail("unexpected end of input");
  auto v = data_.subspan(pos_, n);
  pos_ += n;
  return v;
}

}  // namespace pstore
