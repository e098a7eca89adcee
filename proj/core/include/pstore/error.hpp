// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace pstore {

enum class ErrorCode {
  // cid
  length_mismatch,
  unsupported_code,
  unknown_code,
  invalid_character,
  truncated_multihash,
  // dag
  malformed_node,
  duplicate_name,
  invalid_name,
  invalid_path,
  segment_not_found,
  not_a_directory,
  is_a_directory,
  fetch_failure,
  integrity_violation,
  missing_block,
  // dht / exchange
  no_known_peers,
  malformed_message,
  unsupported_digest,
  not_found,
  timeout,
  // node
  storage_full,
  invalid_signature,
  no_record,
  malformed_dnslink,
  recursion_limit,
  // simnet / gateway / misc
  overlapping_groups,
  unknown_node,
  address_in_use,
  invalid_argument,
  io_error,
  internal,
};

// Kebab-case name, e.g. "not-found". Used on the CLI diagnostic stream.
std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code) {}
  explicit Error(ErrorCode code) : Error(code, "") {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Value-or-error carried through asynchronous completion callbacks.
template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Result(Error error) : v_(std::move(error)) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & {
    if (!ok()) throw std::get<1>(v_);
    return std::get<0>(v_);
  }
  const T& value() const& {
    if (!ok()) throw std::get<1>(v_);
    return std::get<0>(v_);
  }
  T&& value() && {
    if (!ok()) throw std::get<1>(v_);
    return std::get<0>(std::move(v_));
  }
  const Error& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, Error> v_;
};

struct Unit {
  bool operator==(const Unit&) const = default;
};

}  // namespace pstore
