// SPDX-License-Identifier: Apache-2.0

#include "pstore/error.hpp"

namespace pstore {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::unsupported_code: return "unsupported-code";
    case ErrorCode::unknown_code: return "unknown-code";
    case ErrorCode::invalid_character: return "invalid-character";
    case ErrorCode::truncated_multihash: return "truncated-multihash";
    case ErrorCode::malformed_node: return "malformed-node";
    case ErrorCode::duplicate_name: return "duplicate-name";
    case ErrorCode::invalid_name: return "invalid-name";
    case ErrorCode::invalid_path: return "invalid-path";
    case ErrorCode::segment_not_found: return "segment-not-found";
    case ErrorCode::not_a_directory: return "not-a-directory";
    case ErrorCode::is_a_directory: return "is-a-directory";
    case ErrorCode::fetch_failure: return "fetch-failure";
    case ErrorCode::integrity_violation: return "integrity-violation";
    case ErrorCode::missing_block: return "missing-block";
    case ErrorCode::no_known_peers: return "no-known-peers";
    case ErrorCode::malformed_message: return "malformed-message";
    case ErrorCode::unsupported_digest: return "unsupported-digest";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::storage_full: return "storage-full";
    case ErrorCode::invalid_signature: return "invalid-signature";
    case ErrorCode::no_record: return "no-record";
    case ErrorCode::malformed_dnslink: return "malformed-dnslink";
    case ErrorCode::recursion_limit: return "recursion-limit";
    case ErrorCode::overlapping_groups: return "overlapping-groups";
    case ErrorCode::unknown_node: return "unknown-node";
    case ErrorCode::address_in_use: return "address-in-use";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace pstore
