// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pstore::sim {

struct ScenarioResult {
  bool passed = true;
  std::vector<std::string> failures;  // one line per failed expectation
  std::string report;                 // JSON; byte-identical across runs with the same input
};

// Runs a JSON scenario script. Throws Error(invalid-argument) when the
// script does not match the schema.
ScenarioResult run_scenario(std::string_view script);
ScenarioResult run_scenario_file(const std::filesystem::path& path);

}  // namespace pstore::sim
