// Copyright 2026 The qbayes Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace qbayes::cli {

/// Flag overrides; unset fields fall back to the config's run block.
struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<double> alpha;
    std::string out_dir = ".";
    std::string format = "both";  ///< csv, json or both
    Tolerances tol;
    unsigned threads = 1;
};

const std::vector<std::string>& command_names();

struct RunSummary {
    std::string command;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;
};

/// Builds every object, dispatches, and writes `<command>.csv` and
/// `<command>.result.json` under out_dir. Domain failures propagate as
/// Error, missing parameters as UsageError.
RunSummary run_command(const Config& cfg, const std::string& command, const RunOptions& opts);

/// Merges every `*.result.json` in the directory into report.md and
/// report.csv. Throws EmptyRunDir when there is nothing to merge.
std::vector<std::string> write_report(const std::string& run_dir);

}  // namespace qbayes::cli
