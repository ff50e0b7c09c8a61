// Copyright 2026 The histkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HISTKIT_COMMANDS_HPP
#define HISTKIT_COMMANDS_HPP

#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "histkit/report.hpp"
#include "histkit/scenario.hpp"

namespace histkit {

/// Flag values that override scenario sections.
struct RunOptions {
    std::optional<double> tol;
    std::optional<double> p_yes;
    std::optional<bool> box_open;
    std::vector<long long> m;
    std::vector<double> amplitudes;
    /// born demo: tolerance for the rational approximation of `amplitudes`.
    double approx_tol = 1e-3;
    std::vector<int> extent;
    std::optional<double> spacing;
    std::optional<double> mass;
    std::optional<double> epsilon;
    /// propagator table: feynman | plus | minus | kernel
    std::string kind = "feynman";
    double lambda = 0.5;
    std::vector<int> slices{8, 16, 32};
};

/// "histories check", "propagator table", ..., "cat run".
const std::vector<std::string> &command_names();

ReportDocument run(const std::string &command, const ScenarioConfig &config, const RunOptions &options);

/// 0 success, 1 invariant failure, 2 parse or validation error, 3 numerical failure.
int exit_code(const ReportDocument &r);
int exit_code(const std::exception &e);

}  // namespace histkit

#endif
