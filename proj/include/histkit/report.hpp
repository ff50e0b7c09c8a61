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

#ifndef HISTKIT_REPORT_HPP
#define HISTKIT_REPORT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace histkit {

using Cell = std::variant<std::string, double, long long, bool>;

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// A named invariant with its measured residual.
struct Verdict {
    std::string invariant;
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
};

struct ReportDocument {
    std::string command;
    std::string config_hash;
    double tolerance = 0;
    std::vector<std::pair<std::string, Cell>> metadata;
    std::vector<ReportTable> tables;
    std::vector<Verdict> verdicts;

    /// residual ≤ tolerance decides the verdict.
    void check(const std::string &invariant, double residual, double tolerance);
    /// Records a boolean outcome as residual 0 (holds) or 1 (fails) against tolerance 0.
    void require(const std::string &invariant, bool holds);
    bool pass() const;
};

enum class ReportFormat { text, csv, json };

ReportFormat parse_format(const std::string &name);
std::string emit(const ReportDocument &r, ReportFormat f);

/// %.17g
std::string format_number(double x);

/// 64-bit FNV-1a, hex-encoded.
std::string fnv1a_hex(const std::string &bytes);

}  // namespace histkit

#endif
