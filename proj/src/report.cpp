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

#include "histkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "histkit/errors.hpp"

namespace histkit {

void ReportDocument::check(const std::string &invariant, double residual, double tol) {
    verdicts.push_back({invariant, residual, tol, std::isfinite(residual) && residual <= tol});
}

void ReportDocument::require(const std::string &invariant, bool holds) {
    verdicts.push_back({invariant, holds ? 0.0 : 1.0, 0.0, holds});
}

bool ReportDocument::pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.pass; });
}

ReportFormat parse_format(const std::string &name) {
    if (name == "text") {
        return ReportFormat::text;
    }
    if (name == "csv") {
        return ReportFormat::csv;
    }
    if (name == "json") {
        return ReportFormat::json;
    }
    throw InputError("unknown format '" + name + "' (expected text, csv or json)");
}

std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fnv1a_hex(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string plain(const Cell &c) {
    struct V {
        std::string operator()(const std::string &s) const {
            return s;
        }
        std::string operator()(double x) const {
            return format_number(x);
        }
        std::string operator()(long long x) const {
            return std::to_string(x);
        }
        std::string operator()(bool b) const {
            return b ? "true" : "false";
        }
    };
    return std::visit(V{}, c);
}

std::string json_string(const std::string &s) {
    std::string out = "\"";
    for (unsigned char ch : s) {
        switch (ch) {
            case '"':
                out += "\\\"";
                break;
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            case '\t':
                out += "\\t";
                break;
            default:
                if (ch < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += static_cast<char>(ch);
                }
        }
    }
    return out + "\"";
}

std::string json_number(double x) {
    // JSON has no inf/nan literals.
    return std::isfinite(x) ? format_number(x) : json_string(format_number(x));
}

std::string json_cell(const Cell &c) {
    if (const auto *s = std::get_if<std::string>(&c)) {
        return json_string(*s);
    }
    if (const auto *d = std::get_if<double>(&c)) {
        return json_number(*d);
    }
    return plain(c);
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + "\"";
}

std::string emit_text(const ReportDocument &r) {
    std::ostringstream o;
    o << "command: " << r.command << "\n";
    o << "config: " << r.config_hash << "\n";
    o << "tolerance: " << format_number(r.tolerance) << "\n";
    for (const auto &[k, v] : r.metadata) {
        o << k << ": " << plain(v) << "\n";
    }
    for (const auto &t : r.tables) {
        o << "\n[" << t.name << "]\n";
        std::vector<std::size_t> width(t.columns.size());
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            width[j] = t.columns[j].size();
            for (const auto &row : t.rows) {
                width[j] = std::max(width[j], plain(row[j]).size());
            }
        }
        auto line = [&](const std::vector<std::string> &cells) {
            for (std::size_t j = 0; j < cells.size(); ++j) {
                o << (j ? "  " : "") << cells[j];
                if (j + 1 < cells.size()) {
                    o << std::string(width[j] - cells[j].size(), ' ');
                }
            }
            o << "\n";
        };
        line(t.columns);
        for (const auto &row : t.rows) {
            std::vector<std::string> cells;
            for (const auto &c : row) {
                cells.push_back(plain(c));
            }
            line(cells);
        }
    }
    if (!r.verdicts.empty()) {
        o << "\n";
    }
    for (const auto &v : r.verdicts) {
        o << (v.pass ? "PASS " : "FAIL ") << v.invariant << "  residual=" << format_number(v.residual)
          << "  tol=" << format_number(v.tolerance) << "\n";
    }
    o << "verdict: " << (r.pass() ? "PASS" : "FAIL") << "\n";
    return o.str();
}

std::string emit_csv(const ReportDocument &r) {
    std::ostringstream o;
    o << "invariant,residual,tolerance,pass\n";
    for (const auto &v : r.verdicts) {
        o << csv_field(v.invariant) << "," << format_number(v.residual) << "," << format_number(v.tolerance) << ","
          << (v.pass ? "true" : "false") << "\n";
    }
    for (const auto &t : r.tables) {
        o << "\n# " << t.name << "\n";
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            o << (j ? "," : "") << csv_field(t.columns[j]);
        }
        o << "\n";
        for (const auto &row : t.rows) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                o << (j ? "," : "") << csv_field(plain(row[j]));
            }
            o << "\n";
        }
    }
    return o.str();
}

std::string emit_json(const ReportDocument &r) {
    std::ostringstream o;
    o << "{\n";
    o << "  \"command\": " << json_string(r.command) << ",\n";
    o << "  \"config_hash\": " << json_string(r.config_hash) << ",\n";
    o << "  \"tolerance\": " << json_number(r.tolerance) << ",\n";
    o << "  \"metadata\": {";
    for (std::size_t i = 0; i < r.metadata.size(); ++i) {
        o << (i ? ", " : "") << json_string(r.metadata[i].first) << ": " << json_cell(r.metadata[i].second);
    }
    o << "},\n";
    o << "  \"tables\": [";
    for (std::size_t i = 0; i < r.tables.size(); ++i) {
        const auto &t = r.tables[i];
        o << (i ? "," : "") << "\n    {\"name\": " << json_string(t.name) << ", \"columns\": [";
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            o << (j ? ", " : "") << json_string(t.columns[j]);
        }
        o << "], \"rows\": [";
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            o << (k ? "," : "") << "\n      [";
            for (std::size_t j = 0; j < t.rows[k].size(); ++j) {
                o << (j ? ", " : "") << json_cell(t.rows[k][j]);
            }
            o << "]";
        }
        o << (t.rows.empty() ? "" : "\n    ") << "]}";
    }
    o << (r.tables.empty() ? "" : "\n  ") << "],\n";
    o << "  \"verdicts\": [";
    for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
        const auto &v = r.verdicts[i];
        o << (i ? "," : "") << "\n    {\"invariant\": " << json_string(v.invariant)
          << ", \"residual\": " << json_number(v.residual) << ", \"tolerance\": " << json_number(v.tolerance)
          << ", \"pass\": " << (v.pass ? "true" : "false") << "}";
    }
    o << (r.verdicts.empty() ? "" : "\n  ") << "],\n";
    o << "  \"pass\": " << (r.pass() ? "true" : "false") << "\n";
    o << "}\n";
    return o.str();
}

}  // namespace

std::string emit(const ReportDocument &r, ReportFormat f) {
    switch (f) {
        case ReportFormat::text:
            return emit_text(r);
        case ReportFormat::csv:
            return emit_csv(r);
        case ReportFormat::json:
            return emit_json(r);
    }
    return {};
}

}  // namespace histkit
