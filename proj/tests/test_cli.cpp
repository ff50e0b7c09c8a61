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

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "histkit/commands.hpp"
#include "histkit/errors.hpp"
#include "histkit/report.hpp"
#include "histkit/scenario.hpp"
#include "support.hpp"

namespace histkit {
namespace {

namespace fs = std::filesystem;

std::string scenario_path(const std::string &name) {
    return std::string(HISTKIT_SCENARIO_DIR) + "/" + name;
}

std::string read_file(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Minimal RFC 4180 reader: quoted fields may hold commas and doubled quotes.
std::vector<std::vector<std::string>> parse_csv_block(std::istream &in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line) && !line.empty()) {
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (ch == '"') {
                    quoted = false;
                } else {
                    cur += ch;
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        rows.push_back(fields);
    }
    return rows;
}

int run_tool(const std::string &args, const std::string &env = "") {
    const std::string cmd = env + " " + HISTKIT_TOOL + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(ParseScenario, MeasurementScenario) {
    const ScenarioConfig c = load_scenario(scenario_path("measurement.yaml"));
    EXPECT_EQ(c.name, "measurement");
    EXPECT_EQ(c.subsystems.size(), 2u);
    EXPECT_EQ(c.dims(), (std::vector<int>{2, 2}));
}

TEST(ParseScenario, EveryShippedScenarioRoundTrips) {
    for (const auto &entry : fs::directory_iterator(HISTKIT_SCENARIO_DIR)) {
        const ScenarioConfig c = load_scenario(entry.path().string());
        const std::string text = emit_scenario(c);
        const ScenarioConfig back = parse_scenario(text);
        EXPECT_TRUE(back == c) << entry.path();
        EXPECT_EQ(emit_scenario(back), text) << entry.path();
    }
}

TEST(ParseScenario, EmptyDocument) {
    try {
        parse_scenario("");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_NE(std::string(e.what()).find("missing required section: spaces"), std::string::npos);
    }
}

TEST(ParseScenario, UnknownKeyReportsLocation) {
    const std::string text = "spaces:\n  - {name: S, dim: 2}\nbogus: 1\n";
    try {
        parse_scenario(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.column(), 1);
        EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    }
}

TEST(ParseScenario, UnknownNestedKeyRejected) {
    const std::string text =
        "spaces:\n  - {name: S, dim: 2, colour: red}\n";
    EXPECT_THROW(parse_scenario(text), ParseError);
}

TEST(ParseScenario, DuplicateSubsystemNamed) {
    const std::string text =
        "spaces:\n  - {name: S, dim: 2}\n"
        "subsystems:\n"
        "  - {name: X, interaction: identity, outcomes: {factor: S, sets: [[0], [1]]}}\n"
        "  - {name: X, interaction: identity, outcomes: {factor: S, sets: [[0], [1]]}}\n";
    try {
        parse_scenario(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_NE(std::string(e.what()).find("duplicate subsystem name 'X'"), std::string::npos);
        EXPECT_EQ(e.line(), 5);
    }
}

TEST(ParseScenario, SyntaxError) {
    EXPECT_THROW(parse_scenario("spaces: [\n"), ParseError);
}

TEST(ParseScenario, UnresolvedFactorName) {
    const std::string text =
        "spaces:\n  - {name: S, dim: 2}\n"
        "subsystems:\n"
        "  - {name: X, interaction: identity, outcomes: {factor: Q, sets: [[0], [1]]}}\n";
    EXPECT_THROW(parse_scenario(text), ParseError);
}

TEST(ComplexLiteral, Forms) {
    EXPECT_EQ(parse_complex("1.5"), Complex(1.5, 0));
    EXPECT_EQ(parse_complex("-0.5i"), Complex(0, -0.5));
    EXPECT_EQ(parse_complex("1+2i"), Complex(1, 2));
    EXPECT_EQ(parse_complex("3 - 4i"), Complex(3, -4));
    EXPECT_EQ(parse_complex("i"), Complex(0, 1));
    EXPECT_EQ(parse_complex("-i"), Complex(0, -1));
    EXPECT_EQ(parse_complex("1e-3+2e-1i"), Complex(1e-3, 0.2));
    EXPECT_THROW(parse_complex("abc"), InputError);
    EXPECT_THROW(parse_complex(""), InputError);
    for (Complex z : {Complex(0.1, -0.7), Complex(-3, 0), Complex(0, 2.5e-9)}) {
        EXPECT_EQ(parse_complex(format_complex(z)), z);
    }
}

TEST(Report, NumberFormatAndHash) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Report, EmptyReportHeaderOnly) {
    ReportDocument r;
    EXPECT_EQ(emit(r, ReportFormat::csv), "invariant,residual,tolerance,pass\n");
    const auto j = nlohmann::json::parse(emit(r, ReportFormat::json));
    EXPECT_TRUE(j["verdicts"].empty());
    EXPECT_THROW(parse_format("xml"), InputError);
}

TEST(Report, CheckAndRequire) {
    ReportDocument r;
    r.check("a", 1e-12, 1e-10);
    EXPECT_TRUE(r.pass());
    r.require("b", false);
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(r.verdicts.back().residual, 1.0);
}

TEST(Run, MeasurementHistoriesAreConsistent) {
    const ReportDocument r = run("histories check", load_scenario(scenario_path("measurement.yaml")), {});
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(exit_code(r), 0);
    const auto &p = r.tables[0];
    ASSERT_EQ(p.name, "probabilities");
    EXPECT_NEAR(std::get<double>(p.rows[0][1]), 0.5, 1e-12);
    EXPECT_NEAR(std::get<double>(p.rows[3][1]), 0.5, 1e-12);
}

TEST(Run, InterferenceFailsWithQuarterResidual) {
    const ReportDocument r = run("histories check", load_scenario(scenario_path("interference.yaml")), {});
    EXPECT_FALSE(r.pass());
    EXPECT_EQ(exit_code(r), 1);
    EXPECT_NEAR(r.verdicts[0].residual, 0.25, 1e-15);
}

TEST(Run, CsvDecoherenceParsesBackToOracle) {
    const ScenarioConfig c = load_scenario(scenario_path("interference.yaml"));
    std::istringstream in(emit(run("histories check", c, {}), ReportFormat::csv));
    std::string line;
    std::vector<std::vector<std::string>> table;
    while (std::getline(in, line)) {
        if (line == "# decoherence") {
            table = parse_csv_block(in);
        }
    }
    ASSERT_EQ(table.size(), 17u);
    EXPECT_EQ(table[0], (std::vector<std::string>{"history", "history_prime", "re", "im"}));
    // Hand oracle: C^{(x,z)}|0⟩ = P_z P_x |0⟩ with P_± = (1 ± X)/2.
    Matrix px[2], pz[2];
    px[0] = Matrix::Constant(2, 2, 0.5);
    px[1] = px[0];
    px[1](0, 1) = px[1](1, 0) = -0.5;
    pz[0] = rank_one_projector(basis_vector(2, 0));
    pz[1] = rank_one_projector(basis_vector(2, 1));
    std::vector<Vector> branch;
    for (int x = 0; x < 2; ++x) {
        for (int z = 0; z < 2; ++z) {
            branch.push_back(pz[z] * px[x] * basis_vector(2, 0));
        }
    }
    for (std::size_t row = 1; row < table.size(); ++row) {
        const std::size_t i = (row - 1) / 4, j = (row - 1) % 4;
        const Complex oracle = branch[j].dot(branch[i]);
        EXPECT_LE(std::abs(Complex(std::stod(table[row][2]), std::stod(table[row][3])) - oracle), 1e-15);
    }
    EXPECT_EQ(table[2][0], "plus,zero");
    EXPECT_EQ(table[2][1], "plus,one");
}

TEST(Run, JsonIsByteIdenticalAndParseable) {
    const ScenarioConfig c = load_scenario(scenario_path("einselection.yaml"));
    const std::string a = emit(run("branches decompose", c, {}), ReportFormat::json);
    const std::string b = emit(run("branches decompose", c, {}), ReportFormat::json);
    EXPECT_EQ(a, b);
    const auto j = nlohmann::json::parse(a);
    EXPECT_EQ(j["command"], "branches decompose");
    EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Run, ConfigHashTracksOptions) {
    const ScenarioConfig c;
    RunOptions a, b;
    b.m = {2, 3};
    EXPECT_EQ(run("born demo", c, a).config_hash, run("born demo", c, a).config_hash);
    EXPECT_NE(run("born demo", c, a).config_hash, run("born demo", c, b).config_hash);
}

TEST(Run, BornDemoOneTwo) {
    RunOptions o;
    o.m = {1, 2};
    const ReportDocument r = run("born demo", ScenarioConfig{}, o);
    EXPECT_TRUE(r.pass());
    const auto &t = r.tables[0];
    EXPECT_EQ(std::get<std::string>(t.rows[0][2]), "1/3");
    EXPECT_EQ(std::get<std::string>(t.rows[1][2]), "2/3");
}

TEST(Run, CatClosedBox) {
    RunOptions o;
    o.p_yes = 0.5;
    o.box_open = false;
    const ReportDocument r = run("cat run", ScenarioConfig{}, o);
    EXPECT_TRUE(r.pass());
    const auto &t = r.tables[0];
    ASSERT_EQ(t.rows.size(), 2u);
    for (const auto &row : t.rows) {
        EXPECT_EQ(std::get<std::string>(row[4]), "closed");
    }
}

TEST(Run, UnknownCommand) {
    EXPECT_THROW(run("frobnicate", ScenarioConfig{}, {}), InputError);
}

TEST(ExitCodes, ExceptionMapping) {
    EXPECT_EQ(exit_code(ParseError("x", 1, 1, "p")), 2);
    EXPECT_EQ(exit_code(InputError("x")), 2);
    EXPECT_EQ(exit_code(PreconditionError("x", 0.1)), 1);
    EXPECT_EQ(exit_code(CorrelationError("x", {})), 1);
    EXPECT_EQ(exit_code(ConvergenceError("x", 1.0)), 3);
    EXPECT_EQ(exit_code(InfraredError("x")), 3);
}

TEST(Tool, ExitCodesAndOutputDirectory) {
    EXPECT_EQ(run_tool("histories check --scenario " + scenario_path("measurement.yaml")), 0);
    EXPECT_EQ(run_tool("histories check --scenario " + scenario_path("interference.yaml")), 1);
    const fs::path dir = fs::temp_directory_path() / "histkit_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path bad = dir / "bad.yaml";
    std::ofstream(bad) << "spaces:\n  - {name: S, dim: 2}\nnonsense: true\n";
    EXPECT_EQ(run_tool("histories check --scenario " + bad.string()), 2);
    EXPECT_EQ(run_tool("no-such-command"), 2);
    EXPECT_EQ(run_tool("born demo --m 1,2 --format json --out born.json", "HISTKIT_OUTPUT_DIR=" + dir.string()), 0);
    const auto j = nlohmann::json::parse(read_file(dir / "born.json"));
    EXPECT_EQ(j["tables"][0]["rows"][1][2], "2/3");
    fs::remove_all(dir);
}

}  // namespace
}  // namespace histkit
