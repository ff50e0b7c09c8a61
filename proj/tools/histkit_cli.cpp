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

// Command-line driver: histkit <group> <action> [options].

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "histkit/commands.hpp"
#include "histkit/errors.hpp"

namespace {

std::filesystem::path output_path(const std::string &out) {
    std::filesystem::path p(out);
    const char *dir = std::getenv("HISTKIT_OUTPUT_DIR");
    if (p.is_relative() && dir != nullptr && *dir != '\0') {
        p = std::filesystem::path(dir) / p;
    }
    return p;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"histkit: consistent-histories toolkit"};
    app.require_subcommand(1);

    std::string scenario;
    std::string format = "text";
    std::string out;
    histkit::RunOptions opts;
    double tol = 0;
    double p_yes = 0;
    bool closed = false;
    bool open = false;
    double spacing = 0, mass = 0, epsilon = 0;

    CLI::Option *tol_opt = app.add_option("--tol", tol, "Tolerance for invariant checks");
    app.add_option("--scenario", scenario, "Scenario file (YAML)")->check(CLI::ExistingFile);
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "csv", "json"}));
    app.add_option("--out", out, "Output file (relative paths resolve under $HISTKIT_OUTPUT_DIR)");

    struct Group {
        const char *name;
        const char *action;
        const char *help;
    };
    const Group groups[] = {
        {"histories", "check", "Decoherence functional and consistency of a history family"},
        {"propagator", "table", "Lattice Feynman, on-shell or kernel table"},
        {"kernel", "verify", "Path-kernel semigroup, unitarity, slicing and lambda-integral checks"},
        {"fock", "verify", "Truncated Fock-space interaction identities"},
        {"branches", "decompose", "Correlation checks and branch decomposition"},
        {"ambiguity", "demo", "Basis ambiguity with two subsystems and its resolution with three"},
        {"envariance", "check", "Phase and swap envariance"},
        {"born", "demo", "Fine-graining and branch counting"},
        {"cat", "run", "Five-subsystem cat scenario"},
    };
    std::vector<std::pair<CLI::App *, std::string>> leaves;
    for (const auto &g : groups) {
        CLI::App *group = app.add_subcommand(g.name, g.help);
        group->require_subcommand(1);
        group->fallthrough();
        CLI::App *leaf = group->add_subcommand(g.action, g.help);
        leaf->fallthrough();
        leaves.emplace_back(leaf, std::string(g.name) + " " + g.action);
        const std::string cmd = leaves.back().second;
        if (cmd == "propagator table" || cmd == "kernel verify" || cmd == "fock verify") {
            leaf->add_option("--extent", opts.extent, "Lattice extent per axis")->delimiter(',');
            leaf->add_option("--spacing", spacing, "Lattice spacing");
            leaf->add_option("--mass", mass, "Particle mass");
            leaf->add_option("--epsilon", epsilon, "Feynman epsilon");
        }
        if (cmd == "propagator table") {
            leaf->add_option("--kind", opts.kind, "feynman, plus, minus or kernel")
                ->check(CLI::IsMember({"feynman", "plus", "minus", "kernel"}));
            leaf->add_option("--lambda", opts.lambda, "Path parameter for --kind kernel");
        }
        if (cmd == "kernel verify") {
            leaf->add_option("--lambda", opts.lambda, "Path parameter");
            leaf->add_option("--slices", opts.slices, "Slice counts for the oracle")->delimiter(',');
        }
        if (cmd == "born demo") {
            leaf->add_option("--m", opts.m, "Fine-graining counts, e.g. 1,2")->delimiter(',');
            leaf->add_option("--amplitudes", opts.amplitudes, "Real amplitudes to approximate")->delimiter(',');
            leaf->add_option("--approx-tol", opts.approx_tol, "Rational approximation tolerance");
        }
        if (cmd == "cat run") {
            leaf->add_option("--p-yes", p_yes, "Decay probability |psi_yes|^2");
            leaf->add_flag("--closed", closed, "Box stays closed");
            leaf->add_flag("--open", open, "Box is opened");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string command;
    for (const auto &[leaf, name] : leaves) {
        if (leaf->parsed()) {
            command = name;
        }
    }
    if (tol_opt->count() > 0) {
        opts.tol = tol;
    }
    for (const auto &[leaf, name] : leaves) {
        if (!leaf->parsed()) {
            continue;
        }
        if (auto *o = leaf->get_option_no_throw("--spacing"); o != nullptr && o->count() > 0) {
            opts.spacing = spacing;
        }
        if (auto *o = leaf->get_option_no_throw("--mass"); o != nullptr && o->count() > 0) {
            opts.mass = mass;
        }
        if (auto *o = leaf->get_option_no_throw("--epsilon"); o != nullptr && o->count() > 0) {
            opts.epsilon = epsilon;
        }
        if (auto *o = leaf->get_option_no_throw("--p-yes"); o != nullptr && o->count() > 0) {
            opts.p_yes = p_yes;
        }
    }
    if (open && closed) {
        std::cerr << "error: --open and --closed are exclusive\n";
        return 2;
    }
    if (open || closed) {
        opts.box_open = open;
    }

    try {
        histkit::ScenarioConfig config;
        if (!scenario.empty()) {
            config = histkit::load_scenario(scenario);
        }
        const histkit::ReportDocument report = histkit::run(command, config, opts);
        const std::string text = histkit::emit(report, histkit::parse_format(format));
        if (out.empty()) {
            std::cout << text;
        } else {
            const auto path = output_path(out);
            std::ofstream f(path, std::ios::binary);
            if (!f) {
                std::cerr << "error: cannot write " << path.string() << "\n";
                return 2;
            }
            f << text;
        }
        return histkit::exit_code(report);
    } catch (const histkit::CorrelationError &e) {
        std::cerr << "error: " << e.what();
        for (const auto &o : e.offenders()) {
            std::cerr << " " << o;
        }
        std::cerr << "\n";
        return histkit::exit_code(e);
    } catch (const histkit::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return histkit::exit_code(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
