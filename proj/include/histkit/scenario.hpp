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

#ifndef HISTKIT_SCENARIO_HPP
#define HISTKIT_SCENARIO_HPP

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "histkit/branches.hpp"
#include "histkit/cat.hpp"
#include "histkit/envariance.hpp"
#include "histkit/fock.hpp"
#include "histkit/histories.hpp"
#include "histkit/propagators.hpp"

namespace histkit {

using ComplexRows = std::vector<std::vector<Complex>>;

struct FactorSpec {
    std::string name;
    int dim = 2;
    bool operator==(const FactorSpec &) const = default;
};

/// Named unitary constructions; `sequence` applies its children first to last.
struct ConstructorSpec {
    enum class Kind { identity, controlled_flip, phase, permutation, matrix, sequence };
    Kind kind = Kind::identity;
    std::string factor;
    std::string control;
    std::string target;
    int control_level = 1;
    std::vector<double> angles;
    std::vector<int> map;
    ComplexRows rows;
    double scale = 1.0;
    std::vector<ConstructorSpec> children;
    bool operator==(const ConstructorSpec &) const = default;
};

/// Either basis index sets on one factor or explicit projector matrices.
struct OutcomeSpec {
    std::string factor;
    std::vector<std::vector<int>> sets;
    std::vector<ComplexRows> projectors;
    std::vector<std::string> labels;
    bool operator==(const OutcomeSpec &) const = default;
};

struct SubsystemSpec {
    std::string name;
    ConstructorSpec interaction;
    OutcomeSpec outcomes;
    bool operator==(const SubsystemSpec &) const = default;
};

struct InitialSpec {
    enum class Kind { basis, product, amplitudes };
    Kind kind = Kind::basis;
    std::vector<int> basis;
    ComplexRows product;
    std::vector<Complex> amplitudes;
    bool normalize = false;
    bool operator==(const InitialSpec &) const = default;
};

struct RecordSpec {
    std::string apparatus;
    std::string environment;
    bool operator==(const RecordSpec &) const = default;
};

struct LatticeSection {
    std::vector<int> extent{64, 64};
    double spacing = 0.25;
    double mass = 1.0;
    double epsilon = 1e-4;
    LatticeSpec to_spec() const;
    bool operator==(const LatticeSection &) const = default;
};

struct FockSection {
    std::vector<std::vector<int>> sites{{0, 0}, {1, 0}};
    std::vector<std::string> types{"a", "b"};
    int n_max = 2;
    /// conversion | scattering
    std::string vertex = "conversion";
    std::vector<std::string> legs{"a", "b"};
    Complex coupling{0.3, 0.0};
    bool primed = true;
    double factorization_coupling = 1e-4;
    bool operator==(const FockSection &) const = default;
};

struct EnvarianceSection {
    std::vector<int> capacities{4, 4};
    std::vector<Complex> amplitudes{{std::sqrt(0.5), 0.0}, {0.0, std::sqrt(0.5)}};
    std::vector<double> sigmas{0.3, -1.1};
    std::vector<long long> ells{3, 0};
    std::vector<int> swap{0, 1};
    bool operator==(const EnvarianceSection &) const = default;
};

struct BornSection {
    std::vector<long long> m{1, 2};
    /// Environment capacity per outcome; empty provisions exactly m.
    std::vector<int> capacities;
    bool operator==(const BornSection &) const = default;
};

struct CatSection {
    Complex decay_amplitude{std::sqrt(0.5), 0.0};
    bool box_opened = false;
    std::array<int, 5> dims{2, 2, 2, 2, 3};
    bool operator==(const CatSection &) const = default;
};

struct ScenarioConfig {
    std::string name;
    std::optional<double> tolerance;
    std::vector<FactorSpec> spaces;
    std::optional<InitialSpec> initial;
    std::vector<SubsystemSpec> subsystems;
    /// Keyed by the subsystem that ends the link.
    std::map<std::string, CorrelationMap> maps;
    std::optional<RecordSpec> record;
    std::vector<std::vector<double>> mixing;
    std::optional<LatticeSection> lattice;
    std::optional<FockSection> fock;
    std::optional<EnvarianceSection> envariance;
    std::optional<BornSection> born;
    std::optional<CatSection> cat;
    bool operator==(const ScenarioConfig &) const = default;

    std::vector<int> dims() const;
    int factor_index(const std::string &name) const;
};

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i` (j accepted for i).
Complex parse_complex(const std::string &text);
std::string format_complex(Complex z);

/// Strict parse: unknown keys and unresolved names are ParseErrors with line, column and field path.
ScenarioConfig parse_scenario(const std::string &text);
ScenarioConfig load_scenario(const std::string &path);
/// Canonical text; parse_scenario(emit_scenario(c)) == c.
std::string emit_scenario(const ScenarioConfig &c);

Matrix build_constructor(const ScenarioConfig &c, const ConstructorSpec &spec, const std::string &path);
ProjectorFamily build_outcomes(const ScenarioConfig &c, const OutcomeSpec &spec, const std::string &path);
Vector build_initial(const ScenarioConfig &c);

struct HistorySetup {
    HistoryFamily family;
    EvolutionSchedule schedule;
    Vector initial;
};

/// Subsystems read as time slots: step k is the interaction, slot k the outcome family.
HistorySetup build_history_setup(const ScenarioConfig &c);

/// Outcome families get the zero non-existence member; the in-state is the initial ray.
SubsystemModel build_subsystem_model(const ScenarioConfig &c);

}  // namespace histkit

#endif
