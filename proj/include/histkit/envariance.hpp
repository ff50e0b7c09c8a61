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

#ifndef HISTKIT_ENVARIANCE_HPP
#define HISTKIT_ENVARIANCE_HPP

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "histkit/branches.hpp"
#include "histkit/hilbert.hpp"

namespace histkit {

/// System ⊗ environment. System outcome α is basis state |α⟩; environment outcome α is the
/// span of the declared basis indices env_sectors[α].
struct EnvarianceSpace {
    int system_dim = 2;
    int env_dim = 2;
    std::vector<std::vector<int>> env_sectors;

    int dim() const {
        return system_dim * env_dim;
    }
    int outcomes() const {
        return system_dim;
    }
    void validate() const;
    Matrix system_projector(int alpha) const;
    Matrix env_projector(int alpha) const;
    /// Environment-local sector projector Π_α.
    Matrix env_sector_projector(int alpha) const;
    /// Each sector gets `capacity[α]` consecutive environment indices.
    static EnvarianceSpace provisioned(const std::vector<int> &capacity);
};

/// Σ_α ψ^α |α⟩ ⊗ |e^α⟩ with each record e^α a unit vector inside sector α.
struct CorrelatedState {
    EnvarianceSpace space;
    std::vector<Complex> psi;
    std::vector<Vector> records;

    Vector joint() const;
    /// Joint grid state |s^a, e^b⟩ = |a⟩ ⊗ |e^b⟩.
    Vector grid_state(int a, int b) const;
    /// Checks record placement and the joint-eigenstate conditions for every branch.
    void validate(double tol = kAlgebraTol) const;
    /// Records default to the first index of each sector.
    static CorrelatedState with_amplitudes(const EnvarianceSpace &space, const std::vector<Complex> &psi);
    /// Reads amplitudes and records off branch states |α⟩ ⊗ |e^α⟩ (branch label = last entry − 1).
    static CorrelatedState from_decomposition(const EnvarianceSpace &space, const BranchDecomposition &d);
};

struct PhaseSpec {
    std::vector<double> sigmas;
    std::vector<long long> ells;

    /// ε_α = 2πℓ_α − σ_α.
    double counterphase(int alpha) const;
};

/// ‖U_E U_S |Ψ⟩ − |Ψ⟩‖.
double phase_envariance_check(const CorrelatedState &s, const PhaseSpec &p);

enum class SwapTarget { system, environment };

/// Grid permutation exchanging outcomes β and γ of the target factor; identity off the grid span.
Matrix swap_operator(const CorrelatedState &s, int beta, int gamma, SwapTarget target);

/// ‖U_S U_E |Ψ⟩ − |Ψ⟩‖; requires |ψ^β| = |ψ^γ| to 1e−12.
double envariance_swap_check(const CorrelatedState &s, int beta, int gamma);

/// G† U G |Ψ_I⟩.
Vector effective_initial_state(const Vector &initial, const Matrix &g, const Matrix &u);

struct RationalAmplitudeSpec {
    std::vector<long long> m;
    long long M = 0;
};

struct FineGrainedModel {
    CorrelatedState state;
    RationalAmplitudeSpec spec;
    /// fine[α][β]: environment-local unit vectors f_{αβ}; e^α = Σ_β f_{αβ} / √m_α.
    std::vector<std::vector<Vector>> fine;

    /// Environment-local P^{αβ}; the last β of each α absorbs the rest of the sector.
    Matrix env_fine_projector(int alpha, int beta) const;
    /// 1_S ⊗ P^{αβ}.
    Matrix joint_fine_projector(int alpha, int beta) const;
    /// e^{i arg ψ^α} |α⟩ ⊗ |f_{αβ}⟩.
    Vector fine_state(int alpha, int beta) const;
    int fine_count() const;
};

FineGrainedModel fine_grain(const CorrelatedState &s, const RationalAmplitudeSpec &r, double tol = kUnitaryTol);

struct FineBranch {
    int alpha = 0;
    int beta = 0;
    int ancilla_index = 0;
    Complex coefficient;
    Vector state;
};

struct AncillaState {
    int ancilla_dim = 0;
    Vector joint;
    std::vector<FineBranch> branches;
};

/// Σ_{αβ} (1/√M) |s^α, e^{αβ}, c^{αβ}⟩, obtained by applying G_C to |Ψ⟩ ⊗ |c_0⟩.
AncillaState attach_ancilla(const FineGrainedModel &f, int ancilla_dim);

/// Dense G_C on S ⊗ E ⊗ C; limited by the default capacity.
Matrix ancilla_interaction(const FineGrainedModel &f, int ancilla_dim);

struct Rational {
    long long num = 0;
    long long den = 1;
    double value() const {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

/// Counts fine branches per α: p_α = m_α / M exactly.
std::vector<Rational> born_probabilities(const FineGrainedModel &f);

/// Smallest M with |m_α/M − a_α²| ≤ tol; largest-remainder apportionment per M.
RationalAmplitudeSpec rational_approximation(const std::vector<double> &amplitudes, double tol);

}  // namespace histkit

#endif
