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

#ifndef HISTKIT_FOCK_HPP
#define HISTKIT_FOCK_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "histkit/hilbert.hpp"
#include "histkit/propagators.hpp"

namespace histkit {

/// Original particle types; every type n gets a reverse n̄. Species index s < T is the
/// original type s, s ≥ T is the reverse of type s − T.
struct ParticleTypeSet {
    std::vector<std::string> types;

    int count() const {
        return static_cast<int>(types.size());
    }
    int species_count() const {
        return 2 * count();
    }
    int reverse_of(int species) const;
    bool is_reverse(int species) const {
        return species >= count();
    }
    /// Throws TypeError for unknown names. Reverse names carry a trailing '~'.
    int species(const std::string &name) const;
    std::string name(int species) const;
};

/// An operator carried together with its special adjoint.
struct PairedOperator {
    Matrix op;
    Matrix adj;

    PairedOperator dagger() const {
        return {adj, op};
    }
    static PairedOperator zero(int dim);
    static PairedOperator identity(int dim);
};

PairedOperator operator*(const PairedOperator &a, const PairedOperator &b);
PairedOperator operator+(const PairedOperator &a, const PairedOperator &b);
PairedOperator operator-(const PairedOperator &a, const PairedOperator &b);
/// Antilinear in the adjoint slot: c·(A, A‡) = (cA, c̄A‡).
PairedOperator operator*(Complex c, const PairedOperator &a);

using Occupation = std::vector<int>;

struct FockModel {
    /// Lattice coordinates of the model sites.
    std::vector<std::vector<int>> sites;
    ParticleTypeSet typeset;
    int n_max = 0;
    /// Occupation vectors over modes (site-major, then species), lexicographic; vacuum first.
    std::vector<Occupation> basis;
    /// D_{ij} = Δ_F(site_i − site_j).
    Matrix smearing;
    PropagatorTable propagator;

    int dim() const {
        return static_cast<int>(basis.size());
    }
    int site_count() const {
        return static_cast<int>(sites.size());
    }
    int mode_count() const {
        return site_count() * typeset.species_count();
    }
    int mode(int site, int species) const {
        return site * typeset.species_count() + species;
    }
    int index_of(const Occupation &occ) const;
    int total(int basis_index) const;

    /// a_mode and a†_mode on the truncated space.
    Matrix lowering(int mode) const;
    Matrix raising(int mode) const;

    static FockModel build(
        const std::vector<std::vector<int>> &sites,
        const ParticleTypeSet &types,
        int n_max,
        const PropagatorTable &feynman);
};

/// C(M + n_max, n_max) with M modes.
long long truncated_dimension(int modes, int n_max);

/// Occupation basis state. Physical states may not populate reverse species.
Vector occupation_state(const FockModel &m, const std::map<std::pair<int, int>, int> &counts);
Vector physical_state(const FockModel &m, const std::map<std::pair<int, int>, int> &counts);

enum class FieldKind { psi0, psi0_dagger, psi, psi_dagger };

/// Field at (site, species) with its special-adjoint partner:
/// ψ₀‡ = ψ†, ψ₀†‡ = ψ, ψ‡ = ψ₀†, ψ†‡ = ψ₀.
PairedOperator field(const FockModel &m, FieldKind kind, int site, int species);

/// Φ(n) = ψ(n) + ψ₀†(n̄) and Φ‡(n) = ψ₀†(n) + ψ(n̄).
PairedOperator primed_field(const FockModel &m, int site, int type, bool dagger);

enum class LegKind { creation, annihilation };

struct VertexLeg {
    std::string type;
    LegKind kind = LegKind::annihilation;
};

struct VertexTerm {
    Complex coupling{1.0, 0.0};
    std::vector<VertexLeg> legs;
};

/// Σ_terms g · :Π legs: at a site. Creation legs are Φ‡ (primed) or ψ₀† (unprimed);
/// annihilation legs are Φ (primed) or ψ (unprimed).
struct VertexSpec {
    std::vector<VertexTerm> terms;
    bool primed = true;

    /// Largest number of creation operators any expanded product applies.
    int max_creations() const;
    /// g(:Φ_b‡Φ_a: + :Φ_a‡Φ_b:)
    static VertexSpec conversion(const std::string &a, const std::string &b, Complex g, bool primed = true);
    /// g(:ψ₀†_a ψ₀†_b ψ_a ψ_b:)-style two-in/two-out scattering vertex.
    static VertexSpec scattering(const std::string &a, const std::string &b, Complex g, bool primed = true);
};

struct HypervolumeMask {
    std::vector<int> sites;
};

PairedOperator vertex_operator(const FockModel &m, const VertexSpec &spec, int site);
PairedOperator restricted_vertex(const FockModel &m, const VertexSpec &spec, const HypervolumeMask &mask);

/// ‖V‡ − V‖.
double special_adjoint_residual(const PairedOperator &v);

/// G = exp(−iV) with G‡ = exp(+iV‡). Throws PreconditionError if ‖V‡ − V‖ > tol.
PairedOperator interaction_operator(const PairedOperator &v, double tol = kAlgebraTol);

/// max(‖G‡G − 1‖, ‖GG‡ − 1‖).
double pseudo_unitarity_residual(const PairedOperator &g);

/// Basis indices with occupancy N such that N + max_creations ≤ n_max.
std::vector<int> protected_sector(const FockModel &m, const VertexSpec &spec);

/// ‖X restricted to the given columns‖ over all rows.
double sector_norm(const Matrix &x, const std::vector<int> &columns);

struct CommutatorReport {
    double protected_residual = 0;
    double full_residual = 0;
    int protected_states = 0;
    /// Set when the full-space residual exceeds the protected one by more than tol.
    bool truncation_artifact = false;
};

CommutatorReport vertex_commutator_check(
    const FockModel &m, const VertexSpec &spec, int site1, int site2, double tol = kAlgebraTol);

struct FactorizationReport {
    /// ‖G_{∪masks} − Π_i G_{mask_i}‖ on the protected sector.
    double residual = 0;
    /// Largest difference between factor orders on the protected sector.
    double permutation_difference = 0;
    int protected_states = 0;
};

FactorizationReport factorization_check(
    const FockModel &m, const VertexSpec &spec, const std::vector<HypervolumeMask> &masks);

/// ‖Σ_χ |χ⟩⟨χ| − 1‖ over the basis minus `excluded` indices, and the rank of the sum.
struct ResolutionReport {
    double residual = 0;
    int rank = 0;
    int dim = 0;
};

ResolutionReport identity_resolution_check(const FockModel &m, const std::vector<int> &excluded = {});

}  // namespace histkit

#endif
