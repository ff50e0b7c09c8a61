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

#ifndef HISTKIT_BRANCHES_HPP
#define HISTKIT_BRANCHES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "histkit/hilbert.hpp"

namespace histkit {

/// Projector family whose member 0 is the non-existence outcome.
struct OutcomeFamily {
    ProjectorFamily projectors;

    int size() const {
        return projectors.size();
    }
    int dim() const {
        return projectors.dim;
    }
    const Matrix &operator[](int label) const;

    /// Prepends a zero operator as label 0 (existence guaranteed by construction).
    static OutcomeFamily guaranteed(const ProjectorFamily &outcomes);
    /// {1 − P, P}: label 1 is the in-state configuration P.
    static OutcomeFamily in_state(const Matrix &p);
    /// Explicit family; member 0 must already be the non-existence projector.
    static OutcomeFamily explicit_family(const ProjectorFamily &with_label0);
};

struct Subsystem {
    std::string name;
    Matrix interaction;
    OutcomeFamily outcomes;
};

using CorrelationMap = std::map<int, int>;

struct SubsystemModel {
    std::vector<Subsystem> subsystems;
    OutcomeFamily initial;
    /// Entry k (k ≥ 1) constrains link k; empty entries are inferred.
    std::vector<std::optional<CorrelationMap>> maps;
    /// Tensor layout, needed only for the environment-record perturbation.
    std::vector<int> factor_dims;
    int system_factor = 0;

    int dim() const;
    int links() const {
        return static_cast<int>(subsystems.size()) - 1;
    }
    void validate(double tol = kAlgebraTol) const;
    /// G_N ⋯ G_1.
    Matrix total() const;
    /// All (α_0, α_1, ..., α_N), lexicographic.
    std::vector<std::vector<int>> label_vectors() const;
    std::optional<CorrelationMap> map_for(int link) const;
};

/// P^{α_N}_N G_N ⋯ P^{α_1}_1 G_1 P^{α_0}_in; labels = (α_0, ..., α_N).
Matrix subsystem_chain_operator(const SubsystemModel &m, const std::vector<int> &labels);
/// The same chain applied to a state without forming the operator.
Vector subsystem_chain_apply(const SubsystemModel &m, const std::vector<int> &labels, const Vector &v);

struct CorrelationReport {
    int link = 0;
    CorrelationMap map;
    bool inferred = false;
    /// Largest cross term that must vanish.
    double max_cross_term = 0;
    /// Smallest term kept by the map (0 when no kept term survives).
    double min_kept_term = 0;
    /// Every α_{k−1} maps to the same α_k: the link records nothing.
    bool degenerate = false;
};

/// Throws CorrelationError listing offending (α_{k−1}, α_k) pairs.
CorrelationReport correlation_check(const SubsystemModel &m, int link, double tol = kAlgebraTol);

struct RecordReport {
    CorrelationReport apparatus;
    CorrelationReport environment;
    double max_perturbed_cross_term = 0;
    bool map_stable = true;
    int perturbations = 0;
};

RecordReport environment_record_check(
    const SubsystemModel &m,
    int apparatus_link,
    int environment_link,
    double tol = kAlgebraTol,
    int perturbations = 8,
    std::uint64_t seed = 12345);

struct Branch {
    std::vector<int> labels;
    double amplitude = 0;
    Vector state;
};

struct BranchDecomposition {
    std::vector<Branch> branches;
    double reconstruction_residual = 0;
    double orthogonality_residual = 0;
};

/// Zero-amplitude branches are dropped unless keep_zero, in which case they get the
/// lowest-index basis eigenvector of their final projector.
BranchDecomposition branch_decompose(
    const SubsystemModel &m, const Vector &initial, bool keep_zero = false, double tol = kAlgebraTol);

struct AmbiguityReport {
    /// ‖Σ_α P^α_A G_A P^α_S − Σ_β P′^β_A G_A P′^β_S‖.
    double operator_identity_residual = 0;
    bool violation_detected = false;
    std::vector<std::string> offenders;
    ProjectorFamily alternate_system;
    ProjectorFamily alternate_apparatus;
};

/// `two` has subsystems (S, A); `three` has (S, A, E) with identical S and A. `mixing` is K×K over labels 1..K.
AmbiguityReport basis_ambiguity_demo(
    const SubsystemModel &two, const SubsystemModel &three, const Eigen::MatrixXd &mixing, double tol = kAlgebraTol);

/// Haar-distributed unitary from a seeded generator.
Matrix random_unitary(int dim, std::uint64_t seed);

}  // namespace histkit

#endif
