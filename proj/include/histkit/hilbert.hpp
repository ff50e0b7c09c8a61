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

#ifndef HISTKIT_HILBERT_HPP
#define HISTKIT_HILBERT_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace histkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kAlgebraTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-12;
inline constexpr std::size_t kDefaultMaxDim = 4096;

/// Max absolute entry. Every residual in the library uses this norm.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived> &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Kronecker product; the left factor is the most significant index.
Matrix tensor_product(const Matrix &a, const Matrix &b, std::size_t max_dim = kDefaultMaxDim);
Vector tensor_product(const Vector &a, const Vector &b, std::size_t max_dim = kDefaultMaxDim);
Matrix tensor_product(const std::vector<Matrix> &factors, std::size_t max_dim = kDefaultMaxDim);
Vector tensor_product(const std::vector<Vector> &factors, std::size_t max_dim = kDefaultMaxDim);

/// 1 ⊗ ... ⊗ op ⊗ ... ⊗ 1 with op on factor `which` of a space with factor dims `dims`.
Matrix embed(const Matrix &op, const std::vector<int> &dims, int which, std::size_t max_dim = kDefaultMaxDim);

Matrix operator_exponential(const Matrix &a);

/// ‖U†U − 1‖ and ‖UU† − 1‖, whichever is larger.
double unitarity_residual(const Matrix &u);
double hermiticity_residual(const Matrix &a);

Vector basis_vector(int dim, int index);
/// |v⟩⟨v| / ⟨v|v⟩.
Matrix rank_one_projector(const Vector &v);
/// Σ_{i∈indices} |i⟩⟨i|.
Matrix basis_projector(int dim, const std::vector<int> &indices);

struct ProjectorFamily {
    int dim = 0;
    std::vector<Matrix> members;
    std::vector<std::string> labels;

    int size() const {
        return static_cast<int>(members.size());
    }
    /// Family of basis-index projectors, one member per index set.
    static ProjectorFamily from_index_sets(
        int dim, const std::vector<std::vector<int>> &sets, std::vector<std::string> labels = {});
    /// The one-member family {1}.
    static ProjectorFamily trivial(int dim);
    /// Computational basis, labels "0", "1", ...
    static ProjectorFamily computational(int dim);
};

struct ProjectorReport {
    double completeness = 0;
    double idempotence = 0;
    double self_adjointness = 0;
    double orthogonality = 0;
    double tol = kAlgebraTol;
    bool pass = false;
};

ProjectorReport validate_projector_family(const ProjectorFamily &f, double tol = kAlgebraTol);

}  // namespace histkit

#endif
