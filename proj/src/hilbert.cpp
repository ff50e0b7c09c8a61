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

#include "histkit/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "histkit/errors.hpp"

namespace histkit {

namespace {

void check_capacity(std::size_t d, std::size_t max_dim) {
    if (d > max_dim) {
        throw CapacityError(
            "tensor product dimension " + std::to_string(d) + " exceeds maximum " + std::to_string(max_dim));
    }
}

}  // namespace

Matrix tensor_product(const Matrix &a, const Matrix &b, std::size_t max_dim) {
    check_capacity(static_cast<std::size_t>(a.rows()) * b.rows(), max_dim);
    check_capacity(static_cast<std::size_t>(a.cols()) * b.cols(), max_dim);
    return Eigen::kroneckerProduct(a, b).eval();
}

Vector tensor_product(const Vector &a, const Vector &b, std::size_t max_dim) {
    check_capacity(static_cast<std::size_t>(a.size()) * b.size(), max_dim);
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

Matrix tensor_product(const std::vector<Matrix> &factors, std::size_t max_dim) {
    if (factors.empty()) {
        throw ShapeError("tensor product of no factors");
    }
    Matrix out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        out = tensor_product(out, factors[k], max_dim);
    }
    return out;
}

Vector tensor_product(const std::vector<Vector> &factors, std::size_t max_dim) {
    if (factors.empty()) {
        throw ShapeError("tensor product of no factors");
    }
    Vector out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        out = tensor_product(out, factors[k], max_dim);
    }
    return out;
}

Matrix embed(const Matrix &op, const std::vector<int> &dims, int which, std::size_t max_dim) {
    if (which < 0 || which >= static_cast<int>(dims.size())) {
        throw ShapeError("embed: factor index out of range");
    }
    if (op.rows() != dims[which] || op.cols() != dims[which]) {
        throw ShapeError("embed: operator does not match factor dimension");
    }
    std::vector<Matrix> factors;
    for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
        factors.push_back(k == which ? op : Matrix::Identity(dims[k], dims[k]));
    }
    return tensor_product(factors, max_dim);
}

Matrix operator_exponential(const Matrix &a) {
    if (a.rows() != a.cols()) {
        throw ShapeError("operator_exponential: non-square operator");
    }
    if (a.rows() == 0) {
        return a;
    }
    return a.exp();
}

double unitarity_residual(const Matrix &u) {
    if (u.rows() != u.cols()) {
        throw ShapeError("unitarity_residual: non-square operator");
    }
    Matrix id = Matrix::Identity(u.rows(), u.cols());
    return std::max(max_abs(u.adjoint() * u - id), max_abs(u * u.adjoint() - id));
}

double hermiticity_residual(const Matrix &a) {
    if (a.rows() != a.cols()) {
        throw ShapeError("hermiticity_residual: non-square operator");
    }
    return max_abs(a - a.adjoint());
}

Vector basis_vector(int dim, int index) {
    if (index < 0 || index >= dim) {
        throw LabelError("basis index " + std::to_string(index) + " out of range for dim " + std::to_string(dim));
    }
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return v;
}

Matrix rank_one_projector(const Vector &v) {
    double n2 = v.squaredNorm();
    if (n2 == 0.0) {
        throw DomainError("projector onto the zero vector");
    }
    return v * v.adjoint() / n2;
}

Matrix basis_projector(int dim, const std::vector<int> &indices) {
    Matrix p = Matrix::Zero(dim, dim);
    for (int i : indices) {
        if (i < 0 || i >= dim) {
            throw LabelError("basis index " + std::to_string(i) + " out of range for dim " + std::to_string(dim));
        }
        p(i, i) = 1.0;
    }
    return p;
}

ProjectorFamily ProjectorFamily::from_index_sets(
    int dim, const std::vector<std::vector<int>> &sets, std::vector<std::string> labels) {
    ProjectorFamily f;
    f.dim = dim;
    for (const auto &s : sets) {
        f.members.push_back(basis_projector(dim, s));
    }
    if (labels.empty()) {
        for (std::size_t k = 0; k < sets.size(); ++k) {
            labels.push_back(std::to_string(k));
        }
    }
    if (labels.size() != sets.size()) {
        throw ShapeError("label count does not match member count");
    }
    f.labels = std::move(labels);
    return f;
}

ProjectorFamily ProjectorFamily::trivial(int dim) {
    ProjectorFamily f;
    f.dim = dim;
    f.members.push_back(Matrix::Identity(dim, dim));
    f.labels.push_back("1");
    return f;
}

ProjectorFamily ProjectorFamily::computational(int dim) {
    std::vector<std::vector<int>> sets;
    for (int i = 0; i < dim; ++i) {
        sets.push_back({i});
    }
    return from_index_sets(dim, sets);
}

ProjectorReport validate_projector_family(const ProjectorFamily &f, double tol) {
    for (const auto &p : f.members) {
        if (p.rows() != f.dim || p.cols() != f.dim) {
            throw ShapeError("projector family member does not match family dimension");
        }
    }
    ProjectorReport r;
    r.tol = tol;
    Matrix sum = Matrix::Zero(f.dim, f.dim);
    for (std::size_t i = 0; i < f.members.size(); ++i) {
        const Matrix &p = f.members[i];
        sum += p;
        r.idempotence = std::max(r.idempotence, max_abs(p * p - p));
        r.self_adjointness = std::max(r.self_adjointness, max_abs(p - p.adjoint()));
        for (std::size_t j = i + 1; j < f.members.size(); ++j) {
            r.orthogonality = std::max(r.orthogonality, max_abs(p * f.members[j]));
        }
    }
    r.completeness = max_abs(sum - Matrix::Identity(f.dim, f.dim));
    r.pass = r.completeness <= tol && r.idempotence <= tol && r.self_adjointness <= tol && r.orthogonality <= tol;
    return r;
}

}  // namespace histkit
