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

// Seeded generators and independent oracles shared by the test binaries.

#ifndef HISTKIT_TESTS_SUPPORT_HPP
#define HISTKIT_TESTS_SUPPORT_HPP

#include <Eigen/QR>

#include <algorithm>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "histkit/hilbert.hpp"

namespace histkit::testing {

class Gen {
  public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {
    }

    double real(double lo = -1.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    int integer(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }
    Complex gaussian() {
        std::normal_distribution<double> n(0.0, 1.0);
        return {n(rng_), n(rng_)};
    }
    Matrix matrix(int rows, int cols) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                m(i, j) = gaussian();
            }
        }
        return m;
    }
    Vector vector(int dim) {
        Vector v(dim);
        for (int i = 0; i < dim; ++i) {
            v(i) = gaussian();
        }
        return v;
    }
    Vector unit_vector(int dim) {
        Vector v = vector(dim);
        return v / v.norm();
    }
    Matrix hermitian(int dim) {
        Matrix a = matrix(dim, dim);
        return (a + a.adjoint()) / 2.0;
    }
    Matrix unitary(int dim) {
        Eigen::HouseholderQR<Matrix> qr(matrix(dim, dim));
        return qr.householderQ() * Matrix::Identity(dim, dim);
    }
    /// Random partition of {0..dim−1} into `parts` non-empty index sets.
    std::vector<std::vector<int>> partition(int dim, int parts) {
        std::vector<int> idx(dim);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng_);
        std::vector<std::vector<int>> sets(parts);
        for (int i = 0; i < dim; ++i) {
            sets[i < parts ? i : integer(0, parts - 1)].push_back(idx[i]);
        }
        return sets;
    }
    /// Projector family in a random orthonormal basis.
    ProjectorFamily rotated_family(int dim, int parts) {
        const Matrix u = unitary(dim);
        ProjectorFamily f = ProjectorFamily::from_index_sets(dim, partition(dim, parts));
        for (auto &m : f.members) {
            m = u * m * u.adjoint();
        }
        return f;
    }
    std::mt19937_64 &engine() {
        return rng_;
    }

  private:
    std::mt19937_64 rng_;
};

/// Truncated Taylor series Σ_{k≤K} a^k / k!.
inline Matrix taylor_exp(const Matrix &a, int order) {
    Matrix term = Matrix::Identity(a.rows(), a.cols());
    Matrix sum = term;
    for (int k = 1; k <= order; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

/// Kronecker product by explicit index arithmetic.
inline Matrix kron_oracle(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            for (int k = 0; k < b.rows(); ++k) {
                for (int l = 0; l < b.cols(); ++l) {
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
                }
            }
        }
    }
    return out;
}

}  // namespace histkit::testing

#endif
