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

#ifndef HISTKIT_CAT_HPP
#define HISTKIT_CAT_HPP

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "histkit/branches.hpp"
#include "histkit/hilbert.hpp"

namespace histkit {

/// Factor order: R (radioactive source), D (detector), C (cat), B (box), E (environment).
enum CatFactor { kCatR = 0, kCatD = 1, kCatC = 2, kCatB = 3, kCatE = 4 };

/// Outcome labels per factor; label 0 is reserved for levels outside the alphabet.
namespace cat_label {
constexpr int no = 1, yes = 2;
constexpr int alive = 1, dead = 2;
constexpr int open = 1, closed = 2;
constexpr int env_closed = 1, env_alive = 2, env_dead = 3;
}  // namespace cat_label

std::string cat_outcome_name(int factor, int label);

struct CatConfig {
    Complex decay_amplitude{std::sqrt(0.5), 0.0};
    bool box_opened = false;
    std::array<int, 5> dims{2, 2, 2, 2, 3};

    void validate() const;
    /// ψ_no = √(1 − |ψ_yes|²), real and non-negative.
    Complex no_amplitude() const;
};

struct CatModel {
    CatConfig config;
    SubsystemModel model;
    Vector initial;
    /// ‖[G_B, G_C G_D G_R]‖.
    double commutator_residual = 0;

    std::vector<int> dims() const {
        return std::vector<int>(config.dims.begin(), config.dims.end());
    }
};

CatModel build_cat(const CatConfig &config);

/// Branches of the R, D, C chain alone.
BranchDecomposition interior_branches(const CatModel &m);

struct CatRecordReport {
    /// (b, c) → e
    std::map<std::pair<int, int>, int> map;
    double max_cross_term = 0;
};

/// E is correlated with the pair (B, C), not with B alone; checked jointly.
CatRecordReport cat_record_check(const CatModel &m, double tol = kAlgebraTol);

/// Checks links R→D, D→C, C→B and the joint (B, C)→E record, then expands all five subsystems.
BranchDecomposition full_branches(const CatModel &m, double tol = kAlgebraTol);

struct BoxReport {
    /// Closed model: every branch carries the same E label.
    bool closed_label_identical = false;
    /// Closed model: largest difference between the reduced E states of its branches.
    double closed_state_residual = 0;
    /// Largest interior-amplitude difference between the open and closed models.
    double interior_amplitude_residual = 0;
    /// Largest full-amplitude difference between the open and closed models.
    double full_amplitude_residual = 0;
    bool pass = false;
};

BoxReport box_irrelevance_check(const CatModel &opened, const CatModel &closed, double tol = kUnitaryTol);

/// Reduced density matrix of one factor of a product-ordered state.
Matrix reduced_state(const Vector &v, const std::vector<int> &dims, int which);

}  // namespace histkit

#endif
