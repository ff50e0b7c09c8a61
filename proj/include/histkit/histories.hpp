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

#ifndef HISTKIT_HISTORIES_HPP
#define HISTKIT_HISTORIES_HPP

#include <map>
#include <vector>

#include "histkit/hilbert.hpp"

namespace histkit {

/// Times t0 < t1 < ... < tn and the step unitaries T(t_i, t_{i-1}).
struct EvolutionSchedule {
    std::vector<double> times;
    std::vector<Matrix> steps;

    int dim() const;
    /// Throws on non-increasing times, count mismatch, or a non-unitary step.
    void validate(double tol = kUnitaryTol) const;
    /// T(t_n, t_0).
    Matrix total() const;
    /// T(t_k, t_0), k = 0..n.
    Matrix upto(int k) const;
    static EvolutionSchedule uniform(const std::vector<Matrix> &steps);
};

struct HistoryFamily {
    std::vector<ProjectorFamily> slots;

    int dim() const;
    void validate(double tol = kAlgebraTol) const;
    /// All label vectors in lexicographic order (last slot fastest).
    std::vector<std::vector<int>> labels() const;
};

using HistoryLabel = std::vector<int>;

struct DecoherenceMatrix {
    std::vector<HistoryLabel> labels;
    Matrix entries;
};

/// C^α = P_n T_n ... P_1 T_1.
Matrix chain_operator(const HistoryFamily &f, const EvolutionSchedule &s, const HistoryLabel &l);

/// K^α built from Heisenberg-picture projectors, P_k(t_k) = T(t_k,t0)† P_k T(t_k,t0).
Matrix heisenberg_chain_operator(const HistoryFamily &f, const EvolutionSchedule &s, const HistoryLabel &l);

DecoherenceMatrix decoherence_functional(const HistoryFamily &f, const EvolutionSchedule &s, const Vector &initial);

struct ConsistencyResult {
    bool consistent = false;
    double max_off_diagonal = 0;
    std::map<HistoryLabel, double> probabilities;
};

ConsistencyResult consistency_check(const DecoherenceMatrix &d, double tol = kAlgebraTol);

/// ‖Σ_α C^α − T(t_n, t_0)‖.
double chain_sum_check(const HistoryFamily &f, const EvolutionSchedule &s);

}  // namespace histkit

#endif
