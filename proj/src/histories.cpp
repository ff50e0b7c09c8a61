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

#include "histkit/histories.hpp"

#include "histkit/errors.hpp"

namespace histkit {

int EvolutionSchedule::dim() const {
    return steps.empty() ? 0 : static_cast<int>(steps.front().rows());
}

void EvolutionSchedule::validate(double tol) const {
    if (times.size() != steps.size() + 1) {
        throw ShapeError("schedule needs one more time than steps");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) {
            throw DomainError("schedule times must be strictly increasing");
        }
    }
    for (const auto &t : steps) {
        if (t.rows() != dim() || t.cols() != dim()) {
            throw ShapeError("schedule steps must share one square dimension");
        }
        double r = unitarity_residual(t);
        if (r > tol) {
            throw PreconditionError("schedule step is not unitary", r);
        }
    }
}

Matrix EvolutionSchedule::total() const {
    return upto(static_cast<int>(steps.size()));
}

Matrix EvolutionSchedule::upto(int k) const {
    Matrix out = Matrix::Identity(dim(), dim());
    for (int i = 0; i < k; ++i) {
        out = steps[i] * out;
    }
    return out;
}

EvolutionSchedule EvolutionSchedule::uniform(const std::vector<Matrix> &steps) {
    EvolutionSchedule s;
    s.steps = steps;
    for (std::size_t k = 0; k <= steps.size(); ++k) {
        s.times.push_back(static_cast<double>(k));
    }
    return s;
}

int HistoryFamily::dim() const {
    return slots.empty() ? 0 : slots.front().dim;
}

void HistoryFamily::validate(double tol) const {
    for (const auto &slot : slots) {
        if (slot.dim != dim()) {
            throw ShapeError("history slots must share one dimension");
        }
        auto r = validate_projector_family(slot, tol);
        if (!r.pass) {
            throw PreconditionError(
                "history slot is not a projector family",
                std::max({r.completeness, r.idempotence, r.self_adjointness, r.orthogonality}));
        }
    }
}

std::vector<std::vector<int>> HistoryFamily::labels() const {
    std::vector<std::vector<int>> out{{}};
    for (const auto &slot : slots) {
        std::vector<std::vector<int>> next;
        for (const auto &prefix : out) {
            for (int a = 0; a < slot.size(); ++a) {
                auto l = prefix;
                l.push_back(a);
                next.push_back(std::move(l));
            }
        }
        out = std::move(next);
    }
    return out;
}

namespace {

void check_label(const HistoryFamily &f, const EvolutionSchedule &s, const HistoryLabel &l) {
    if (f.slots.size() != s.steps.size()) {
        throw ShapeError("family slot count does not match schedule step count");
    }
    if (l.size() != f.slots.size()) {
        throw LabelError("history label length does not match slot count");
    }
    for (std::size_t k = 0; k < l.size(); ++k) {
        if (l[k] < 0 || l[k] >= f.slots[k].size()) {
            throw LabelError("history label entry " + std::to_string(k) + " out of range");
        }
    }
    if (f.dim() != s.dim()) {
        throw ShapeError("family and schedule dimensions differ");
    }
}

}  // namespace

Matrix chain_operator(const HistoryFamily &f, const EvolutionSchedule &s, const HistoryLabel &l) {
    check_label(f, s, l);
    Matrix c = Matrix::Identity(s.dim(), s.dim());
    for (std::size_t k = 0; k < l.size(); ++k) {
        c = f.slots[k].members[l[k]] * (s.steps[k] * c);
    }
    return c;
}

Matrix heisenberg_chain_operator(const HistoryFamily &f, const EvolutionSchedule &s, const HistoryLabel &l) {
    check_label(f, s, l);
    Matrix k_op = Matrix::Identity(s.dim(), s.dim());
    for (std::size_t k = 0; k < l.size(); ++k) {
        Matrix t = s.upto(static_cast<int>(k) + 1);
        k_op = t.adjoint() * f.slots[k].members[l[k]] * t * k_op;
    }
    return k_op;
}

DecoherenceMatrix decoherence_functional(const HistoryFamily &f, const EvolutionSchedule &s, const Vector &initial) {
    if (initial.size() != s.dim()) {
        throw ShapeError("initial state dimension does not match schedule");
    }
    double n = initial.norm();
    if (std::abs(n - 1.0) > kUnitaryTol) {
        throw NormalizationError("initial state is not unit-norm (norm " + std::to_string(n) + ")");
    }
    DecoherenceMatrix d;
    d.labels = f.labels();
    std::vector<Vector> branches;
    for (const auto &l : d.labels) {
        branches.push_back(chain_operator(f, s, l) * initial);
    }
    const auto count = static_cast<Eigen::Index>(branches.size());
    d.entries = Matrix::Zero(count, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index j = 0; j < count; ++j) {
            d.entries(i, j) = branches[j].dot(branches[i]);
        }
    }
    return d;
}

ConsistencyResult consistency_check(const DecoherenceMatrix &d, double tol) {
    ConsistencyResult r;
    for (Eigen::Index i = 0; i < d.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.entries.cols(); ++j) {
            if (i != j) {
                r.max_off_diagonal = std::max(r.max_off_diagonal, std::abs(d.entries(i, j)));
            }
        }
        r.probabilities[d.labels[i]] = d.entries(i, i).real();
    }
    r.consistent = r.max_off_diagonal <= tol;
    return r;
}

double chain_sum_check(const HistoryFamily &f, const EvolutionSchedule &s) {
    Matrix sum = Matrix::Zero(s.dim(), s.dim());
    for (const auto &l : f.labels()) {
        sum += chain_operator(f, s, l);
    }
    return max_abs(sum - s.total());
}

}  // namespace histkit
