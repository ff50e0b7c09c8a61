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

#include <gtest/gtest.h>

#include <cmath>

#include "histkit/errors.hpp"
#include "histkit/histories.hpp"
#include "support.hpp"

namespace histkit {
namespace {

using testing::Gen;

Matrix hadamard() {
    Matrix h(2, 2);
    h << 1.0, 1.0, 1.0, -1.0;
    return h / std::sqrt(2.0);
}

/// Controlled flip on S⊗A: |s⟩|r⟩ → |s⟩|r ⊕ s⟩.
Matrix cnot() {
    Matrix u = Matrix::Zero(4, 4);
    u(0, 0) = u(1, 1) = u(3, 2) = u(2, 3) = 1.0;
    return u;
}

EvolutionSchedule random_schedule(Gen &g, int dim, int steps) {
    std::vector<Matrix> ts;
    for (int i = 0; i < steps; ++i) {
        ts.push_back(g.unitary(dim));
    }
    return EvolutionSchedule::uniform(ts);
}

HistoryFamily random_family(Gen &g, int dim, int slots) {
    HistoryFamily f;
    for (int i = 0; i < slots; ++i) {
        f.slots.push_back(g.rotated_family(dim, g.integer(1, dim)));
    }
    return f;
}

HistoryFamily trivial_family(int dim, int slots) {
    HistoryFamily f;
    f.slots.assign(slots, ProjectorFamily::trivial(dim));
    return f;
}

/// Amplitude of C^α|Φ⟩ by explicit summation over basis paths i0 → i1 → ... → in.
Vector path_sum(const HistoryFamily &f, const EvolutionSchedule &s, const HistoryLabel &l, const Vector &phi) {
    const int d = f.dim();
    Vector cur = phi;
    for (std::size_t k = 0; k < f.slots.size(); ++k) {
        Vector next = Vector::Zero(d);
        for (int out = 0; out < d; ++out) {
            for (int mid = 0; mid < d; ++mid) {
                for (int in = 0; in < d; ++in) {
                    next(out) += f.slots[k].members[l[k]](out, mid) * s.steps[k](mid, in) * cur(in);
                }
            }
        }
        cur = next;
    }
    return cur;
}

TEST(ChainOperator, TrivialFamilyGivesTotalEvolution) {
    Gen g(10);
    const auto s = random_schedule(g, 3, 3);
    const auto f = trivial_family(3, 3);
    EXPECT_LE(max_abs(chain_operator(f, s, {0, 0, 0}) - s.total()), 1e-12);
}

TEST(ChainOperator, QubitProjections) {
    const auto s = EvolutionSchedule::uniform({Matrix::Identity(2, 2)});
    HistoryFamily f;
    f.slots = {ProjectorFamily::computational(2)};
    const Vector zero = basis_vector(2, 0);
    EXPECT_EQ(max_abs(chain_operator(f, s, {0}) * zero - zero), 0.0);
    EXPECT_EQ(max_abs(chain_operator(f, s, {1}) * zero), 0.0);
}

TEST(ChainOperator, MatchesLeftFoldOracle) {
    Gen g(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = random_schedule(g, 4, 2);
        const auto f = random_family(g, 4, 2);
        for (const auto &l : f.labels()) {
            Matrix fold = Matrix::Identity(4, 4);
            for (std::size_t k = 0; k < l.size(); ++k) {
                fold = f.slots[k].members[l[k]] * s.steps[k] * fold;
            }
            EXPECT_LE(max_abs(chain_operator(f, s, l) - fold), 1e-12);
        }
    }
}

TEST(ChainOperator, LabelOutOfRange) {
    const auto s = EvolutionSchedule::uniform({Matrix::Identity(2, 2)});
    HistoryFamily f;
    f.slots = {ProjectorFamily::computational(2)};
    EXPECT_THROW(chain_operator(f, s, {2}), LabelError);
    EXPECT_THROW(chain_operator(f, s, {0, 0}), LabelError);
}

TEST(HeisenbergChain, TrivialFamilyIsIdentity) {
    Gen g(12);
    const auto s = random_schedule(g, 3, 2);
    EXPECT_LE(max_abs(heisenberg_chain_operator(trivial_family(3, 2), s, {0, 0}) - Matrix::Identity(3, 3)), 1e-12);
}

TEST(HeisenbergChain, IdentityEvolutionMatchesChain) {
    Gen g(13);
    const auto s = EvolutionSchedule::uniform({Matrix::Identity(4, 4), Matrix::Identity(4, 4)});
    const auto f = random_family(g, 4, 2);
    for (const auto &l : f.labels()) {
        EXPECT_LE(max_abs(heisenberg_chain_operator(f, s, l) - chain_operator(f, s, l)), 1e-12);
    }
}

TEST(HeisenbergChain, RelatedToChainByTotalEvolution) {
    Gen g(14);
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = random_schedule(g, 4, 3);
        const auto f = random_family(g, 4, 3);
        const Matrix back = s.total().adjoint();
        for (const auto &l : f.labels()) {
            EXPECT_LE(max_abs(heisenberg_chain_operator(f, s, l) - back * chain_operator(f, s, l)), 1e-12);
        }
    }
}

TEST(DecoherenceFunctional, TrivialFamily) {
    Gen g(15);
    const auto s = random_schedule(g, 3, 2);
    const auto d = decoherence_functional(trivial_family(3, 2), s, g.unit_vector(3));
    ASSERT_EQ(d.entries.rows(), 1);
    EXPECT_NEAR(std::abs(d.entries(0, 0) - 1.0), 0.0, 1e-12);
}

TEST(DecoherenceFunctional, MeasurementModelMatchesPathSum) {
    const double a = 1.0 / std::sqrt(2.0), b = a;
    Vector phi = tensor_product(Vector(a * basis_vector(2, 0) + b * basis_vector(2, 1)), basis_vector(2, 0));
    const auto s = EvolutionSchedule::uniform({cnot()});
    HistoryFamily f;
    f.slots = {ProjectorFamily::from_index_sets(4, {{0, 2}, {1, 3}})};
    const auto d = decoherence_functional(f, s, phi);
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        for (std::size_t j = 0; j < d.labels.size(); ++j) {
            const Complex oracle = path_sum(f, s, d.labels[j], phi).dot(path_sum(f, s, d.labels[i], phi));
            EXPECT_LE(std::abs(d.entries(i, j) - oracle), 1e-12);
        }
    }
    const auto c = consistency_check(d);
    EXPECT_TRUE(c.consistent);
    EXPECT_NEAR(c.probabilities.at({0}), a * a, 1e-12);
    EXPECT_NEAR(c.probabilities.at({1}), b * b, 1e-12);
}

TEST(DecoherenceFunctional, UnequalMeasurementWeights) {
    const double a = 0.6, b = 0.8;
    Vector phi = tensor_product(Vector(a * basis_vector(2, 0) + b * basis_vector(2, 1)), basis_vector(2, 0));
    const auto s = EvolutionSchedule::uniform({cnot()});
    HistoryFamily f;
    f.slots = {ProjectorFamily::from_index_sets(4, {{0, 2}, {1, 3}})};
    const auto c = consistency_check(decoherence_functional(f, s, phi));
    EXPECT_TRUE(c.consistent);
    EXPECT_NEAR(c.probabilities.at({0}), 0.36, 1e-12);
    EXPECT_NEAR(c.probabilities.at({1}), 0.64, 1e-12);
}

TEST(DecoherenceFunctional, HadamardInterferenceOffDiagonal) {
    const auto s = EvolutionSchedule::uniform({hadamard(), hadamard()});
    HistoryFamily f;
    f.slots = {ProjectorFamily::computational(2), ProjectorFamily::computational(2)};
    const auto d = decoherence_functional(f, s, basis_vector(2, 0));
    // Explicit 2×2 computation: C^{(a,b)}|0⟩ = ±½|b⟩, so histories sharing b overlap by ±¼.
    double max_off = 0;
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        for (std::size_t j = 0; j < d.labels.size(); ++j) {
            if (i != j) {
                max_off = std::max(max_off, std::abs(d.entries(i, j)));
            }
        }
    }
    EXPECT_NEAR(max_off, 0.25, 1e-15);
    EXPECT_FALSE(consistency_check(d).consistent);
}

TEST(DecoherenceFunctional, RejectsUnnormalizedInitial) {
    const auto s = EvolutionSchedule::uniform({Matrix::Identity(2, 2)});
    HistoryFamily f;
    f.slots = {ProjectorFamily::computational(2)};
    EXPECT_THROW(decoherence_functional(f, s, Vector(2.0 * basis_vector(2, 0))), NormalizationError);
}

TEST(DecoherenceFunctional, ZeroBranchesRetained) {
    const auto s = EvolutionSchedule::uniform({Matrix::Identity(2, 2)});
    HistoryFamily f;
    f.slots = {ProjectorFamily::computational(2)};
    const auto d = decoherence_functional(f, s, basis_vector(2, 0));
    ASSERT_EQ(d.labels.size(), 2u);
    EXPECT_EQ(d.entries(1, 1), Complex(0.0));
}

TEST(DecoherenceFunctional, PropertiesOnRandomFamilies) {
    Gen g(16);
    for (int trial = 0; trial < 30; ++trial) {
        const int dim = g.integer(2, 6);
        const int slots = g.integer(1, 3);
        const auto s = random_schedule(g, dim, slots);
        const auto f = random_family(g, dim, slots);
        const Vector phi = g.unit_vector(dim);
        const auto d = decoherence_functional(f, s, phi);
        EXPECT_LE(max_abs(d.entries - d.entries.adjoint()), 1e-10);
        EXPECT_NEAR(std::abs(d.entries.sum() - 1.0), 0.0, 1e-9);
        for (std::size_t i = 0; i < d.labels.size(); ++i) {
            EXPECT_GE(d.entries(i, i).real(), -1e-12);
            EXPECT_NEAR(d.entries(i, i).real(), (chain_operator(f, s, d.labels[i]) * phi).squaredNorm(), 1e-12);
        }
    }
}

TEST(DecoherenceFunctional, CoarseGrainingSumsBlocks) {
    Gen g(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 4;
        const auto s = random_schedule(g, dim, 2);
        HistoryFamily fine;
        fine.slots = {g.rotated_family(dim, 3), g.rotated_family(dim, 2)};
        HistoryFamily coarse = fine;
        // Merge members 0 and 1 of the first slot into one.
        auto &slot = coarse.slots[0];
        slot.members = {Matrix(slot.members[0] + slot.members[1]), slot.members[2]};
        slot.labels = {"01", "2"};
        const Vector phi = g.unit_vector(dim);
        const auto df = decoherence_functional(fine, s, phi);
        const auto dc = decoherence_functional(coarse, s, phi);
        auto to_fine = [](int coarse_label) { return coarse_label == 0 ? std::vector<int>{0, 1} : std::vector<int>{2}; };
        auto index_of = [](const DecoherenceMatrix &d, const HistoryLabel &l) {
            return static_cast<int>(std::find(d.labels.begin(), d.labels.end(), l) - d.labels.begin());
        };
        for (std::size_t i = 0; i < dc.labels.size(); ++i) {
            for (std::size_t j = 0; j < dc.labels.size(); ++j) {
                Complex sum = 0;
                for (int a : to_fine(dc.labels[i][0])) {
                    for (int b : to_fine(dc.labels[j][0])) {
                        sum += df.entries(index_of(df, {a, dc.labels[i][1]}), index_of(df, {b, dc.labels[j][1]}));
                    }
                }
                EXPECT_LE(std::abs(dc.entries(i, j) - sum), 1e-10);
            }
        }
    }
}

TEST(ConsistencyCheck, DiagonalMatrix) {
    DecoherenceMatrix d;
    d.labels = {{0}, {1}};
    d.entries = Matrix::Identity(2, 2) * 0.5;
    const auto c = consistency_check(d, 1e-10);
    EXPECT_TRUE(c.consistent);
    EXPECT_EQ(c.probabilities.at({0}), 0.5);
    EXPECT_EQ(c.probabilities.at({1}), 0.5);
}

TEST(ConsistencyCheck, OffDiagonalQuarterFails) {
    DecoherenceMatrix d;
    d.labels = {{0}, {1}};
    d.entries = Matrix::Identity(2, 2) * 0.5;
    d.entries(0, 1) = d.entries(1, 0) = 0.25;
    const auto c = consistency_check(d, 1e-10);
    EXPECT_FALSE(c.consistent);
    EXPECT_EQ(c.max_off_diagonal, 0.25);
}

TEST(ChainSum, TrivialFamilyIsZero) {
    Gen g(18);
    EXPECT_LE(chain_sum_check(trivial_family(3, 2), random_schedule(g, 3, 2)), 1e-12);
}

TEST(ChainSum, RandomFamiliesTelescope) {
    Gen g(19);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = g.integer(2, 8);
        const int slots = g.integer(1, 3);
        EXPECT_LE(chain_sum_check(random_family(g, dim, slots), random_schedule(g, dim, slots)), 1e-10);
    }
}

TEST(ChainSum, MissingProjectorLeavesBranch) {
    Gen g(20);
    const auto s = random_schedule(g, 3, 1);
    HistoryFamily f;
    f.slots = {ProjectorFamily::computational(3)};
    const Matrix missing = f.slots[0].members[2] * s.steps[0];
    f.slots[0].members.pop_back();
    f.slots[0].labels.pop_back();
    // Bypass family validation: the residual is the dropped branch.
    const Matrix sum = chain_operator(f, s, {0}) + chain_operator(f, s, {1});
    EXPECT_NEAR(max_abs(sum - s.total()), max_abs(missing), 1e-12);
    EXPECT_GT(max_abs(missing), 0.0);
}

TEST(EvolutionSchedule, ValidationErrors) {
    EvolutionSchedule s;
    s.times = {0.0, 0.0};
    s.steps = {Matrix::Identity(2, 2)};
    EXPECT_ANY_THROW(s.validate());
    s.times = {0.0, 1.0};
    s.steps = {Matrix(2.0 * Matrix::Identity(2, 2))};
    EXPECT_ANY_THROW(s.validate());
}

}  // namespace
}  // namespace histkit
