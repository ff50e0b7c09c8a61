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

#include "histkit/envariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "histkit/errors.hpp"

namespace histkit {

namespace {

constexpr double kPrecondTol = 1e-12;

Vector system_basis(int dim, int a) {
    return basis_vector(dim, a);
}

void check_outcome(const EnvarianceSpace &space, int alpha) {
    if (alpha < 0 || alpha >= space.outcomes()) {
        throw LabelError("outcome " + std::to_string(alpha) + " not present");
    }
}

}  // namespace

void EnvarianceSpace::validate() const {
    if (system_dim < 1 || env_dim < 1) {
        throw ShapeError("factor dimensions must be positive");
    }
    if (static_cast<int>(env_sectors.size()) != system_dim) {
        throw ShapeError("one environment sector per system outcome required");
    }
    std::set<int> seen;
    for (const auto &sector : env_sectors) {
        if (sector.empty()) {
            throw CapacityError("environment sector has no capacity");
        }
        for (int i : sector) {
            if (i < 0 || i >= env_dim) {
                throw ShapeError("environment sector index out of range");
            }
            if (!seen.insert(i).second) {
                throw DisjointnessError("environment sectors overlap at index " + std::to_string(i));
            }
        }
    }
    if (static_cast<long long>(system_dim) * env_dim > static_cast<long long>(kDefaultMaxDim) * 16) {
        throw CapacityError("joint dimension too large");
    }
}

Matrix EnvarianceSpace::env_sector_projector(int alpha) const {
    check_outcome(*this, alpha);
    Matrix p = Matrix::Zero(env_dim, env_dim);
    for (int i : env_sectors[alpha]) {
        p(i, i) = 1.0;
    }
    return p;
}

Matrix EnvarianceSpace::system_projector(int alpha) const {
    check_outcome(*this, alpha);
    return tensor_product(rank_one_projector(basis_vector(system_dim, alpha)), Matrix::Identity(env_dim, env_dim));
}

Matrix EnvarianceSpace::env_projector(int alpha) const {
    return tensor_product(Matrix::Identity(system_dim, system_dim), env_sector_projector(alpha));
}

EnvarianceSpace EnvarianceSpace::provisioned(const std::vector<int> &capacity) {
    EnvarianceSpace s;
    s.system_dim = static_cast<int>(capacity.size());
    s.env_dim = 0;
    for (int c : capacity) {
        if (c < 1) {
            throw CapacityError("sector capacity must be positive");
        }
        std::vector<int> sector(c);
        std::iota(sector.begin(), sector.end(), s.env_dim);
        s.env_sectors.push_back(sector);
        s.env_dim += c;
    }
    s.validate();
    return s;
}

Vector CorrelatedState::grid_state(int a, int b) const {
    check_outcome(space, a);
    check_outcome(space, b);
    return tensor_product(system_basis(space.system_dim, a), records[b]);
}

Vector CorrelatedState::joint() const {
    Vector v = Vector::Zero(space.dim());
    for (int a = 0; a < space.outcomes(); ++a) {
        v += psi[a] * grid_state(a, a);
    }
    return v;
}

void CorrelatedState::validate(double tol) const {
    space.validate();
    if (static_cast<int>(psi.size()) != space.outcomes() || static_cast<int>(records.size()) != space.outcomes()) {
        throw ShapeError("one amplitude and one record per outcome required");
    }
    double norm = 0.0;
    for (int a = 0; a < space.outcomes(); ++a) {
        const Vector &e = records[a];
        if (e.size() != space.env_dim) {
            throw ShapeError("record dimension mismatch");
        }
        if (std::abs(e.norm() - 1.0) > tol) {
            throw NormalizationError("record " + std::to_string(a) + " is not a unit vector");
        }
        // Joint eigenstate of both families with equal labels: |a⟩ is a system eigenstate by
        // construction, so only the record weight outside sector a can break it.
        Vector outside = e;
        for (int i : space.env_sectors[a]) {
            outside(i) = 0.0;
        }
        const double env = max_abs(outside);
        if (env > tol) {
            throw PreconditionError("branch " + std::to_string(a) + " is not a matched joint eigenstate", env);
        }
        norm += std::norm(psi[a]);
    }
    if (std::abs(norm - 1.0) > tol) {
        throw NormalizationError("amplitudes are not normalized");
    }
}

CorrelatedState CorrelatedState::with_amplitudes(const EnvarianceSpace &space, const std::vector<Complex> &psi) {
    space.validate();
    CorrelatedState s;
    s.space = space;
    s.psi = psi;
    for (int a = 0; a < space.outcomes(); ++a) {
        s.records.push_back(basis_vector(space.env_dim, space.env_sectors[a].front()));
    }
    s.validate();
    return s;
}

CorrelatedState CorrelatedState::from_decomposition(const EnvarianceSpace &space, const BranchDecomposition &d) {
    space.validate();
    if (d.branches.size() > static_cast<std::size_t>(space.outcomes())) {
        throw ShapeError("more branches than outcomes");
    }
    CorrelatedState s;
    s.space = space;
    s.psi.assign(space.outcomes(), Complex(0.0));
    for (int a = 0; a < space.outcomes(); ++a) {
        s.records.push_back(basis_vector(space.env_dim, space.env_sectors[a].front()));
    }
    std::vector<bool> used(space.outcomes(), false);
    for (const auto &b : d.branches) {
        if (b.state.size() != space.dim()) {
            throw ShapeError("branch state dimension mismatch");
        }
        int best = 0;
        double best_w = -1.0;
        for (int a = 0; a < space.outcomes(); ++a) {
            const double w = b.state.segment(a * space.env_dim, space.env_dim).squaredNorm();
            if (w > best_w) {
                best_w = w;
                best = a;
            }
        }
        if (used[best]) {
            throw CorrelationError("two branches share system outcome " + std::to_string(best), {});
        }
        used[best] = true;
        Vector e = b.state.segment(best * space.env_dim, space.env_dim);
        const double n = e.norm();
        s.records[best] = e / n;
        s.psi[best] = Complex(b.amplitude * n, 0.0);
    }
    s.validate();
    return s;
}

double PhaseSpec::counterphase(int alpha) const {
    return 2.0 * M_PI * static_cast<double>(ells.at(alpha)) - sigmas.at(alpha);
}

double phase_envariance_check(const CorrelatedState &s, const PhaseSpec &p) {
    s.validate();
    const int k = s.space.outcomes();
    if (static_cast<int>(p.sigmas.size()) != k || static_cast<int>(p.ells.size()) != k) {
        throw ShapeError("one phase per outcome required");
    }
    // U_S and U_E are diagonal in the chosen bases; identity on undeclared environment indices.
    Eigen::VectorXcd us(s.space.system_dim);
    Eigen::VectorXcd ue = Eigen::VectorXcd::Ones(s.space.env_dim);
    for (int a = 0; a < k; ++a) {
        us(a) = std::polar(1.0, p.sigmas[a]);
        for (int i : s.space.env_sectors[a]) {
            ue(i) = std::polar(1.0, p.counterphase(a));
        }
    }
    const Vector psi = s.joint();
    Vector out = psi;
    for (int a = 0; a < s.space.system_dim; ++a) {
        for (int i = 0; i < s.space.env_dim; ++i) {
            out(a * s.space.env_dim + i) *= us(a) * ue(i);
        }
    }
    return max_abs(out - psi);
}

Matrix swap_operator(const CorrelatedState &s, int beta, int gamma, SwapTarget target) {
    check_outcome(s.space, beta);
    check_outcome(s.space, gamma);
    if (beta == gamma) {
        throw DomainError("swap requires distinct outcomes");
    }
    const int k = s.space.outcomes();
    const int n = s.space.dim();
    auto swapped = [&](int x) { return x == beta ? gamma : (x == gamma ? beta : x); };
    Matrix u = Matrix::Identity(n, n);
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            const Vector g = s.grid_state(a, b);
            const Vector h = target == SwapTarget::system ? s.grid_state(swapped(a), b) : s.grid_state(a, swapped(b));
            u += h * g.adjoint() - g * g.adjoint();
        }
    }
    return u;
}

double envariance_swap_check(const CorrelatedState &s, int beta, int gamma) {
    s.validate();
    check_outcome(s.space, beta);
    check_outcome(s.space, gamma);
    if (beta == gamma) {
        throw DomainError("swap requires distinct outcomes");
    }
    const double gap = std::abs(s.psi[beta]) - std::abs(s.psi[gamma]);
    if (std::abs(gap) > kPrecondTol) {
        throw PreconditionError("swapped amplitudes differ in magnitude", gap);
    }
    const Matrix us = swap_operator(s, beta, gamma, SwapTarget::system);
    const Matrix ue = swap_operator(s, beta, gamma, SwapTarget::environment);
    // Equal magnitudes may still differ by phase; phase envariance removes it first.
    CorrelatedState aligned = s;
    aligned.psi[gamma] = std::abs(s.psi[gamma]) * (std::abs(s.psi[beta]) > 0 ? s.psi[beta] / std::abs(s.psi[beta])
                                                                           : Complex(1.0));
    const Vector psi = aligned.joint();
    return max_abs(us * (ue * psi) - psi);
}

Vector effective_initial_state(const Vector &initial, const Matrix &g, const Matrix &u) {
    if (g.rows() != g.cols() || u.rows() != u.cols() || g.rows() != u.rows() || initial.size() != g.rows()) {
        throw ShapeError("dimension mismatch");
    }
    const double r = unitarity_residual(g);
    if (r > kUnitaryTol * std::max<double>(1.0, std::sqrt(static_cast<double>(g.rows())))) {
        throw PreconditionError("evolution is not unitary", r);
    }
    return g.adjoint() * (u * (g * initial));
}

Matrix FineGrainedModel::env_fine_projector(int alpha, int beta) const {
    check_outcome(state.space, alpha);
    if (beta < 0 || beta >= static_cast<int>(fine[alpha].size())) {
        throw LabelError("fine label out of range");
    }
    const Vector &f = fine[alpha][beta];
    Matrix p = f * f.adjoint();
    if (beta + 1 == static_cast<int>(fine[alpha].size())) {
        Matrix rest = state.space.env_sector_projector(alpha);
        for (const auto &g : fine[alpha]) {
            rest -= g * g.adjoint();
        }
        p += rest;
    }
    return p;
}

Matrix FineGrainedModel::joint_fine_projector(int alpha, int beta) const {
    return tensor_product(Matrix::Identity(state.space.system_dim, state.space.system_dim),
                          env_fine_projector(alpha, beta));
}

Vector FineGrainedModel::fine_state(int alpha, int beta) const {
    check_outcome(state.space, alpha);
    const Complex a = state.psi[alpha];
    const Complex phase = std::abs(a) > 0 ? a / std::abs(a) : Complex(1.0);
    return phase * tensor_product(system_basis(state.space.system_dim, alpha), fine[alpha].at(beta));
}

int FineGrainedModel::fine_count() const {
    int n = 0;
    for (const auto &f : fine) {
        n += static_cast<int>(f.size());
    }
    return n;
}

FineGrainedModel fine_grain(const CorrelatedState &s, const RationalAmplitudeSpec &r, double tol) {
    s.validate();
    const int k = s.space.outcomes();
    if (static_cast<int>(r.m.size()) != k) {
        throw ShapeError("one m per outcome required");
    }
    long long total = 0;
    for (long long m : r.m) {
        if (m < 1) {
            throw DomainError("fine-graining counts must be positive");
        }
        total += m;
    }
    if (total != r.M) {
        throw DomainError("counts do not sum to M");
    }
    for (int a = 0; a < k; ++a) {
        const double target = static_cast<double>(r.m[a]) / static_cast<double>(r.M);
        const double gap = std::norm(s.psi[a]) - target;
        if (std::abs(gap) > tol) {
            throw PreconditionError("squared amplitude does not match m/M for outcome " + std::to_string(a), gap);
        }
        if (static_cast<long long>(s.space.env_sectors[a].size()) < r.m[a]) {
            throw CapacityError("environment sector " + std::to_string(a) + " holds " +
                                std::to_string(s.space.env_sectors[a].size()) + " states but " +
                                std::to_string(r.m[a]) + " are required");
        }
    }
    FineGrainedModel f;
    f.state = s;
    f.spec = r;
    f.fine.resize(k);
    for (int a = 0; a < k; ++a) {
        const auto &sector = s.space.env_sectors[a];
        const int d = static_cast<int>(sector.size());
        const int m = static_cast<int>(r.m[a]);
        // Orthonormal sector basis whose first vector is the record.
        Vector record(d);
        for (int i = 0; i < d; ++i) {
            record(i) = s.records[a](sector[i]);
        }
        const Eigen::HouseholderQR<Matrix> qr(record);
        Matrix local = qr.householderQ() * Matrix::Identity(d, m);
        local.col(0) *= local.col(0).dot(record);
        Matrix dft(m, m);
        for (int q = 0; q < m; ++q) {
            for (int b = 0; b < m; ++b) {
                dft(q, b) = std::polar(1.0 / std::sqrt(static_cast<double>(m)), 2.0 * M_PI * q * b / m);
            }
        }
        const Matrix combos = local * dft;
        for (int b = 0; b < m; ++b) {
            Vector e = Vector::Zero(s.space.env_dim);
            for (int i = 0; i < d; ++i) {
                e(sector[i]) = combos(i, b);
            }
            f.fine[a].push_back(e);
        }
    }
    return f;
}

namespace {

int ancilla_index(const FineGrainedModel &f, int alpha, int beta) {
    int k = 0;
    for (int a = 0; a < alpha; ++a) {
        k += static_cast<int>(f.fine[a].size());
    }
    return k + beta;
}

void check_ancilla(const FineGrainedModel &f, int ancilla_dim) {
    if (ancilla_dim < f.fine_count()) {
        throw CapacityError("ancilla dimension " + std::to_string(ancilla_dim) + " below " +
                            std::to_string(f.fine_count()) + " fine outcomes");
    }
}

}  // namespace

AncillaState attach_ancilla(const FineGrainedModel &f, int ancilla_dim) {
    check_ancilla(f, ancilla_dim);
    const auto &space = f.state.space;
    const Vector psi = f.state.joint();
    AncillaState out;
    out.ancilla_dim = ancilla_dim;
    out.joint = Vector::Zero(static_cast<Eigen::Index>(space.dim()) * ancilla_dim);
    // G_C (|s⟩|e⟩|c_0⟩) = Σ ⟨f_{αβ}|e⟩ |s⟩|f_{αβ}⟩|c_k⟩ + |s⟩ (1 − Σ|f⟩⟨f|)|e⟩ |c_0⟩.
    Vector rest = psi;
    for (int a = 0; a < space.outcomes(); ++a) {
        for (int b = 0; b < static_cast<int>(f.fine[a].size()); ++b) {
            const Vector &fe = f.fine[a][b];
            const int k = ancilla_index(f, a, b);
            const Vector c = basis_vector(ancilla_dim, k);
            Vector part(space.dim());
            for (int sidx = 0; sidx < space.system_dim; ++sidx) {
                const Complex amp = fe.dot(psi.segment(sidx * space.env_dim, space.env_dim));
                part.segment(sidx * space.env_dim, space.env_dim) = amp * fe;
            }
            rest -= part;
            out.joint += tensor_product(part, c);
            FineBranch br;
            br.alpha = a;
            br.beta = b;
            br.ancilla_index = k;
            br.state = tensor_product(f.fine_state(a, b), c);
            br.coefficient = br.state.dot(out.joint);
            out.branches.push_back(br);
        }
    }
    out.joint += tensor_product(rest, basis_vector(ancilla_dim, 0));
    // Coefficients are read after the full state is assembled.
    for (auto &br : out.branches) {
        br.coefficient = br.state.dot(out.joint);
    }
    return out;
}

Matrix ancilla_interaction(const FineGrainedModel &f, int ancilla_dim) {
    check_ancilla(f, ancilla_dim);
    const auto &space = f.state.space;
    if (static_cast<long long>(space.dim()) * ancilla_dim > static_cast<long long>(kDefaultMaxDim)) {
        throw CapacityError("dense ancilla interaction exceeds capacity");
    }
    Matrix rest = Matrix::Identity(space.env_dim, space.env_dim);
    Matrix env_part = Matrix::Zero(space.env_dim * ancilla_dim, space.env_dim * ancilla_dim);
    for (int a = 0; a < space.outcomes(); ++a) {
        for (int b = 0; b < static_cast<int>(f.fine[a].size()); ++b) {
            const Vector &fe = f.fine[a][b];
            const Matrix pf = fe * fe.adjoint();
            rest -= pf;
            const int k = ancilla_index(f, a, b);
            Matrix swap = Matrix::Identity(ancilla_dim, ancilla_dim);
            if (k != 0) {
                swap(0, 0) = swap(k, k) = 0.0;
                swap(0, k) = swap(k, 0) = 1.0;
            }
            env_part += tensor_product(pf, swap);
        }
    }
    env_part += tensor_product(rest, Matrix::Identity(ancilla_dim, ancilla_dim));
    return tensor_product(Matrix::Identity(space.system_dim, space.system_dim), env_part);
}

std::vector<Rational> born_probabilities(const FineGrainedModel &f) {
    long long total = 0;
    std::vector<long long> counts;
    for (const auto &fa : f.fine) {
        counts.push_back(static_cast<long long>(fa.size()));
        total += counts.back();
    }
    std::vector<Rational> p;
    for (long long c : counts) {
        const long long g = std::gcd(c, total);
        p.push_back({c / g, total / g});
    }
    return p;
}

RationalAmplitudeSpec rational_approximation(const std::vector<double> &amplitudes, double tol) {
    if (tol < 1e-9) {
        throw CapacityError("tolerance below 1e-9 would require an unbounded denominator");
    }
    if (amplitudes.empty()) {
        throw DomainError("no amplitudes");
    }
    const int k = static_cast<int>(amplitudes.size());
    std::vector<double> w(k);
    double sum = 0.0;
    for (int a = 0; a < k; ++a) {
        w[a] = amplitudes[a] * amplitudes[a];
        sum += w[a];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw NormalizationError("squared amplitudes do not sum to one");
    }
    const long long cap = std::min<long long>(static_cast<long long>(std::ceil(k / tol)), 1000000LL);
    std::vector<int> order(k);
    for (long long M = 1; M <= cap; ++M) {
        std::vector<long long> m(k);
        std::vector<double> frac(k);
        long long assigned = 0;
        for (int a = 0; a < k; ++a) {
            const double x = w[a] * static_cast<double>(M);
            m[a] = static_cast<long long>(std::floor(x));
            frac[a] = x - static_cast<double>(m[a]);
            assigned += m[a];
        }
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return frac[x] > frac[y]; });
        for (long long r = 0; r < M - assigned && r < k; ++r) {
            ++m[order[r]];
        }
        double worst = 0.0;
        bool ok = true;
        for (int a = 0; a < k; ++a) {
            const double err = std::abs(static_cast<double>(m[a]) / static_cast<double>(M) - w[a]);
            worst = std::max(worst, err);
            if (m[a] == 0 && w[a] > tol) {
                ok = false;
            }
        }
        if (ok && worst <= tol) {
            return {m, M};
        }
    }
    throw CapacityError("no denominator up to " + std::to_string(cap) + " meets the tolerance");
}

}  // namespace histkit
