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

#include "histkit/cat.hpp"

#include <algorithm>
#include <functional>

#include "histkit/errors.hpp"

namespace histkit {

namespace {

constexpr std::array<int, 5> kAlphabet{2, 2, 2, 2, 3};
const std::array<std::vector<std::string>, 5> kNames{{
    {"none", "no", "yes"},
    {"none", "no", "yes"},
    {"none", "alive", "dead"},
    {"none", "open", "closed"},
    {"none", "closed", "alive", "dead"},
}};

using Digits = std::vector<int>;

Digits decode(int index, const std::vector<int> &dims) {
    Digits d(dims.size());
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        d[k] = index % dims[k];
        index /= dims[k];
    }
    return d;
}

int encode(const Digits &d, const std::vector<int> &dims) {
    int index = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        index = index * dims[k] + d[k];
    }
    return index;
}

/// Permutation matrix for a bijection on basis digits.
Matrix digit_permutation(const std::vector<int> &dims, const std::function<Digits(Digits)> &f) {
    int n = 1;
    for (int d : dims) {
        n *= d;
    }
    Matrix p = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        p(encode(f(decode(i, dims)), dims), i) = 1.0;
    }
    return p;
}

void swap_levels(int &x, int a, int b) {
    if (x == a) {
        x = b;
    } else if (x == b) {
        x = a;
    }
}

OutcomeFamily factor_outcomes(const std::vector<int> &dims, int which) {
    const int d = dims[which];
    const int k = kAlphabet[which];
    ProjectorFamily f;
    Matrix rest = Matrix::Zero(d, d);
    for (int i = k; i < d; ++i) {
        rest(i, i) = 1.0;
    }
    f.members.push_back(embed(rest, dims, which));
    f.labels.push_back("none");
    for (int l = 1; l <= k; ++l) {
        f.members.push_back(embed(rank_one_projector(basis_vector(d, l - 1)), dims, which));
        f.labels.push_back(kNames[which][l]);
    }
    f.dim = static_cast<int>(f.members.front().rows());
    return OutcomeFamily::explicit_family(f);
}

/// Expands every nonzero chain of `m` applied to `initial`.
BranchDecomposition expand(const SubsystemModel &m, const Vector &initial) {
    BranchDecomposition d;
    for (const auto &labels : m.label_vectors()) {
        if (std::find(labels.begin(), labels.end(), 0) != labels.end()) {
            continue;
        }
        const Vector v = subsystem_chain_apply(m, labels, initial);
        const double amp = v.norm();
        if (amp > 1e-14) {
            d.branches.push_back({labels, amp, v / amp});
        }
    }
    Vector sum = Vector::Zero(m.dim());
    for (const auto &b : d.branches) {
        sum += b.amplitude * b.state;
    }
    d.reconstruction_residual = max_abs(sum - m.total() * initial);
    for (std::size_t i = 0; i < d.branches.size(); ++i) {
        for (std::size_t j = i + 1; j < d.branches.size(); ++j) {
            d.orthogonality_residual =
                std::max(d.orthogonality_residual, std::abs(d.branches[i].state.dot(d.branches[j].state)));
        }
    }
    return d;
}

}  // namespace

std::string cat_outcome_name(int factor, int label) {
    if (factor < 0 || factor > 4 || label < 0 || label > kAlphabet[factor]) {
        throw LabelError("no such cat outcome");
    }
    return kNames[factor][label];
}

void CatConfig::validate() const {
    if (std::abs(decay_amplitude) > 1.0 + kUnitaryTol) {
        throw DomainError("|psi_yes| must not exceed 1");
    }
    long long n = 1;
    for (int k = 0; k < 5; ++k) {
        if (dims[k] < kAlphabet[k]) {
            throw CapacityError("factor " + std::to_string(k) + " needs at least " + std::to_string(kAlphabet[k]) +
                                " levels");
        }
        n *= dims[k];
    }
    if (n > static_cast<long long>(kDefaultMaxDim)) {
        throw CapacityError("cat model dimension exceeds capacity");
    }
}

Complex CatConfig::no_amplitude() const {
    return Complex(std::sqrt(std::max(0.0, 1.0 - std::norm(decay_amplitude))), 0.0);
}

CatModel build_cat(const CatConfig &config) {
    config.validate();
    CatModel m;
    m.config = config;
    const std::vector<int> dims = m.dims();
    const Complex y = config.decay_amplitude;
    const Complex n = config.no_amplitude();

    Matrix rot = Matrix::Identity(dims[kCatR], dims[kCatR]);
    rot(0, 0) = n;
    rot(0, 1) = -std::conj(y);
    rot(1, 0) = y;
    rot(1, 1) = std::conj(n);
    const Matrix g_r = embed(rot, dims, kCatR);
    const Matrix g_d = digit_permutation(dims, [](Digits d) {
        if (d[kCatR] == 1) {
            swap_levels(d[kCatD], 0, 1);
        }
        return d;
    });
    const Matrix g_c = digit_permutation(dims, [](Digits d) {
        if (d[kCatD] == 1) {
            swap_levels(d[kCatC], 0, 1);
        }
        return d;
    });
    const bool opened = config.box_opened;
    const Matrix g_b = digit_permutation(dims, [opened](Digits d) {
        if (opened) {
            swap_levels(d[kCatB], 0, 1);
        }
        return d;
    });
    const Matrix g_e = digit_permutation(dims, [](Digits d) {
        if (d[kCatB] == 0 && d[kCatC] < 2) {
            swap_levels(d[kCatE], 0, d[kCatC] == 0 ? 1 : 2);
        }
        return d;
    });

    Digits ready(5, 0);
    ready[kCatB] = cat_label::closed - 1;
    m.initial = basis_vector(static_cast<int>(g_r.rows()), encode(ready, dims));

    m.model.factor_dims = dims;
    m.model.system_factor = kCatR;
    m.model.initial = OutcomeFamily::in_state(rank_one_projector(m.initial));
    m.model.subsystems = {
        {"R", g_r, factor_outcomes(dims, kCatR)},
        {"D", g_d, factor_outcomes(dims, kCatD)},
        {"C", g_c, factor_outcomes(dims, kCatC)},
        {"B", g_b, factor_outcomes(dims, kCatB)},
        {"E", g_e, factor_outcomes(dims, kCatE)},
    };
    m.model.validate();
    const Matrix g_i = g_c * g_d * g_r;
    m.commutator_residual = max_abs(g_b * g_i - g_i * g_b);
    return m;
}

BranchDecomposition interior_branches(const CatModel &m) {
    SubsystemModel interior = m.model;
    interior.subsystems.resize(3);
    interior.maps.clear();
    return branch_decompose(interior, m.initial);
}

CatRecordReport cat_record_check(const CatModel &m, double tol) {
    const auto &s = m.model.subsystems;
    // G_B G_C G_D G_R P_in^+
    Matrix prefix = m.model.initial[1];
    for (int k = 0; k <= kCatB; ++k) {
        prefix = s[k].interaction * prefix;
    }
    CatRecordReport r;
    std::vector<std::string> offenders;
    for (int b = 1; b < s[kCatB].outcomes.size(); ++b) {
        for (int c = 1; c < s[kCatC].outcomes.size(); ++c) {
            int expect = cat_label::env_closed;
            if (b == cat_label::open) {
                expect = c == cat_label::alive ? cat_label::env_alive : cat_label::env_dead;
            }
            const Matrix left = s[kCatE].interaction * s[kCatB].outcomes[b] * s[kCatC].outcomes[c] * prefix;
            for (int e = 1; e < s[kCatE].outcomes.size(); ++e) {
                if (e == expect) {
                    continue;
                }
                const double x = max_abs(s[kCatE].outcomes[e] * left);
                r.max_cross_term = std::max(r.max_cross_term, x);
                if (x > tol) {
                    offenders.push_back("(" + kNames[kCatB][b] + "," + kNames[kCatC][c] + ")->" + kNames[kCatE][e]);
                }
            }
            r.map[{b, c}] = expect;
        }
    }
    if (!offenders.empty()) {
        throw CorrelationError("environment is not correlated with (box, cat)", offenders);
    }
    return r;
}

BranchDecomposition full_branches(const CatModel &m, double tol) {
    for (int link = 1; link <= kCatB; ++link) {
        correlation_check(m.model, link, tol);
    }
    cat_record_check(m, tol);
    return expand(m.model, m.initial);
}

Matrix reduced_state(const Vector &v, const std::vector<int> &dims, int which) {
    int n = 1;
    for (int d : dims) {
        n *= d;
    }
    if (v.size() != n || which < 0 || which >= static_cast<int>(dims.size())) {
        throw ShapeError("state does not match the factor layout");
    }
    const int d = dims[which];
    Matrix rho = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        if (v(i) == Complex(0.0)) {
            continue;
        }
        const Digits di = decode(i, dims);
        for (int e = 0; e < d; ++e) {
            Digits dj = di;
            dj[which] = e;
            rho(di[which], e) += v(i) * std::conj(v(encode(dj, dims)));
        }
    }
    return rho;
}

BoxReport box_irrelevance_check(const CatModel &opened, const CatModel &closed, double tol) {
    if (!opened.config.box_opened || closed.config.box_opened) {
        throw InputError("box check needs an opened and a closed model");
    }
    if (opened.config.dims != closed.config.dims ||
        std::abs(opened.config.decay_amplitude - closed.config.decay_amplitude) > 0.0) {
        throw InputError("models must differ only in box intent");
    }
    BoxReport r;
    const BranchDecomposition fc = full_branches(closed);
    const BranchDecomposition fo = full_branches(opened);
    r.closed_label_identical = true;
    const std::vector<int> dims = closed.dims();
    Matrix first;
    for (const auto &b : fc.branches) {
        r.closed_label_identical = r.closed_label_identical && b.labels.back() == cat_label::env_closed;
        const Matrix rho = reduced_state(b.state, dims, kCatE);
        if (first.size() == 0) {
            first = rho;
        }
        r.closed_state_residual = std::max(r.closed_state_residual, max_abs(rho - first));
    }
    auto amplitude_gap = [](const BranchDecomposition &a, const BranchDecomposition &b, std::size_t depth) {
        if (a.branches.size() != b.branches.size()) {
            return 1.0;
        }
        double gap = 0.0;
        for (std::size_t i = 0; i < a.branches.size(); ++i) {
            // Interior labels (in, R, D, C) must agree branch by branch.
            for (std::size_t k = 0; k < depth; ++k) {
                if (a.branches[i].labels[k] != b.branches[i].labels[k]) {
                    return 1.0;
                }
            }
            gap = std::max(gap, std::abs(a.branches[i].amplitude - b.branches[i].amplitude));
        }
        return gap;
    };
    r.interior_amplitude_residual = amplitude_gap(interior_branches(opened), interior_branches(closed), 4);
    r.full_amplitude_residual = amplitude_gap(fo, fc, 4);
    r.pass = r.closed_label_identical && r.closed_state_residual <= tol && r.interior_amplitude_residual <= tol &&
             r.full_amplitude_residual <= tol;
    return r;
}

}  // namespace histkit
