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

#include "histkit/branches.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "histkit/errors.hpp"

namespace histkit {

const Matrix &OutcomeFamily::operator[](int label) const {
    if (label < 0 || label >= size()) {
        throw LabelError("outcome label " + std::to_string(label) + " out of range");
    }
    return projectors.members[label];
}

OutcomeFamily OutcomeFamily::guaranteed(const ProjectorFamily &outcomes) {
    OutcomeFamily f;
    f.projectors.dim = outcomes.dim;
    f.projectors.members.push_back(Matrix::Zero(outcomes.dim, outcomes.dim));
    f.projectors.labels.push_back("none");
    for (int i = 0; i < outcomes.size(); ++i) {
        f.projectors.members.push_back(outcomes.members[i]);
        f.projectors.labels.push_back(i < static_cast<int>(outcomes.labels.size()) ? outcomes.labels[i]
                                                                                   : std::to_string(i + 1));
    }
    return f;
}

OutcomeFamily OutcomeFamily::in_state(const Matrix &p) {
    OutcomeFamily f;
    f.projectors.dim = static_cast<int>(p.rows());
    f.projectors.members = {Matrix::Identity(p.rows(), p.cols()) - p, p};
    f.projectors.labels = {"none", "in"};
    return f;
}

OutcomeFamily OutcomeFamily::explicit_family(const ProjectorFamily &with_label0) {
    if (with_label0.size() < 1) {
        throw ShapeError("outcome family needs a label-0 member");
    }
    OutcomeFamily f;
    f.projectors = with_label0;
    return f;
}

int SubsystemModel::dim() const {
    return initial.dim();
}

void SubsystemModel::validate(double tol) const {
    if (subsystems.empty()) {
        throw ShapeError("subsystem model needs at least one subsystem");
    }
    auto check_family = [&](const OutcomeFamily &f, const std::string &who) {
        if (f.dim() != dim()) {
            throw ShapeError(who + ": outcome family dimension mismatch");
        }
        auto r = validate_projector_family(f.projectors, tol);
        if (!r.pass) {
            throw PreconditionError(
                who + ": outcomes are not a projector family",
                std::max({r.completeness, r.idempotence, r.self_adjointness, r.orthogonality}));
        }
    };
    check_family(initial, "initial");
    std::set<std::string> names;
    for (const auto &s : subsystems) {
        if (!names.insert(s.name).second) {
            throw InputError("duplicate subsystem name '" + s.name + "'");
        }
        if (s.interaction.rows() != dim() || s.interaction.cols() != dim()) {
            throw ShapeError(s.name + ": interaction dimension mismatch");
        }
        const double u = unitarity_residual(s.interaction);
        if (u > kUnitaryTol * 100) {
            throw PreconditionError(s.name + ": interaction is not unitary", u);
        }
        check_family(s.outcomes, s.name);
    }
    if (maps.size() > subsystems.size()) {
        throw ShapeError("more correlation maps than links");
    }
}

Matrix SubsystemModel::total() const {
    Matrix g = Matrix::Identity(dim(), dim());
    for (const auto &s : subsystems) {
        g = s.interaction * g;
    }
    return g;
}

std::vector<std::vector<int>> SubsystemModel::label_vectors() const {
    std::vector<std::vector<int>> out;
    for (int a = 0; a < initial.size(); ++a) {
        out.push_back({a});
    }
    for (const auto &s : subsystems) {
        std::vector<std::vector<int>> next;
        for (const auto &prefix : out) {
            for (int a = 0; a < s.outcomes.size(); ++a) {
                auto l = prefix;
                l.push_back(a);
                next.push_back(std::move(l));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::optional<CorrelationMap> SubsystemModel::map_for(int link) const {
    if (link < static_cast<int>(maps.size())) {
        return maps[link];
    }
    return std::nullopt;
}

Matrix subsystem_chain_operator(const SubsystemModel &m, const std::vector<int> &labels) {
    if (labels.size() != m.subsystems.size() + 1) {
        throw LabelError("label vector needs one entry for the in-state and one per subsystem");
    }
    Matrix c = m.initial[labels[0]];
    for (std::size_t i = 0; i < m.subsystems.size(); ++i) {
        c = m.subsystems[i].outcomes[labels[i + 1]] * (m.subsystems[i].interaction * c);
    }
    return c;
}

Vector subsystem_chain_apply(const SubsystemModel &m, const std::vector<int> &labels, const Vector &v) {
    if (labels.size() != m.subsystems.size() + 1) {
        throw LabelError("label vector needs one entry for the in-state and one per subsystem");
    }
    Vector c = m.initial[labels[0]] * v;
    for (std::size_t i = 0; i < m.subsystems.size(); ++i) {
        c = m.subsystems[i].outcomes[labels[i + 1]] * (m.subsystems[i].interaction * c);
    }
    return c;
}

namespace {

std::string pair_name(int a, int b) {
    return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

}  // namespace

CorrelationReport correlation_check(const SubsystemModel &m, int link, double tol) {
    if (link < 1 || link > m.links()) {
        throw LabelError("link " + std::to_string(link) + " does not exist");
    }
    // G_{k−1} ⋯ G_0 P_in^+
    Matrix prefix = Matrix::Zero(m.dim(), m.dim());
    for (int a = 1; a < m.initial.size(); ++a) {
        prefix += m.initial[a];
    }
    for (int i = 0; i < link; ++i) {
        prefix = m.subsystems[i].interaction * prefix;
    }
    const Subsystem &prev = m.subsystems[link - 1];
    const Subsystem &cur = m.subsystems[link];
    CorrelationReport r;
    r.link = link;
    const auto supplied = m.map_for(link);
    r.inferred = !supplied.has_value();
    std::vector<std::string> offenders;
    double min_kept = -1.0;
    for (int ap = 1; ap < prev.outcomes.size(); ++ap) {
        const Matrix left = cur.interaction * prev.outcomes[ap] * prefix;
        std::vector<std::pair<int, double>> terms;
        for (int ak = 1; ak < cur.outcomes.size(); ++ak) {
            terms.emplace_back(ak, max_abs(cur.outcomes[ak] * left));
        }
        int keep = -1;
        if (supplied) {
            auto it = supplied->find(ap);
            keep = it == supplied->end() ? -1 : it->second;
            for (const auto &[ak, x] : terms) {
                if (ak != keep && x > tol) {
                    offenders.push_back(pair_name(ap, ak));
                }
            }
        } else {
            std::vector<int> alive;
            for (const auto &[ak, x] : terms) {
                if (x > tol) {
                    alive.push_back(ak);
                }
            }
            if (alive.size() > 1) {
                for (int ak : alive) {
                    offenders.push_back(pair_name(ap, ak));
                }
            } else if (alive.size() == 1) {
                keep = alive.front();
            }
        }
        if (keep > 0) {
            r.map[ap] = keep;
        }
        for (const auto &[ak, x] : terms) {
            if (ak == keep) {
                min_kept = min_kept < 0 ? x : std::min(min_kept, x);
            } else {
                r.max_cross_term = std::max(r.max_cross_term, x);
            }
        }
    }
    if (!offenders.empty()) {
        throw CorrelationError(
            "link " + std::to_string(link) + " (" + prev.name + " -> " + cur.name + ") violates the correlation condition",
            offenders);
    }
    r.min_kept_term = std::max(min_kept, 0.0);
    if (r.map.size() >= 2) {
        std::set<int> targets;
        for (const auto &[k, v] : r.map) {
            targets.insert(v);
        }
        r.degenerate = targets.size() == 1;
    }
    return r;
}

Matrix random_unitary(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            z(i, j) = Complex(normal(rng), normal(rng));
        }
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase ambiguity so the distribution is Haar.
    for (int j = 0; j < dim; ++j) {
        const Complex d = r(j, j);
        if (std::abs(d) > 0) {
            q.col(j) *= d / std::abs(d);
        }
    }
    return q;
}

RecordReport environment_record_check(
    const SubsystemModel &m, int apparatus_link, int environment_link, double tol, int perturbations, std::uint64_t seed) {
    RecordReport r;
    r.apparatus = correlation_check(m, apparatus_link, tol);
    r.environment = correlation_check(m, environment_link, tol);
    if (m.factor_dims.empty()) {
        throw ShapeError("environment record check needs the tensor layout of the model");
    }
    const int sys_dim = m.factor_dims.at(m.system_factor);
    for (int k = 0; k < perturbations; ++k) {
        SubsystemModel p = m;
        const Matrix u = embed(random_unitary(sys_dim, seed + static_cast<std::uint64_t>(k)), m.factor_dims, m.system_factor);
        p.subsystems[environment_link].interaction = m.subsystems[environment_link].interaction * u;
        CorrelationReport c = correlation_check(p, environment_link, tol);
        r.max_perturbed_cross_term = std::max(r.max_perturbed_cross_term, c.max_cross_term);
        r.map_stable = r.map_stable && c.map == r.environment.map;
        ++r.perturbations;
    }
    return r;
}

BranchDecomposition branch_decompose(const SubsystemModel &m, const Vector &initial, bool keep_zero, double tol) {
    if (initial.size() != m.dim()) {
        throw ShapeError("initial state dimension mismatch");
    }
    if (std::abs(initial.norm() - 1.0) > kUnitaryTol) {
        throw NormalizationError("initial state is not unit-norm");
    }
    for (int link = 1; link <= m.links(); ++link) {
        correlation_check(m, link, tol);
    }
    BranchDecomposition d;
    const double zero = 1e-14;
    for (const auto &labels : m.label_vectors()) {
        const Vector v = subsystem_chain_apply(m, labels, initial);
        const double amp = v.norm();
        if (amp > zero) {
            d.branches.push_back({labels, amp, v / amp});
            continue;
        }
        if (!keep_zero) {
            continue;
        }
        const Matrix &p = m.subsystems.back().outcomes[labels.back()];
        Vector state = Vector::Zero(m.dim());
        for (int i = 0; i < m.dim(); ++i) {
            const Vector e = basis_vector(m.dim(), i);
            if (max_abs(p * e - e) <= tol) {
                state = e;
                break;
            }
        }
        d.branches.push_back({labels, 0.0, state});
    }
    Vector sum = Vector::Zero(m.dim());
    for (const auto &b : d.branches) {
        sum += b.amplitude * b.state;
    }
    d.reconstruction_residual = max_abs(sum - m.total() * initial);
    // Zero-amplitude states are arbitrary, so only weighted branches enter the orthogonality residual.
    for (std::size_t i = 0; i < d.branches.size(); ++i) {
        for (std::size_t j = i + 1; j < d.branches.size(); ++j) {
            if (d.branches[i].amplitude > 0 && d.branches[j].amplitude > 0) {
                d.orthogonality_residual =
                    std::max(d.orthogonality_residual, std::abs(d.branches[i].state.dot(d.branches[j].state)));
            }
        }
    }
    return d;
}

AmbiguityReport basis_ambiguity_demo(
    const SubsystemModel &two, const SubsystemModel &three, const Eigen::MatrixXd &mixing, double tol) {
    if (two.subsystems.size() != 2 || three.subsystems.size() != 3) {
        throw ShapeError("ambiguity demo needs a (S, A) model and an (S, A, E) model");
    }
    const OutcomeFamily &ps = two.subsystems[0].outcomes;
    const OutcomeFamily &pa = two.subsystems[1].outcomes;
    const int k = ps.size() - 1;
    if (mixing.rows() != k || mixing.cols() != k || pa.size() - 1 != k) {
        throw InputError("mixing matrix must be K x K over the non-zero labels");
    }
    for (int i = 0; i < k; ++i) {
        if (std::abs(mixing.row(i).sum() - 1.0) > tol || std::abs(mixing.col(i).sum() - 1.0) > tol) {
            throw InputError("mixing rows and columns must each sum to 1");
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mixing);
    if (!lu.isInvertible()) {
        throw InputError("mixing matrix is singular");
    }
    const Eigen::MatrixXd inv = lu.inverse();
    AmbiguityReport r;
    r.alternate_system = ps.projectors;
    r.alternate_apparatus = pa.projectors;
    for (int b = 0; b < k; ++b) {
        Matrix s = Matrix::Zero(ps.dim(), ps.dim());
        Matrix a = Matrix::Zero(ps.dim(), ps.dim());
        for (int al = 0; al < k; ++al) {
            s += inv(b, al) * ps[al + 1];
            a += mixing(al, b) * pa[al + 1];
        }
        r.alternate_system.members[b + 1] = s;
        r.alternate_apparatus.members[b + 1] = a;
        r.alternate_system.labels[b + 1] += "'";
        r.alternate_apparatus.labels[b + 1] += "'";
    }
    for (const auto *f : {&r.alternate_system, &r.alternate_apparatus}) {
        auto v = validate_projector_family(*f, tol);
        if (!v.pass) {
            throw InputError("mixing does not produce an alternate projector family");
        }
    }
    const Matrix &ga = two.subsystems[1].interaction;
    Matrix lhs = Matrix::Zero(ps.dim(), ps.dim());
    Matrix rhs = Matrix::Zero(ps.dim(), ps.dim());
    for (int a = 1; a <= k; ++a) {
        lhs += pa[a] * ga * ps[a];
        rhs += r.alternate_apparatus.members[a] * ga * r.alternate_system.members[a];
    }
    r.operator_identity_residual = max_abs(lhs - rhs);

    SubsystemModel alt = three;
    alt.subsystems[0].outcomes.projectors = r.alternate_system;
    alt.subsystems[1].outcomes.projectors = r.alternate_apparatus;
    CorrelationMap delta;
    for (int a = 1; a <= k; ++a) {
        delta[a] = a;
    }
    alt.maps.assign(3, std::nullopt);
    alt.maps[1] = delta;
    alt.maps[2] = delta;
    try {
        correlation_check(alt, 2, tol);
    } catch (const CorrelationError &e) {
        r.violation_detected = true;
        r.offenders = e.offenders();
    }
    return r;
}

}  // namespace histkit
