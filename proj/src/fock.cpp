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

#include "histkit/fock.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "histkit/errors.hpp"

namespace histkit {

int ParticleTypeSet::reverse_of(int species) const {
    return species < count() ? species + count() : species - count();
}

int ParticleTypeSet::species(const std::string &name) const {
    bool rev = !name.empty() && name.back() == '~';
    std::string base = rev ? name.substr(0, name.size() - 1) : name;
    for (int i = 0; i < count(); ++i) {
        if (types[i] == base) {
            return rev ? i + count() : i;
        }
    }
    throw TypeError("unknown particle type '" + name + "'");
}

std::string ParticleTypeSet::name(int species) const {
    return species < count() ? types[species] : types[species - count()] + "~";
}

PairedOperator PairedOperator::zero(int dim) {
    return {Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
}

PairedOperator PairedOperator::identity(int dim) {
    return {Matrix::Identity(dim, dim), Matrix::Identity(dim, dim)};
}

PairedOperator operator*(const PairedOperator &a, const PairedOperator &b) {
    return {a.op * b.op, b.adj * a.adj};
}

PairedOperator operator+(const PairedOperator &a, const PairedOperator &b) {
    return {a.op + b.op, a.adj + b.adj};
}

PairedOperator operator-(const PairedOperator &a, const PairedOperator &b) {
    return {a.op - b.op, a.adj - b.adj};
}

PairedOperator operator*(Complex c, const PairedOperator &a) {
    return {c * a.op, std::conj(c) * a.adj};
}

long long truncated_dimension(int modes, int n_max) {
    // C(modes + n_max, n_max), built incrementally to stay exact.
    long long c = 1;
    for (int k = 1; k <= n_max; ++k) {
        c = c * (modes + k) / k;
    }
    return c;
}

namespace {

void enumerate(int modes, int remaining, Occupation &cur, int pos, std::vector<Occupation> &out) {
    if (pos == modes) {
        out.push_back(cur);
        return;
    }
    for (int n = 0; n <= remaining; ++n) {
        cur[pos] = n;
        enumerate(modes, remaining - n, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

}  // namespace

int FockModel::index_of(const Occupation &occ) const {
    auto it = std::lower_bound(basis.begin(), basis.end(), occ);
    if (it == basis.end() || *it != occ) {
        return -1;
    }
    return static_cast<int>(it - basis.begin());
}

int FockModel::total(int basis_index) const {
    int t = 0;
    for (int n : basis[basis_index]) {
        t += n;
    }
    return t;
}

Matrix FockModel::lowering(int mode) const {
    Matrix a = Matrix::Zero(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
        const int n = basis[j][mode];
        if (n == 0) {
            continue;
        }
        Occupation occ = basis[j];
        occ[mode] -= 1;
        a(index_of(occ), j) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

Matrix FockModel::raising(int mode) const {
    Matrix a = Matrix::Zero(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
        Occupation occ = basis[j];
        occ[mode] += 1;
        const int i = index_of(occ);
        if (i >= 0) {
            a(i, j) = std::sqrt(static_cast<double>(occ[mode]));
        }
    }
    return a;
}

FockModel FockModel::build(
    const std::vector<std::vector<int>> &sites,
    const ParticleTypeSet &types,
    int n_max,
    const PropagatorTable &feynman) {
    if (sites.empty()) {
        throw DomainError("Fock model needs at least one site");
    }
    if (types.count() == 0) {
        throw TypeError("Fock model needs at least one particle type");
    }
    if (n_max < 0) {
        throw DomainError("n_max must be non-negative");
    }
    std::set<std::string> names(types.types.begin(), types.types.end());
    if (names.size() != types.types.size()) {
        throw TypeError("duplicate particle type name");
    }
    std::set<std::vector<int>> unique_sites(sites.begin(), sites.end());
    if (unique_sites.size() != sites.size()) {
        throw DomainError("duplicate Fock model site");
    }
    FockModel m;
    m.sites = sites;
    m.typeset = types;
    m.n_max = n_max;
    m.propagator = feynman;
    const long long d = truncated_dimension(m.mode_count(), n_max);
    if (d > static_cast<long long>(kDefaultMaxDim)) {
        throw CapacityError("truncated Fock dimension " + std::to_string(d) + " exceeds maximum");
    }
    Occupation cur(m.mode_count(), 0);
    enumerate(m.mode_count(), n_max, cur, 0, m.basis);
    std::sort(m.basis.begin(), m.basis.end());
    const int s = m.site_count();
    m.smearing = Matrix::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            std::vector<int> disp(sites[i].size());
            for (std::size_t ax = 0; ax < disp.size(); ++ax) {
                disp[ax] = sites[i][ax] - sites[j][ax];
            }
            m.smearing(i, j) = feynman.at(disp);
        }
    }
    return m;
}

Vector occupation_state(const FockModel &m, const std::map<std::pair<int, int>, int> &counts) {
    Occupation occ(m.mode_count(), 0);
    for (const auto &[key, n] : counts) {
        const auto [site, species] = key;
        if (site < 0 || site >= m.site_count() || species < 0 || species >= m.typeset.species_count()) {
            throw LabelError("occupation refers to an unknown site or species");
        }
        occ[m.mode(site, species)] = n;
    }
    const int i = m.index_of(occ);
    if (i < 0) {
        throw CapacityError("occupation exceeds the truncation n_max");
    }
    return basis_vector(m.dim(), i);
}

Vector physical_state(const FockModel &m, const std::map<std::pair<int, int>, int> &counts) {
    for (const auto &[key, n] : counts) {
        if (n > 0 && m.typeset.is_reverse(key.second)) {
            throw TypeError("physical states cannot contain reverse particle types");
        }
    }
    return occupation_state(m, counts);
}

namespace {

// ψ(x, s) = Σ_y D_{xy} a_{y,s}
Matrix smeared(const FockModel &m, int site, int species) {
    Matrix out = Matrix::Zero(m.dim(), m.dim());
    for (int y = 0; y < m.site_count(); ++y) {
        const Complex d = m.smearing(site, y);
        if (d != Complex(0.0, 0.0)) {
            out += d * m.lowering(m.mode(y, species));
        }
    }
    return out;
}

Matrix raw_field(const FockModel &m, FieldKind kind, int site, int species) {
    switch (kind) {
        case FieldKind::psi0:
            return m.lowering(m.mode(site, species));
        case FieldKind::psi0_dagger:
            return m.raising(m.mode(site, species));
        case FieldKind::psi:
            return smeared(m, site, species);
        case FieldKind::psi_dagger:
            return smeared(m, site, species).adjoint();
    }
    return {};
}

FieldKind special_adjoint_kind(FieldKind k) {
    switch (k) {
        case FieldKind::psi0:
            return FieldKind::psi_dagger;
        case FieldKind::psi0_dagger:
            return FieldKind::psi;
        case FieldKind::psi:
            return FieldKind::psi0_dagger;
        case FieldKind::psi_dagger:
            return FieldKind::psi0;
    }
    return k;
}

bool is_creation(FieldKind k) {
    return k == FieldKind::psi0_dagger || k == FieldKind::psi_dagger;
}

struct FieldRef {
    FieldKind kind;
    int species;
};

// One leg expands into one or two fields.
std::vector<FieldRef> expand_leg(const FockModel &m, const VertexLeg &leg, bool primed) {
    const int s = m.typeset.species(leg.type);
    const int rev = m.typeset.reverse_of(s);
    if (leg.kind == LegKind::creation) {
        if (!primed) {
            return {{FieldKind::psi0_dagger, s}};
        }
        return {{FieldKind::psi0_dagger, s}, {FieldKind::psi, rev}};
    }
    if (!primed) {
        return {{FieldKind::psi, s}};
    }
    return {{FieldKind::psi, s}, {FieldKind::psi0_dagger, rev}};
}

}  // namespace

PairedOperator field(const FockModel &m, FieldKind kind, int site, int species) {
    if (site < 0 || site >= m.site_count() || species < 0 || species >= m.typeset.species_count()) {
        throw LabelError("field refers to an unknown site or species");
    }
    return {raw_field(m, kind, site, species), raw_field(m, special_adjoint_kind(kind), site, species)};
}

PairedOperator primed_field(const FockModel &m, int site, int type, bool dagger) {
    const int rev = m.typeset.reverse_of(type);
    if (dagger) {
        return field(m, FieldKind::psi0_dagger, site, type) + field(m, FieldKind::psi, site, rev);
    }
    return field(m, FieldKind::psi, site, type) + field(m, FieldKind::psi0_dagger, site, rev);
}

int VertexSpec::max_creations() const {
    int r = 0;
    for (const auto &t : terms) {
        int c = 0;
        for (const auto &leg : t.legs) {
            if (primed || leg.kind == LegKind::creation) {
                ++c;
            }
        }
        r = std::max(r, c);
    }
    return r;
}

VertexSpec VertexSpec::conversion(const std::string &a, const std::string &b, Complex g, bool primed) {
    VertexSpec s;
    s.primed = primed;
    s.terms.push_back({g, {{b, LegKind::creation}, {a, LegKind::annihilation}}});
    s.terms.push_back({g, {{a, LegKind::creation}, {b, LegKind::annihilation}}});
    return s;
}

VertexSpec VertexSpec::scattering(const std::string &a, const std::string &b, Complex g, bool primed) {
    VertexSpec s;
    s.primed = primed;
    s.terms.push_back(
        {g, {{a, LegKind::creation}, {b, LegKind::creation}, {a, LegKind::annihilation}, {b, LegKind::annihilation}}});
    return s;
}

PairedOperator vertex_operator(const FockModel &m, const VertexSpec &spec, int site) {
    if (site < 0 || site >= m.site_count()) {
        throw LabelError("vertex site " + std::to_string(site) + " not in model");
    }
    PairedOperator v = PairedOperator::zero(m.dim());
    for (const auto &term : spec.terms) {
        std::vector<std::vector<FieldRef>> legs;
        for (const auto &leg : term.legs) {
            legs.push_back(expand_leg(m, leg, spec.primed));
        }
        if (term.coupling == Complex(0.0, 0.0)) {
            continue;
        }
        // Every choice of one field per leg, normal ordered: creation class left, stable otherwise.
        std::vector<int> choice(legs.size(), 0);
        while (true) {
            std::vector<FieldRef> product;
            for (std::size_t i = 0; i < legs.size(); ++i) {
                product.push_back(legs[i][choice[i]]);
            }
            std::stable_partition(product.begin(), product.end(), [](const FieldRef &f) { return is_creation(f.kind); });
            PairedOperator p = PairedOperator::identity(m.dim());
            for (const auto &f : product) {
                p = p * field(m, f.kind, site, f.species);
            }
            v = v + term.coupling * p;
            std::size_t k = 0;
            for (; k < legs.size(); ++k) {
                if (++choice[k] < static_cast<int>(legs[k].size())) {
                    break;
                }
                choice[k] = 0;
            }
            if (k == legs.size()) {
                break;
            }
        }
    }
    return v;
}

PairedOperator restricted_vertex(const FockModel &m, const VertexSpec &spec, const HypervolumeMask &mask) {
    if (mask.sites.empty()) {
        throw DomainError("empty hypervolume mask");
    }
    PairedOperator v = PairedOperator::zero(m.dim());
    for (int s : mask.sites) {
        v = v + vertex_operator(m, spec, s);
    }
    return v;
}

double special_adjoint_residual(const PairedOperator &v) {
    return max_abs(v.adj - v.op);
}

PairedOperator interaction_operator(const PairedOperator &v, double tol) {
    const double r = special_adjoint_residual(v);
    if (r > tol) {
        throw PreconditionError("vertex operator is not special-self-adjoint", r);
    }
    const Complex i{0.0, 1.0};
    return {operator_exponential(-i * v.op), operator_exponential(i * v.adj)};
}

double pseudo_unitarity_residual(const PairedOperator &g) {
    const Matrix id = Matrix::Identity(g.op.rows(), g.op.cols());
    return std::max(max_abs(g.adj * g.op - id), max_abs(g.op * g.adj - id));
}

std::vector<int> protected_sector(const FockModel &m, const VertexSpec &spec) {
    const int r = spec.max_creations();
    std::vector<int> out;
    for (int j = 0; j < m.dim(); ++j) {
        if (m.total(j) + r <= m.n_max) {
            out.push_back(j);
        }
    }
    return out;
}

double sector_norm(const Matrix &x, const std::vector<int> &columns) {
    double worst = 0.0;
    for (int c : columns) {
        worst = std::max(worst, max_abs(x.col(c)));
    }
    return worst;
}

CommutatorReport vertex_commutator_check(
    const FockModel &m, const VertexSpec &spec, int site1, int site2, double tol) {
    if (site1 == site2) {
        throw DomainError("vertex commutator is only claimed at distinct points");
    }
    const PairedOperator v1 = vertex_operator(m, spec, site1);
    const PairedOperator v2 = vertex_operator(m, spec, site2);
    const Matrix c = v1.op * v2.op - v2.op * v1.op;
    const auto sector = protected_sector(m, spec);
    CommutatorReport r;
    r.protected_states = static_cast<int>(sector.size());
    r.protected_residual = sector_norm(c, sector);
    r.full_residual = max_abs(c);
    r.truncation_artifact = r.full_residual > r.protected_residual + tol;
    return r;
}

FactorizationReport factorization_check(
    const FockModel &m, const VertexSpec &spec, const std::vector<HypervolumeMask> &masks) {
    if (masks.empty()) {
        throw DomainError("factorization needs at least one mask");
    }
    std::set<int> seen;
    HypervolumeMask all;
    for (const auto &mask : masks) {
        if (mask.sites.empty()) {
            throw DomainError("empty hypervolume mask");
        }
        for (int s : mask.sites) {
            if (!seen.insert(s).second) {
                throw DisjointnessError("hypervolume masks overlap at site " + std::to_string(s));
            }
            all.sites.push_back(s);
        }
    }
    const auto sector = protected_sector(m, spec);
    FactorizationReport r;
    r.protected_states = static_cast<int>(sector.size());
    std::vector<Matrix> factors;
    for (const auto &mask : masks) {
        factors.push_back(interaction_operator(restricted_vertex(m, spec, mask)).op);
    }
    const Matrix whole = interaction_operator(restricted_vertex(m, spec, all)).op;
    auto product = [&](const std::vector<int> &order) {
        Matrix p = Matrix::Identity(m.dim(), m.dim());
        for (int i : order) {
            p = p * factors[i];
        }
        return p;
    };
    std::vector<int> order(masks.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<int>(i);
    }
    const Matrix first = product(order);
    r.residual = sector_norm(whole - first, sector);
    // Every order for up to 5 factors, otherwise only the reversed order.
    if (masks.size() <= 5) {
        while (std::next_permutation(order.begin(), order.end())) {
            r.permutation_difference = std::max(r.permutation_difference, sector_norm(product(order) - first, sector));
        }
    } else {
        std::reverse(order.begin(), order.end());
        r.permutation_difference = sector_norm(product(order) - first, sector);
    }
    return r;
}

ResolutionReport identity_resolution_check(const FockModel &m, const std::vector<int> &excluded) {
    std::set<int> skip(excluded.begin(), excluded.end());
    Matrix sum = Matrix::Zero(m.dim(), m.dim());
    for (int j = 0; j < m.dim(); ++j) {
        if (skip.count(j) == 0) {
            const Vector e = basis_vector(m.dim(), j);
            sum += e * e.adjoint();
        }
    }
    ResolutionReport r;
    r.dim = m.dim();
    r.residual = max_abs(sum - Matrix::Identity(m.dim(), m.dim()));
    Eigen::FullPivLU<Matrix> lu(sum);
    r.rank = static_cast<int>(lu.rank());
    return r;
}

}  // namespace histkit
