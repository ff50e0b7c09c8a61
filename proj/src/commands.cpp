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

#include "histkit/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "histkit/errors.hpp"

namespace histkit {

namespace {

constexpr double kDefaultTol = 1e-10;
constexpr double kEnvarianceTol = 1e-12;

double tolerance(const ScenarioConfig &c, const RunOptions &o) {
    if (o.tol) {
        return *o.tol;
    }
    return c.tolerance.value_or(kDefaultTol);
}

std::string join_list(const std::vector<std::string> &parts, const std::string &sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? sep : "") + parts[i];
    }
    return out;
}

std::string options_key(const RunOptions &o) {
    std::ostringstream s;
    s << "tol=" << (o.tol ? format_number(*o.tol) : "-") << ";p_yes=" << (o.p_yes ? format_number(*o.p_yes) : "-")
      << ";box=" << (o.box_open ? (*o.box_open ? "open" : "closed") : "-") << ";m=";
    for (auto m : o.m) {
        s << m << ",";
    }
    s << ";amp=";
    for (auto a : o.amplitudes) {
        s << format_number(a) << ",";
    }
    s << ";approx_tol=" << format_number(o.approx_tol) << ";extent=";
    for (auto e : o.extent) {
        s << e << ",";
    }
    s << ";spacing=" << (o.spacing ? format_number(*o.spacing) : "-")
      << ";mass=" << (o.mass ? format_number(*o.mass) : "-")
      << ";epsilon=" << (o.epsilon ? format_number(*o.epsilon) : "-") << ";kind=" << o.kind
      << ";lambda=" << format_number(o.lambda) << ";slices=";
    for (auto k : o.slices) {
        s << k << ",";
    }
    return s.str();
}

LatticeSpec lattice_for(const ScenarioConfig &c, const RunOptions &o) {
    LatticeSpec l = c.lattice ? c.lattice->to_spec() : LatticeSpec{};
    if (!o.extent.empty()) {
        l.extent = o.extent;
    }
    if (o.spacing) {
        l.spacing = *o.spacing;
    }
    if (o.mass) {
        l.mass = *o.mass;
    }
    if (o.epsilon) {
        l.epsilon = *o.epsilon;
    }
    try {
        l.validate();
    } catch (const Error &e) {
        throw InputError(std::string("lattice: ") + e.what());
    }
    return l;
}

void lattice_metadata(ReportDocument &r, const LatticeSpec &l) {
    std::vector<std::string> ext;
    for (int e : l.extent) {
        ext.push_back(std::to_string(e));
    }
    r.metadata.push_back({"extent", join_list(ext, "x")});
    r.metadata.push_back({"spacing", l.spacing});
    r.metadata.push_back({"mass", l.mass});
    r.metadata.push_back({"epsilon", l.epsilon});
}

/// Centered-order rows d0, ..., re, im.
ReportTable propagator_rows(const std::string &name, const PropagatorTable &t) {
    ReportTable out;
    out.name = name;
    const int d = t.lattice.dim();
    for (int ax = 0; ax < d; ++ax) {
        out.columns.push_back("d" + std::to_string(ax));
    }
    out.columns.push_back("re");
    out.columns.push_back("im");
    std::vector<int> disp(d);
    for (int ax = 0; ax < d; ++ax) {
        disp[ax] = -t.lattice.extent[ax] / 2;
    }
    for (std::size_t row = 0; row < t.values.size(); ++row) {
        std::vector<Cell> cells;
        for (int ax = 0; ax < d; ++ax) {
            cells.emplace_back(static_cast<long long>(disp[ax]));
        }
        const Complex v = t.at(disp);
        cells.emplace_back(v.real());
        cells.emplace_back(v.imag());
        out.rows.push_back(std::move(cells));
        for (int ax = d - 1; ax >= 0; --ax) {
            if (++disp[ax] < t.lattice.extent[ax] - t.lattice.extent[ax] / 2) {
                break;
            }
            disp[ax] = -t.lattice.extent[ax] / 2;
        }
    }
    return out;
}

std::string map_text(const CorrelationMap &m) {
    std::vector<std::string> parts;
    for (const auto &[a, b] : m) {
        parts.push_back(std::to_string(a) + "->" + std::to_string(b));
    }
    return join_list(parts, " ");
}

std::string branch_name(const SubsystemModel &m, const std::vector<int> &labels) {
    std::vector<std::string> parts;
    for (std::size_t k = 1; k < labels.size(); ++k) {
        parts.push_back(m.subsystems[k - 1].outcomes.projectors.labels[labels[k]]);
    }
    return join_list(parts, ",");
}

void histories_check(ReportDocument &r, const ScenarioConfig &c, double tol) {
    const HistorySetup h = build_history_setup(c);
    const DecoherenceMatrix d = decoherence_functional(h.family, h.schedule, h.initial);
    const ConsistencyResult res = consistency_check(d, tol);
    auto name = [&](const HistoryLabel &l) {
        std::vector<std::string> parts;
        for (std::size_t k = 0; k < l.size(); ++k) {
            parts.push_back(h.family.slots[k].labels[l[k]]);
        }
        return join_list(parts, ",");
    };
    r.metadata.push_back({"dimension", static_cast<long long>(h.family.dim())});
    r.metadata.push_back({"histories", static_cast<long long>(d.labels.size())});
    ReportTable dt{"decoherence", {"history", "history_prime", "re", "im"}, {}};
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        for (std::size_t j = 0; j < d.labels.size(); ++j) {
            const Complex z = d.entries(i, j);
            dt.rows.push_back({name(d.labels[i]), name(d.labels[j]), z.real(), z.imag()});
        }
    }
    ReportTable pt{"probabilities", {"history", "probability"}, {}};
    double total = 0.0;
    for (const auto &l : d.labels) {
        const double p = res.probabilities.at(l);
        pt.rows.push_back({name(l), p});
        total += p;
    }
    r.tables.push_back(std::move(pt));
    r.tables.push_back(std::move(dt));
    r.check("decoherence functional off-diagonal", res.max_off_diagonal, tol);
    r.check("chain operators sum to the evolution", chain_sum_check(h.family, h.schedule), tol);
    r.check("probabilities sum to one", std::abs(total - 1.0), tol);
}

void branches_decompose(ReportDocument &r, const ScenarioConfig &c, double tol) {
    const SubsystemModel m = build_subsystem_model(c);
    const Vector initial = build_initial(c);
    r.metadata.push_back({"dimension", static_cast<long long>(m.dim())});
    r.metadata.push_back({"subsystems", static_cast<long long>(m.subsystems.size())});
    ReportTable lt{"links", {"link", "from", "to", "map", "inferred", "cross_term"}, {}};
    bool correlated = true;
    for (int link = 1; link <= m.links(); ++link) {
        const std::string from = m.subsystems[link - 1].name;
        const std::string to = m.subsystems[link].name;
        try {
            const CorrelationReport cr = correlation_check(m, link, tol);
            lt.rows.push_back({static_cast<long long>(link), from, to, map_text(cr.map), cr.inferred, cr.max_cross_term});
            r.check("correlation " + from + "->" + to, cr.max_cross_term, tol);
        } catch (const CorrelationError &e) {
            correlated = false;
            lt.rows.push_back({static_cast<long long>(link), from, to, join_list(e.offenders(), " "), false,
                               std::string("violated")});
            r.require("correlation " + from + "->" + to, false);
        }
    }
    r.tables.push_back(std::move(lt));
    if (!correlated) {
        return;
    }
    if (c.record) {
        auto index = [&](const std::string &n) {
            for (int k = 0; k < static_cast<int>(m.subsystems.size()); ++k) {
                if (m.subsystems[k].name == n) {
                    return k;
                }
            }
            return -1;
        };
        const int app = index(c.record->apparatus);
        const int env = index(c.record->environment);
        if (app < 1 || env < 1) {
            throw InputError("record: subsystems must be linked to a predecessor");
        }
        const RecordReport rr = environment_record_check(m, app, env, tol);
        r.check("environment record under system perturbation", rr.max_perturbed_cross_term, tol);
        r.require("environment correlation map stable", rr.map_stable);
    }
    const BranchDecomposition d = branch_decompose(m, initial, false, tol);
    ReportTable bt{"branches", {"labels", "amplitude", "probability"}, {}};
    double total = 0.0;
    for (const auto &b : d.branches) {
        bt.rows.push_back({branch_name(m, b.labels), b.amplitude, b.amplitude * b.amplitude});
        total += b.amplitude * b.amplitude;
    }
    r.tables.push_back(std::move(bt));
    r.check("branches reconstruct the evolved state", d.reconstruction_residual, tol);
    r.check("branches are orthogonal", d.orthogonality_residual, tol);
    r.check("branch probabilities sum to one", std::abs(total - 1.0), tol);
}

void ambiguity_demo(ReportDocument &r, const ScenarioConfig &c, double tol) {
    const SubsystemModel three = build_subsystem_model(c);
    if (three.subsystems.size() != 3) {
        throw InputError("subsystems: ambiguity demo needs exactly three subsystems (system, apparatus, environment)");
    }
    SubsystemModel two = three;
    two.subsystems.pop_back();
    two.maps.resize(2);
    const int k = three.subsystems[0].outcomes.size() - 1;
    Eigen::MatrixXd mixing(k, k);
    if (c.mixing.empty()) {
        // Cyclic relabeling.
        mixing.setZero();
        for (int i = 0; i < k; ++i) {
            mixing((i + 1) % k, i) = 1.0;
        }
    } else {
        if (static_cast<int>(c.mixing.size()) != k) {
            throw InputError("mixing: size must equal the number of system outcomes");
        }
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                mixing(i, j) = c.mixing[i][j];
            }
        }
    }
    const AmbiguityReport a = basis_ambiguity_demo(two, three, mixing, tol);
    ReportTable ot{"violations", {"pair"}, {}};
    for (const auto &o : a.offenders) {
        ot.rows.push_back({o});
    }
    r.tables.push_back(std::move(ot));
    r.check("two-subsystem operator identity", a.operator_identity_residual, tol);
    r.require("three-subsystem correlation violated by alternate families", a.violation_detected);
}

void propagator_table(ReportDocument &r, const ScenarioConfig &c, const RunOptions &o, double tol) {
    const LatticeSpec l = lattice_for(c, o);
    lattice_metadata(r, l);
    r.metadata.push_back({"kind", o.kind});
    if (o.kind == "feynman") {
        const PropagatorTable f = feynman_propagator(l);
        r.tables.push_back(propagator_rows("feynman", f));
        r.check("Klein-Gordon residual", kg_residual(f), tol);
    } else if (o.kind == "plus" || o.kind == "minus") {
        const SplitResult s = particle_antiparticle_split(l);
        r.tables.push_back(propagator_rows(o.kind, o.kind == "plus" ? s.plus : s.minus));
        PropagatorTable sum = s.plus;
        for (std::size_t i = 0; i < sum.values.size(); ++i) {
            sum.values[i] += s.minus.values[i];
        }
        r.check("plus and minus parts sum to the Feynman table", max_difference(sum, s.feynman), tol);
    } else if (o.kind == "kernel") {
        r.metadata.push_back({"lambda", o.lambda});
        const PropagatorTable k = path_kernel(l, o.lambda);
        r.tables.push_back(propagator_rows("kernel", k));
        r.check("kernel unitarity", kernel_unitarity_residual(l, o.lambda), tol);
    } else {
        throw InputError("unknown propagator kind '" + o.kind + "'");
    }
}

void kernel_verify(ReportDocument &r, const ScenarioConfig &c, const RunOptions &o, double tol) {
    const LatticeSpec l = lattice_for(c, o);
    lattice_metadata(r, l);
    r.metadata.push_back({"lambda", o.lambda});
    r.check("semigroup K(l1) * K(l2) = K(l1 + l2)", semigroup_residual(l, 0.6 * o.lambda, 0.4 * o.lambda), tol);
    r.check("kernel unitarity", kernel_unitarity_residual(l, o.lambda), tol);
    const PropagatorTable closed = path_kernel(l, o.lambda);
    ReportTable st{"slicing", {"slices", "max_difference"}, {}};
    double previous = INFINITY;
    bool monotone = true;
    double last = INFINITY;
    for (int n : o.slices) {
        const double diff = max_difference(kernel_path_oracle_table(l, o.lambda, n), closed);
        st.rows.push_back({static_cast<long long>(n), diff});
        monotone = monotone && diff < previous;
        previous = diff;
        last = diff;
    }
    r.tables.push_back(std::move(st));
    r.check("slicing oracle at the finest slicing", last, 1e-3);
    r.require("slicing oracle converges monotonically", monotone);
    PathKernelConfig cfg;
    cfg.lattice = l;
    const LambdaReport lr = lambda_integrate_kernel(cfg);
    r.metadata.push_back({"lambda_max", lr.lambda_max});
    r.check("lambda quadrature per mode", lr.max_mode_residual, cfg.mode_tolerance);
    r.check("lambda integral equals the Feynman table", max_difference(lr.table, feynman_propagator(l)), 1e-8);
}

void fock_verify(ReportDocument &r, const ScenarioConfig &c, const RunOptions &o, double tol) {
    const FockSection f = c.fock.value_or(FockSection{});
    const LatticeSpec l = lattice_for(c, o);
    const FockModel m = FockModel::build(f.sites, ParticleTypeSet{f.types}, f.n_max, feynman_propagator(l));
    auto vertex = [&](Complex g, bool primed) {
        return f.vertex == "conversion" ? VertexSpec::conversion(f.legs[0], f.legs[1], g, primed)
                                        : VertexSpec::scattering(f.legs[0], f.legs[1], g, primed);
    };
    r.metadata.push_back({"dimension", static_cast<long long>(m.dim())});
    r.metadata.push_back({"sites", static_cast<long long>(m.site_count())});
    r.metadata.push_back({"vertex", f.vertex});
    r.metadata.push_back({"coupling", format_complex(f.coupling)});
    HypervolumeMask all;
    for (int s = 0; s < m.site_count(); ++s) {
        all.sites.push_back(s);
    }
    const VertexSpec spec = vertex(f.coupling, f.primed);
    const PairedOperator v = restricted_vertex(m, spec, all);
    r.check("vertex is self-adjoint under the special adjoint", special_adjoint_residual(v), tol);
    const PairedOperator g = interaction_operator(v, tol);
    r.check("pseudo-unitarity", pseudo_unitarity_residual(g), std::max(tol, 1e-9));
    if (m.site_count() >= 2) {
        const CommutatorReport cr = vertex_commutator_check(m, spec, 0, 1, tol);
        r.metadata.push_back({"protected_states", static_cast<long long>(cr.protected_states)});
        r.metadata.push_back({"full_space_commutator", cr.full_residual});
        r.check("vertex commutator on the protected sector", cr.protected_residual, tol);
        std::vector<HypervolumeMask> masks;
        for (int s = 0; s < m.site_count(); ++s) {
            masks.push_back({{s}});
        }
        const FactorizationReport fr = factorization_check(m, vertex(f.factorization_coupling, f.primed), masks);
        r.metadata.push_back({"factorization_coupling", f.factorization_coupling});
        r.check("interaction factorizes over disjoint hypervolumes", fr.residual, std::max(tol, 1e-9));
        r.check("factor order is irrelevant", fr.permutation_difference, tol);
    }
    const Vector vacuum = basis_vector(m.dim(), 0);
    const double unprimed = max_abs(restricted_vertex(m, vertex(f.coupling, false), all).op * vacuum);
    const double primed = max_abs(restricted_vertex(m, vertex(f.coupling, true), all).op * vacuum);
    r.metadata.push_back({"primed_vacuum_image", primed});
    r.check("unprimed vertex annihilates the vacuum", unprimed, 0.0);
    r.require("primed vertex does not annihilate the vacuum", primed > tol);
}

void envariance_check(ReportDocument &r, const ScenarioConfig &c) {
    const EnvarianceSection e = c.envariance.value_or(EnvarianceSection{});
    const EnvarianceSpace space = EnvarianceSpace::provisioned(e.capacities);
    const CorrelatedState s = CorrelatedState::with_amplitudes(space, e.amplitudes);
    r.metadata.push_back({"dimension", static_cast<long long>(space.dim())});
    ReportTable at{"amplitudes", {"outcome", "re", "im", "magnitude"}, {}};
    for (int a = 0; a < space.outcomes(); ++a) {
        at.rows.push_back({static_cast<long long>(a), s.psi[a].real(), s.psi[a].imag(), std::abs(s.psi[a])});
    }
    r.tables.push_back(std::move(at));
    r.check("phase envariance", phase_envariance_check(s, PhaseSpec{e.sigmas, e.ells}), kEnvarianceTol);
    const int beta = e.swap[0];
    const int gamma = e.swap[1];
    const Matrix us = swap_operator(s, beta, gamma, SwapTarget::system);
    r.check("system swap is an involution", max_abs(us * us - Matrix::Identity(us.rows(), us.cols())), kEnvarianceTol);
    try {
        r.check("swap envariance", envariance_swap_check(s, beta, gamma), kEnvarianceTol);
    } catch (const PreconditionError &p) {
        r.metadata.push_back({"swap_magnitude_gap", p.residual()});
        r.check("swap envariance (equal magnitudes required)", std::abs(p.residual()), kEnvarianceTol);
    }
}

void born_demo(ReportDocument &r, const ScenarioConfig &c, const RunOptions &o, double tol) {
    RationalAmplitudeSpec spec;
    std::vector<int> capacities;
    if (!o.amplitudes.empty()) {
        const double approx_tol = o.approx_tol;
        spec = rational_approximation(o.amplitudes, approx_tol);
        double worst = 0.0;
        for (std::size_t a = 0; a < spec.m.size(); ++a) {
            worst = std::max(worst, std::abs(static_cast<double>(spec.m[a]) / spec.M - o.amplitudes[a] * o.amplitudes[a]));
        }
        r.check("rational approximation within tolerance", worst, approx_tol);
        for (long long m : spec.m) {
            if (m < 1) {
                throw InputError("amplitudes: an outcome rounds to zero weight; it cannot be fine-grained");
            }
        }
    } else {
        spec.m = !o.m.empty() ? o.m : (c.born ? c.born->m : BornSection{}.m);
        for (long long m : spec.m) {
            if (m < 1) {
                throw InputError("--m: counts must be positive");
            }
        }
        spec.M = std::accumulate(spec.m.begin(), spec.m.end(), 0LL);
        if (c.born && o.m.empty()) {
            capacities = c.born->capacities;
        }
    }
    if (capacities.empty()) {
        for (long long m : spec.m) {
            capacities.push_back(static_cast<int>(m));
        }
    }
    if (capacities.size() != spec.m.size()) {
        throw InputError("born: one capacity per outcome required");
    }
    const EnvarianceSpace space = EnvarianceSpace::provisioned(capacities);
    std::vector<Complex> psi;
    for (long long m : spec.m) {
        psi.emplace_back(std::sqrt(static_cast<double>(m) / static_cast<double>(spec.M)), 0.0);
    }
    const CorrelatedState s = CorrelatedState::with_amplitudes(space, psi);
    const FineGrainedModel f = fine_grain(s, spec);
    const std::vector<Rational> p = born_probabilities(f);
    r.metadata.push_back({"M", static_cast<long long>(spec.M)});
    ReportTable pt{"probabilities", {"outcome", "m", "p", "p_value", "amplitude_squared"}, {}};
    bool exact = true;
    double gap = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        pt.rows.push_back({static_cast<long long>(a), static_cast<long long>(spec.m[a]),
                           std::to_string(p[a].num) + "/" + std::to_string(p[a].den), p[a].value(),
                           std::norm(s.psi[a])});
        exact = exact && p[a].num * spec.M == spec.m[a] * p[a].den;
        gap = std::max(gap, std::abs(p[a].value() - std::norm(s.psi[a])));
    }
    r.tables.push_back(std::move(pt));
    r.require("counted probabilities equal m/M exactly", exact);
    r.check("counted probabilities equal squared amplitudes", gap, kEnvarianceTol);
    double refine = 0.0;
    double record = 0.0;
    for (int a = 0; a < space.outcomes(); ++a) {
        Matrix sum = Matrix::Zero(space.env_dim, space.env_dim);
        Vector rebuilt = Vector::Zero(space.env_dim);
        for (int b = 0; b < static_cast<int>(f.fine[a].size()); ++b) {
            sum += f.env_fine_projector(a, b);
            rebuilt += f.fine[a][b] / std::sqrt(static_cast<double>(f.fine[a].size()));
        }
        refine = std::max(refine, max_abs(sum - space.env_sector_projector(a)));
        record = std::max(record, max_abs(rebuilt - s.records[a]));
    }
    r.check("fine projectors sum to the coarse projector", refine, kEnvarianceTol);
    r.check("record equals the equal-weight fine sum", record, kEnvarianceTol);
    const AncillaState anc = attach_ancilla(f, static_cast<int>(spec.M));
    double coeff = 0.0;
    double ortho = 0.0;
    const double target = 1.0 / std::sqrt(static_cast<double>(spec.M));
    for (std::size_t i = 0; i < anc.branches.size(); ++i) {
        coeff = std::max(coeff, std::abs(anc.branches[i].coefficient - target));
        for (std::size_t j = 0; j < anc.branches.size(); ++j) {
            const double want = i == j ? 1.0 : 0.0;
            ortho = std::max(ortho, std::abs(anc.branches[i].state.dot(anc.branches[j].state) - want));
        }
    }
    r.check("ancilla branch coefficients equal 1/sqrt(M)", coeff, kEnvarianceTol);
    r.check("fine ancilla states are orthonormal", ortho, std::max(tol, 1e-10));
}

void cat_run(ReportDocument &r, const ScenarioConfig &c, const RunOptions &o) {
    CatSection s = c.cat.value_or(CatSection{});
    if (o.p_yes) {
        if (*o.p_yes < 0.0 || *o.p_yes > 1.0) {
            throw InputError("--p-yes must lie in [0, 1]");
        }
        s.decay_amplitude = Complex(std::sqrt(*o.p_yes), 0.0);
    }
    if (o.box_open) {
        s.box_opened = *o.box_open;
    }
    const CatConfig cfg{s.decay_amplitude, s.box_opened, s.dims};
    CatConfig other = cfg;
    other.box_opened = !cfg.box_opened;
    const CatModel m = build_cat(cfg);
    const CatModel partner = build_cat(other);
    r.metadata.push_back({"box", std::string(cfg.box_opened ? "open" : "closed")});
    r.metadata.push_back({"p_yes", std::norm(cfg.decay_amplitude)});
    r.check("box commutes with the interior", m.commutator_residual, kEnvarianceTol);
    const BranchDecomposition interior = interior_branches(m);
    const BranchDecomposition full = full_branches(m);
    ReportTable bt{"branches", {"R", "D", "C", "B", "E", "amplitude"}, {}};
    double cat_eigen = 0.0;
    bool env_ok = true;
    const std::vector<int> dims = m.dims();
    for (const auto &b : full.branches) {
        std::vector<Cell> row;
        for (int k = 0; k < 5; ++k) {
            row.push_back(cat_outcome_name(k, b.labels[k + 1]));
        }
        row.push_back(b.amplitude);
        bt.rows.push_back(std::move(row));
        const Matrix &alive = m.model.subsystems[kCatC].outcomes[cat_label::alive];
        const Matrix &dead = m.model.subsystems[kCatC].outcomes[cat_label::dead];
        cat_eigen = std::max(cat_eigen, std::min(max_abs(alive * b.state - b.state), max_abs(dead * b.state - b.state)));
        const int e = b.labels[kCatE + 1];
        const int cat = b.labels[kCatC + 1];
        if (cfg.box_opened) {
            env_ok = env_ok && e == (cat == cat_label::alive ? cat_label::env_alive : cat_label::env_dead);
        } else {
            env_ok = env_ok && e == cat_label::env_closed;
        }
    }
    r.tables.push_back(std::move(bt));
    r.metadata.push_back({"branches", static_cast<long long>(full.branches.size())});
    r.require("full branch count equals interior branch count", full.branches.size() == interior.branches.size());
    double gap = 0.0;
    for (std::size_t i = 0; i < std::min(full.branches.size(), interior.branches.size()); ++i) {
        gap = std::max(gap, std::abs(full.branches[i].amplitude - interior.branches[i].amplitude));
    }
    r.check("full amplitudes equal interior amplitudes", gap, kEnvarianceTol);
    r.check("every branch is a cat-projector eigenstate", cat_eigen, kEnvarianceTol);
    r.require(cfg.box_opened ? "environment records the cat" : "environment reads closed on every branch", env_ok);
    const BoxReport box = cfg.box_opened ? box_irrelevance_check(m, partner) : box_irrelevance_check(partner, m);
    r.check("opening the box leaves interior amplitudes unchanged", box.interior_amplitude_residual, kEnvarianceTol);
    r.check("closed-box environment identical across branches", box.closed_state_residual, kEnvarianceTol);
}

}  // namespace

const std::vector<std::string> &command_names() {
    static const std::vector<std::string> names{
        "histories check", "propagator table", "kernel verify",   "fock verify", "branches decompose",
        "ambiguity demo",  "envariance check", "born demo",       "cat run",
    };
    return names;
}

ReportDocument run(const std::string &command, const ScenarioConfig &config, const RunOptions &options) {
    ReportDocument r;
    r.command = command;
    r.tolerance = tolerance(config, options);
    r.config_hash = fnv1a_hex(command + "\n" + emit_scenario(config) + options_key(options));
    if (!config.name.empty()) {
        r.metadata.push_back({"scenario", config.name});
    }
    const double tol = r.tolerance;
    if (command == "histories check") {
        histories_check(r, config, tol);
    } else if (command == "branches decompose") {
        branches_decompose(r, config, tol);
    } else if (command == "ambiguity demo") {
        ambiguity_demo(r, config, tol);
    } else if (command == "propagator table") {
        propagator_table(r, config, options, tol);
    } else if (command == "kernel verify") {
        kernel_verify(r, config, options, tol);
    } else if (command == "fock verify") {
        fock_verify(r, config, options, tol);
    } else if (command == "envariance check") {
        envariance_check(r, config);
    } else if (command == "born demo") {
        born_demo(r, config, options, tol);
    } else if (command == "cat run") {
        cat_run(r, config, options);
    } else {
        throw InputError("unknown command '" + command + "'");
    }
    return r;
}

int exit_code(const ReportDocument &r) {
    return r.pass() ? 0 : 1;
}

int exit_code(const std::exception &e) {
    if (dynamic_cast<const ConvergenceError *>(&e) != nullptr || dynamic_cast<const InfraredError *>(&e) != nullptr) {
        return 3;
    }
    if (dynamic_cast<const PreconditionError *>(&e) != nullptr || dynamic_cast<const CorrelationError *>(&e) != nullptr) {
        return 1;
    }
    return 2;
}

}  // namespace histkit
