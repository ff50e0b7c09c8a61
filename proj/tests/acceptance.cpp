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

// Acceptance run: one PASS/FAIL line per criterion with its measured residuals and runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "histkit/branches.hpp"
#include "histkit/cat.hpp"
#include "histkit/envariance.hpp"
#include "histkit/errors.hpp"
#include "histkit/fock.hpp"
#include "histkit/histories.hpp"
#include "histkit/propagators.hpp"

namespace histkit {
namespace {

namespace fs = std::filesystem;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
    void value(const std::string &name, double x) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %s=%.3g", name.c_str(), x);
        detail << buf;
    }
};

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<void(Outcome &)> body;
};

Matrix controlled_flip(int dim_factors, int control, int target) {
    std::vector<int> dims(dim_factors, 2);
    const int n = 1 << dim_factors;
    Matrix u = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int cbit = (i >> (dim_factors - 1 - control)) & 1;
        const int j = cbit ? i ^ (1 << (dim_factors - 1 - target)) : i;
        u(j, i) = 1.0;
    }
    return u;
}

Matrix z_projector(int factors, int which, int level) {
    return embed(rank_one_projector(basis_vector(2, level)), std::vector<int>(factors, 2), which);
}

// 1. Two-subsystem measurement model.
void histories_consistency(Outcome &o) {
    double worst_off = 0, worst_p = 0;
    for (auto [a, b] : std::vector<std::pair<double, double>>{{std::sqrt(0.5), std::sqrt(0.5)}, {0.6, 0.8}}) {
        Vector sys(2);
        sys << a, b;
        const Vector phi = tensor_product(sys, basis_vector(2, 0));
        const auto s = EvolutionSchedule::uniform({controlled_flip(2, 0, 1)});
        HistoryFamily f;
        f.slots = {ProjectorFamily::from_index_sets(4, {{0, 2}, {1, 3}})};
        const auto d = decoherence_functional(f, s, phi);
        const auto c = consistency_check(d, 1e-10);
        worst_off = std::max(worst_off, c.max_off_diagonal);
        o.expect(c.consistent, "decoherence functional diagonal");
        // Brute force: sum amplitudes over basis paths |i⟩ → G → P.
        for (std::size_t l = 0; l < d.labels.size(); ++l) {
            double p = 0;
            for (int out = 0; out < 4; ++out) {
                Complex amp = 0;
                for (int mid = 0; mid < 4; ++mid) {
                    for (int in = 0; in < 4; ++in) {
                        amp += f.slots[0].members[d.labels[l][0]](out, mid) * s.steps[0](mid, in) * phi(in);
                    }
                }
                p += std::norm(amp);
            }
            worst_p = std::max(worst_p, std::abs(c.probabilities.at(d.labels[l]) - p));
            worst_p = std::max(worst_p, std::abs(p - (d.labels[l][0] == 0 ? a * a : b * b)));
        }
    }
    o.value("max_off_diagonal", worst_off);
    o.value("probability_error", worst_p);
    o.expect(worst_off <= 1e-10, "off-diagonal <= 1e-10");
    o.expect(worst_p <= 1e-12, "probabilities match brute force to 1e-12");
}

// 2. Chain-sum identity on random families.
void chain_sum(Outcome &o) {
    std::mt19937_64 rng(2026);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 2 + static_cast<int>(rng() % 7);
        const int slots = 1 + static_cast<int>(rng() % 3);
        HistoryFamily f;
        std::vector<Matrix> steps;
        for (int k = 0; k < slots; ++k) {
            steps.push_back(random_unitary(dim, rng()));
            const Matrix u = random_unitary(dim, rng());
            std::vector<int> perm(dim);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            const int parts = 1 + static_cast<int>(rng() % dim);
            std::vector<std::vector<int>> sets(parts);
            for (int i = 0; i < dim; ++i) {
                sets[i < parts ? i : rng() % parts].push_back(perm[i]);
            }
            ProjectorFamily p = ProjectorFamily::from_index_sets(dim, sets);
            for (auto &m : p.members) {
                m = u * m * u.adjoint();
            }
            f.slots.push_back(p);
        }
        worst = std::max(worst, chain_sum_check(f, EvolutionSchedule::uniform(steps)));
    }
    o.value("max_residual", worst);
    o.expect(worst <= 1e-10, "chain sum <= 1e-10");
}

// 3. Propagator identities on the 64x64 lattice.
void propagator_identities(Outcome &o) {
    LatticeSpec l;
    const double kg = kg_residual(feynman_propagator(l));
    o.value("kg", kg);
    o.expect(kg <= 1e-10, "KG residual <= 1e-10");
    const ThetaReport coarse = theta_decomposition_check(l, 5e-4);
    LatticeSpec fine = l;
    fine.epsilon /= 10;
    const ThetaReport finer = theta_decomposition_check(fine, 5e-4);
    o.value("theta", coarse.max_residual);
    o.value("theta_eps/10", finer.max_residual);
    o.expect(coarse.pass, "theta residual <= 5e-4");
    o.expect(finer.max_residual < coarse.max_residual, "theta residual decreases under eps/10");
    PathKernelConfig c;
    c.lattice = l;
    const LambdaReport lr = lambda_integrate_kernel(c);
    const double diff = max_difference(lr.table, feynman_propagator(l));
    o.value("lambda_table", diff);
    o.expect(diff <= 1e-8, "lambda table matches Feynman table to 1e-8");
}

// 4. Path kernel.
void kernel(Outcome &o) {
    LatticeSpec l;
    double semi = 0, unit = 0;
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.3, 0.2}, {0.05, 1.7}, {2.5, 0.5}}) {
        semi = std::max(semi, semigroup_residual(l, a, b));
        unit = std::max(unit, kernel_unitarity_residual(l, a + b));
    }
    o.value("semigroup", semi);
    o.value("unitarity", unit);
    o.expect(semi <= 1e-10 && unit <= 1e-10, "semigroup and unitarity <= 1e-10");
    const PropagatorTable exact = path_kernel(l, 0.5);
    double prev = INFINITY;
    bool monotone = true;
    for (int s : {8, 16, 32}) {
        const double e = max_difference(kernel_path_oracle_table(l, 0.5, s), exact);
        o.value("slices" + std::to_string(s), e);
        monotone = monotone && e < prev;
        prev = e;
    }
    o.expect(monotone, "monotone slicing convergence");
    o.expect(prev <= 1e-3, "32-slice agreement <= 1e-3");
}

// 5. Fock model: 2 sites, 2 types, n_max = 2.
void fock(Outcome &o) {
    LatticeSpec l;
    const FockModel m = FockModel::build({{0, 0}, {1, 0}}, ParticleTypeSet{{"a", "b"}}, 2, feynman_propagator(l));
    const HypervolumeMask all{{0, 1}};
    const auto spec = VertexSpec::conversion("a", "b", 0.3);
    const double pu = pseudo_unitarity_residual(interaction_operator(restricted_vertex(m, spec, all)));
    const CommutatorReport cr = vertex_commutator_check(m, spec, 0, 1);
    const FactorizationReport fr = factorization_check(m, VertexSpec::conversion("a", "b", 1e-4), {{{0}}, {{1}}});
    const Vector vac = basis_vector(m.dim(), 0);
    const double unprimed = max_abs(Vector(restricted_vertex(m, VertexSpec::conversion("a", "b", 0.3, false), all).op * vac));
    const double unprimed_scatter =
        max_abs(Vector(restricted_vertex(m, VertexSpec::scattering("a", "b", 0.3, false), all).op * vac));
    const double primed = max_abs(Vector(restricted_vertex(m, spec, all).op * vac));
    o.value("pseudo_unitarity", pu);
    o.value("commutator", cr.protected_residual);
    o.value("factorization", fr.residual);
    o.value("permutation", fr.permutation_difference);
    o.value("primed_vacuum", primed);
    o.expect(pu <= 1e-9, "pseudo-unitarity <= 1e-9");
    o.expect(cr.protected_states > 0 && cr.protected_residual <= 1e-10, "protected commutator <= 1e-10");
    o.expect(fr.residual <= 1e-9, "factorization <= 1e-9");
    o.expect(fr.permutation_difference <= 1e-10, "order permutation <= 1e-10");
    o.expect(unprimed == 0.0 && unprimed_scatter == 0.0, "unprimed vertex annihilates vacuum exactly");
    o.expect(primed > 1e-10, "primed vertex does not annihilate vacuum");
}

OutcomeFamily z_family(int factors, int which) {
    ProjectorFamily f;
    f.dim = 1 << factors;
    for (int k = 0; k < 2; ++k) {
        f.members.push_back(z_projector(factors, which, k));
        f.labels.push_back(std::to_string(k));
    }
    return OutcomeFamily::guaranteed(f);
}

SubsystemModel qubit_chain(int factors) {
    SubsystemModel m;
    m.factor_dims.assign(factors, 2);
    const int n = 1 << factors;
    Matrix ready = Matrix::Identity(n, n);
    for (int f = 1; f < factors; ++f) {
        ready = ready * z_projector(factors, f, 0);
    }
    m.initial = OutcomeFamily::in_state(ready);
    m.subsystems.push_back({"S", Matrix::Identity(n, n), z_family(factors, 0)});
    for (int f = 1; f < factors; ++f) {
        m.subsystems.push_back({f == 1 ? "A" : "E", controlled_flip(factors, f - 1, f), z_family(factors, f)});
    }
    return m;
}

// 6. Einselection on the 3-qubit chain.
void einselection(Outcome &o) {
    const SubsystemModel three = qubit_chain(3);
    const RecordReport rr = environment_record_check(three, 1, 2);
    const double cross = std::max({rr.apparatus.max_cross_term, rr.environment.max_cross_term, rr.max_perturbed_cross_term});
    Vector sys(2);
    sys << 0.6, 0.8;
    const Vector initial = tensor_product(std::vector<Vector>{sys, basis_vector(2, 0), basis_vector(2, 0)});
    const BranchDecomposition d = branch_decompose(three, initial);
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    const AmbiguityReport ar = basis_ambiguity_demo(qubit_chain(2), three, swap);
    o.value("cross_terms", cross);
    o.value("reconstruction", d.reconstruction_residual);
    o.value("ambiguity_identity", ar.operator_identity_residual);
    o.expect(cross <= 1e-12, "cross terms <= 1e-12");
    o.expect(rr.map_stable, "environment record independent of the system");
    o.expect(d.branches.size() == 2 && d.reconstruction_residual <= 1e-10, "reconstruction <= 1e-10");
    o.expect(ar.operator_identity_residual == 0.0, "two-subsystem operator identity exact");
    o.expect(ar.violation_detected, "three-subsystem violation detected");
}

// 7. Envariance.
void envariance(Outcome &o) {
    const auto space = EnvarianceSpace::provisioned({4, 4});
    const double h = std::sqrt(0.5);
    const CorrelatedState s = CorrelatedState::with_amplitudes(space, {h, Complex(0.0, h)});
    const double phase = phase_envariance_check(s, PhaseSpec{{0.3, -1.1}, {3, 0}});
    const double swap = envariance_swap_check(s, 0, 1);
    bool rejected = false;
    try {
        envariance_swap_check(CorrelatedState::with_amplitudes(space, {0.6, 0.8}), 0, 1);
    } catch (const PreconditionError &) {
        rejected = true;
    }
    o.value("phase", phase);
    o.value("swap", swap);
    o.expect(phase <= 1e-12 && swap <= 1e-12, "phase and swap residuals <= 1e-12");
    o.expect(rejected, "unequal-magnitude swap rejected");
}

// 8. Born rule by fine-graining.
void born(Outcome &o) {
    long long specs = 0;
    double worst_float = 0, worst_coeff = 0;
    bool exact = true;
    auto check = [&](const std::vector<long long> &m, long long M, bool with_ancilla) {
        std::vector<int> cap(m.begin(), m.end());
        std::vector<Complex> psi;
        for (std::size_t a = 0; a < m.size(); ++a) {
            psi.push_back(std::polar(std::sqrt(static_cast<double>(m[a]) / M), 0.7 * static_cast<double>(a)));
        }
        const auto s = CorrelatedState::with_amplitudes(EnvarianceSpace::provisioned(cap), psi);
        const auto f = fine_grain(s, {m, M});
        const auto p = born_probabilities(f);
        for (std::size_t a = 0; a < m.size(); ++a) {
            exact = exact && static_cast<long long>(f.fine[a].size()) == m[a] && p[a].num * M == m[a] * p[a].den;
            worst_float = std::max(worst_float, std::abs(p[a].value() - std::norm(s.psi[a])));
        }
        if (with_ancilla) {
            const auto anc = attach_ancilla(f, static_cast<int>(M));
            for (const auto &b : anc.branches) {
                worst_coeff = std::max(worst_coeff, std::abs(b.coefficient - 1.0 / std::sqrt(static_cast<double>(M))));
            }
        }
        ++specs;
    };
    for (long long M = 1; M <= 100; ++M) {
        check({M}, M, M <= 10);
        for (long long m1 = 1; m1 < M; ++m1) {
            check({m1, M - m1}, M, M <= 20);
        }
    }
    for (long long M = 3; M <= 20; ++M) {
        for (long long m1 = 1; m1 < M - 1; ++m1) {
            for (long long m2 = 1; m1 + m2 < M; ++m2) {
                check({m1, m2, M - m1 - m2}, M, M <= 8);
            }
        }
    }
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    double worst_approx = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 4);
        std::vector<double> amps(k);
        double norm = 0;
        for (auto &a : amps) {
            a = u(rng);
            norm += a * a;
        }
        for (auto &a : amps) {
            a /= std::sqrt(norm);
        }
        const auto r = rational_approximation(amps, 1e-3);
        for (int a = 0; a < k; ++a) {
            worst_approx = std::max(worst_approx, std::abs(static_cast<double>(r.m[a]) / r.M - amps[a] * amps[a]));
        }
    }
    o.value("specs", static_cast<double>(specs));
    o.value("float_error", worst_float);
    o.value("ancilla_coefficient_error", worst_coeff);
    o.value("approximation_error", worst_approx);
    o.expect(exact, "counted probabilities equal m/M exactly");
    o.expect(worst_float <= 1e-12, "probabilities equal squared amplitudes to 1e-12");
    o.expect(worst_coeff <= 1e-12, "ancilla coefficients equal 1/sqrt(M)");
    o.expect(worst_approx <= 1e-3, "rational approximation within 1e-3");
}

// 9. Schrodinger's cat.
void cat(Outcome &o) {
    CatConfig c;
    c.box_opened = false;
    const CatModel closed = build_cat(c);
    c.box_opened = true;
    const CatModel opened = build_cat(c);
    const auto dc = full_branches(closed);
    const auto dopen = full_branches(opened);
    const auto interior = interior_branches(closed);
    const BoxReport box = box_irrelevance_check(opened, closed);
    double amp = 0, eigen = 0;
    bool env_same = dc.branches.size() == 2;
    for (std::size_t i = 0; i < dc.branches.size() && i < interior.branches.size(); ++i) {
        amp = std::max(amp, std::abs(dc.branches[i].amplitude - interior.branches[i].amplitude));
        env_same = env_same && dc.branches[i].labels.back() == cat_label::env_closed;
    }
    bool correlated = dopen.branches.size() == 2;
    for (const auto &b : dopen.branches) {
        const int cat_label = b.labels[1 + kCatC];
        correlated = correlated && b.labels.back() == (cat_label == cat_label::alive ? cat_label::env_alive
                                                                                     : cat_label::env_dead);
    }
    for (const auto *m : {&closed, &opened}) {
        for (const auto &b : full_branches(*m).branches) {
            const Matrix &p = m->model.subsystems[kCatC].outcomes[b.labels[1 + kCatC]];
            eigen = std::max(eigen, max_abs(Vector(p * b.state - b.state)));
        }
    }
    o.value("branches_closed", static_cast<double>(dc.branches.size()));
    o.value("amplitude_error", amp);
    o.value("eigenstate_residual", eigen);
    o.expect(dc.branches.size() == 2, "closed box has exactly 2 branches");
    o.expect(env_same && box.closed_label_identical, "closed-box environment outcome identical");
    o.expect(amp <= 1e-12 && box.interior_amplitude_residual <= 1e-12, "amplitudes equal interior amplitudes");
    o.expect(correlated, "open-box environment correlated with the cat");
    o.expect(eigen == 0.0, "every branch is an exact cat eigenstate");
}

int run_tool(const std::string &args, const std::string &env = "") {
    const std::string cmd = env + " " + HISTKIT_TOOL + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// 10. Command-line tool.
void cli(Outcome &o) {
    const std::string dir = std::string(HISTKIT_SCENARIO_DIR);
    const fs::path out = fs::temp_directory_path() / "histkit_acceptance";
    fs::remove_all(out);
    fs::create_directories(out);
    const std::string env = "HISTKIT_OUTPUT_DIR=" + out.string();
    const std::string args = "branches decompose --scenario " + dir + "/einselection.yaml --format json --out ";
    const int r1 = run_tool(args + "first.json", env);
    const int r2 = run_tool(args + "second.json", env);
    const std::string a = slurp(out / "first.json"), b = slurp(out / "second.json");
    o.expect(r1 == 0 && r2 == 0 && !a.empty() && a == b, "byte-identical structured output");
    const int pass = run_tool("histories check --scenario " + dir + "/measurement.yaml");
    const int fail = run_tool("histories check --scenario " + dir + "/interference.yaml");
    std::ofstream(out / "malformed.yaml") << "spaces:\n  - {name: S, dim: two}\n";
    const int malformed = run_tool("histories check --scenario " + (out / "malformed.yaml").string());
    o.value("pass_exit", pass);
    o.value("failure_exit", fail);
    o.value("malformed_exit", malformed);
    o.expect(pass == 0, "passing run exits 0");
    o.expect(fail == 1, "consistency failure exits 1");
    o.expect(malformed == 2, "malformed scenario exits 2");
    fs::remove_all(out);
}

}  // namespace
}  // namespace histkit

int main() {
    using namespace histkit;
    const std::vector<Criterion> criteria{
        {1, "histories consistency", 1, histories_consistency},
        {2, "chain-sum identity", 5, chain_sum},
        {3, "propagator identities", 30, propagator_identities},
        {4, "path kernel", 60, kernel},
        {5, "fock interaction", 30, fock},
        {6, "einselection", 5, einselection},
        {7, "envariance", 1, envariance},
        {8, "born fine-graining", 30, born},
        {9, "cat", 1, cat},
        {10, "cli", 5, cli},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.expect(secs <= c.limit_seconds, "runtime limit");
        std::printf("%s %2d %s:%s (%.2fs / %.0fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.str().c_str(), secs, c.limit_seconds);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
