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

#ifndef HISTKIT_PROPAGATORS_HPP
#define HISTKIT_PROPAGATORS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "histkit/hilbert.hpp"

namespace histkit {

/// Periodic spacetime lattice, axis 0 is time. Signature (−+++), c = ħ = 1.
struct LatticeSpec {
    std::vector<int> extent{64, 64};
    double spacing = 0.25;
    double mass = 1.0;
    double epsilon = 1e-4;

    int dim() const {
        return static_cast<int>(extent.size());
    }
    /// Throws DomainError on extents < 4, ε ≤ 0, m < 0, a ≤ 0.
    void validate() const;
    std::size_t sites() const;
    /// Physical volume Π N_μ a.
    double volume() const;
    /// Cell volume a^d; the discrete delta is δ_{x,0} / cell().
    double cell() const;
    /// Momentum component 2π k / (N a) for FFT-order index k.
    double momentum(int axis, int k) const;
    /// Lattice p̂² = −(2/a²)(1 − cos a p0) + Σ_i (2/a²)(1 − cos a p_i) for FFT-order indices.
    double p_squared(const std::vector<int> &k) const;
    /// Spatial part only; E_p² = spatial_p_squared + m².
    double spatial_p_squared(const std::vector<int> &k_spatial) const;
};

enum class PropagatorKind { feynman, plus, minus, kernel };

std::string to_string(PropagatorKind k);

/// Complex values over lattice displacements, stored in FFT order:
/// index k on an axis of extent N is displacement k for k < N/2 and k − N otherwise.
struct PropagatorTable {
    PropagatorKind kind = PropagatorKind::feynman;
    LatticeSpec lattice;
    std::vector<Complex> values;

    /// Displacements are taken modulo the extent.
    Complex at(const std::vector<int> &displacement) const;
    Complex &at(const std::vector<int> &displacement);
    std::size_t flat_index(const std::vector<int> &displacement) const;
    std::vector<int> displacement(std::size_t flat) const;
};

/// Signed displacement for an FFT-order index.
inline int centered(int k, int n) {
    return k < n / 2 ? k : k - n;
}

/// In-place separable DFT along every axis: out(n) = Σ_k in(k) exp(sign·2πi k n / N).
void dft(std::vector<Complex> &data, const std::vector<int> &extent, int sign);

PropagatorTable feynman_propagator(const LatticeSpec &lattice);

/// (□̂ − m² + iε) applied by stencil; □̂ = −∂̂_t² + ∇̂².
PropagatorTable apply_kg_operator(const PropagatorTable &t);

/// ‖(□̂ − m² + iε)Δ_F − i δ‖ with δ = δ_{x,0}/a^d.
double kg_residual(const PropagatorTable &feynman);

enum class Sign { plus, minus };

/// Δ±(t, x) = (1/L^{d−1}) Σ_p exp(i(∓E t + p·x)) / (2E) with t = n_t a.
/// mask_zero_mode drops the p = 0 mode (required when m = 0).
PropagatorTable onshell_propagator(const LatticeSpec &lattice, Sign sign, bool mask_zero_mode = false);

/// ∫dp0/(2π) (−i) e^{−i p0 t} / (E² − p0² − iε) by adaptive quadrature over continuum p0.
Complex temporal_feynman_integral(double energy, double epsilon, double t);

/// θ(t) e^{−iEt}/(2E) + θ(−t) e^{iEt}/(2E), θ(0) = 1/2.
Complex theta_form(double energy, double t);

struct ThetaOptions {
    /// Time values; empty means n·a for n = 0..N_t/2.
    std::vector<double> times;
    /// Spatial modes in FFT order; empty means all.
    std::vector<std::vector<int>> modes;
};

struct ThetaReport {
    double max_residual = 0;
    double worst_energy = 0;
    double worst_time = 0;
    double tolerance = 0;
    bool pass = false;
};

ThetaReport theta_decomposition_check(const LatticeSpec &lattice, double tolerance, const ThetaOptions &opts = {});

struct SplitResult {
    /// Mode-summed continuum-time Feynman table the split is applied to.
    PropagatorTable feynman;
    PropagatorTable plus;
    PropagatorTable minus;
    /// Per time slice, (1/L^{d−1}) Σ_p |I_p(t) − θ-form_p(t)|, indexed by FFT-order time index.
    std::vector<double> mode_summed_residual;
};

SplitResult particle_antiparticle_split(const LatticeSpec &lattice);

struct PathKernelConfig {
    LatticeSpec lattice;
    /// ≤ 0 selects 40/ε.
    double lambda_max = 0;
    /// Gauss–Kronrod recursion depth for λ quadrature.
    int lambda_steps = 6;
    int slices = 32;
    /// Taylor order of the one-step amplitude in the slicing oracle.
    int taylor_order = 12;
    /// Max allowed |quadrature − closed form| per mode.
    double mode_tolerance = 1e-6;
};

/// K(x; λ) = (1/V) Σ_p e^{ip·x} e^{−iλ(p̂² + m²)}.
PropagatorTable path_kernel(const LatticeSpec &lattice, double lambda);

/// (f ⊛ g)(x) = a^d Σ_y f(x − y) g(y), computed in position space.
PropagatorTable lattice_convolve(const PropagatorTable &f, const PropagatorTable &g);

/// K†(x) = conj(K(−x)).
PropagatorTable conj_transpose(const PropagatorTable &k);

/// ‖K(λ1) ⊛ K(λ2) − K(λ1 + λ2)‖.
double semigroup_residual(const LatticeSpec &lattice, double lambda1, double lambda2);

/// ‖K(λ) ⊛ K(λ)† − δ‖.
double kernel_unitarity_residual(const LatticeSpec &lattice, double lambda);

/// Time-sliced path sum: slices λ nodes, slices − 1 steps of δ = λ/(slices − 1). Each step sums over
/// intermediate lattice points with the order-K short-time amplitude of e^{−iδ(p̂² + m²)},
/// applied as repeated nearest-neighbour stencils. No Fourier transforms.
PropagatorTable kernel_path_oracle_table(const LatticeSpec &lattice, double lambda, int slices, int taylor_order = 12);

Complex kernel_path_oracle(
    const LatticeSpec &lattice,
    const std::vector<int> &x,
    const std::vector<int> &x0,
    double lambda,
    int slices,
    int taylor_order = 12);

/// The order-K one-step amplitude in closed momentum form; equals the two-slice oracle.
PropagatorTable one_step_amplitude(const LatticeSpec &lattice, double lambda, int taylor_order = 12);

/// ∫_0^Λ e^{−ελ} e^{−iwλ} dλ by Gauss–Kronrod quadrature over one oscillation period plus the geometric sum.
Complex lambda_quadrature(double w, double epsilon, double lambda_max, int max_depth = 6);

struct LambdaReport {
    PropagatorTable table;
    double max_mode_residual = 0;
    double lambda_max = 0;
};

/// Assembles Δ_F from quadrature of each mode; throws ConvergenceError if a mode misses mode_tolerance.
LambdaReport lambda_integrate_kernel(const PathKernelConfig &config);

double max_difference(const PropagatorTable &a, const PropagatorTable &b);

/// Header `d0,d1,...,re,im`; rows in centered displacement order; 17 significant digits.
void write_csv(std::ostream &out, const PropagatorTable &t);

}  // namespace histkit

#endif
