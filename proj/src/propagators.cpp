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

#include "histkit/propagators.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "histkit/errors.hpp"

namespace histkit {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
const Complex kI{0.0, 1.0};

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

// Visits every FFT-order multi-index of `extent` in row-major order.
template <typename F>
void for_each_index(const std::vector<int> &extent, F &&f) {
    std::vector<int> k(extent.size(), 0);
    std::size_t total = 1;
    for (int n : extent) {
        total *= static_cast<std::size_t>(n);
    }
    for (std::size_t flat = 0; flat < total; ++flat) {
        f(flat, k);
        for (int ax = static_cast<int>(extent.size()) - 1; ax >= 0; --ax) {
            if (++k[ax] < extent[ax]) {
                break;
            }
            k[ax] = 0;
        }
    }
}

std::size_t stride_of(const std::vector<int> &extent, int axis) {
    std::size_t s = 1;
    for (int ax = static_cast<int>(extent.size()) - 1; ax > axis; --ax) {
        s *= static_cast<std::size_t>(extent[ax]);
    }
    return s;
}

// Neighbour tables for the periodic nearest-neighbour stencil.
struct Neighbours {
    std::vector<std::vector<std::size_t>> up;
    std::vector<std::vector<std::size_t>> down;
};

Neighbours neighbours(const std::vector<int> &extent) {
    Neighbours nb;
    nb.up.resize(extent.size());
    nb.down.resize(extent.size());
    for_each_index(extent, [&](std::size_t flat, const std::vector<int> &k) {
        for (std::size_t ax = 0; ax < extent.size(); ++ax) {
            std::size_t s = stride_of(extent, static_cast<int>(ax));
            int n = extent[ax];
            std::size_t base = flat - static_cast<std::size_t>(k[ax]) * s;
            nb.up[ax].push_back(base + static_cast<std::size_t>((k[ax] + 1) % n) * s);
            nb.down[ax].push_back(base + static_cast<std::size_t>((k[ax] + n - 1) % n) * s);
        }
    });
    return nb;
}

// (p̂² f) by stencil: second difference along time minus second differences along space.
void apply_p_squared(
    const Neighbours &nb, double a, const std::vector<Complex> &in, std::vector<Complex> &out) {
    const double inv_a2 = 1.0 / (a * a);
    std::fill(out.begin(), out.end(), Complex{0.0, 0.0});
    for (std::size_t ax = 0; ax < nb.up.size(); ++ax) {
        const double s = ax == 0 ? 1.0 : -1.0;
        const auto &up = nb.up[ax];
        const auto &down = nb.down[ax];
        for (std::size_t i = 0; i < in.size(); ++i) {
            out[i] += s * inv_a2 * (in[up[i]] + in[down[i]] - 2.0 * in[i]);
        }
    }
}

PropagatorTable make_table(const LatticeSpec &lattice, PropagatorKind kind) {
    PropagatorTable t;
    t.kind = kind;
    t.lattice = lattice;
    t.values.assign(lattice.sites(), Complex{0.0, 0.0});
    return t;
}

// Table from momentum-space values F(k): (1/V) Σ_p e^{ip·x} F(p).
PropagatorTable from_momentum(const LatticeSpec &lattice, PropagatorKind kind, std::vector<Complex> f) {
    dft(f, lattice.extent, +1);
    PropagatorTable t = make_table(lattice, kind);
    const double inv_v = 1.0 / lattice.volume();
    for (std::size_t i = 0; i < f.size(); ++i) {
        t.values[i] = f[i] * inv_v;
    }
    return t;
}

std::vector<int> spatial_extent(const LatticeSpec &lattice) {
    return std::vector<int>(lattice.extent.begin() + 1, lattice.extent.end());
}

double spatial_volume(const LatticeSpec &lattice) {
    double v = 1.0;
    for (std::size_t ax = 1; ax < lattice.extent.size(); ++ax) {
        v *= lattice.extent[ax] * lattice.spacing;
    }
    return v;
}

double gk(const std::function<double(double)> &f, double a, double b, int depth = 6, double tol = 1e-12) {
    return GK::integrate(f, a, b, static_cast<unsigned>(depth), tol);
}

}  // namespace

void LatticeSpec::validate() const {
    if (extent.empty()) {
        throw DomainError("lattice needs at least one axis");
    }
    for (int n : extent) {
        if (n < 4) {
            throw DomainError("lattice extents must be at least 4");
        }
    }
    if (!(spacing > 0)) {
        throw DomainError("lattice spacing must be positive");
    }
    if (!(epsilon > 0)) {
        throw DomainError("epsilon must be positive");
    }
    if (!(mass >= 0)) {
        throw DomainError("mass must be non-negative");
    }
}

std::size_t LatticeSpec::sites() const {
    std::size_t s = 1;
    for (int n : extent) {
        s *= static_cast<std::size_t>(n);
    }
    return s;
}

double LatticeSpec::volume() const {
    double v = 1.0;
    for (int n : extent) {
        v *= n * spacing;
    }
    return v;
}

double LatticeSpec::cell() const {
    return std::pow(spacing, dim());
}

double LatticeSpec::momentum(int axis, int k) const {
    return 2.0 * kPi * centered(k, extent[axis]) / (extent[axis] * spacing);
}

double LatticeSpec::p_squared(const std::vector<int> &k) const {
    const double c = 2.0 / (spacing * spacing);
    double out = 0.0;
    for (int ax = 0; ax < dim(); ++ax) {
        double term = c * (1.0 - std::cos(spacing * momentum(ax, k[ax])));
        out += ax == 0 ? -term : term;
    }
    return out;
}

double LatticeSpec::spatial_p_squared(const std::vector<int> &k_spatial) const {
    const double c = 2.0 / (spacing * spacing);
    double out = 0.0;
    for (std::size_t i = 0; i < k_spatial.size(); ++i) {
        out += c * (1.0 - std::cos(spacing * momentum(static_cast<int>(i) + 1, k_spatial[i])));
    }
    return out;
}

std::string to_string(PropagatorKind k) {
    switch (k) {
        case PropagatorKind::feynman:
            return "feynman";
        case PropagatorKind::plus:
            return "plus";
        case PropagatorKind::minus:
            return "minus";
        case PropagatorKind::kernel:
            return "kernel";
    }
    return "unknown";
}

std::size_t PropagatorTable::flat_index(const std::vector<int> &displacement) const {
    if (displacement.size() != lattice.extent.size()) {
        throw ShapeError("displacement rank does not match lattice dimension");
    }
    std::size_t flat = 0;
    for (std::size_t ax = 0; ax < displacement.size(); ++ax) {
        int n = lattice.extent[ax];
        int k = ((displacement[ax] % n) + n) % n;
        flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(k);
    }
    return flat;
}

std::vector<int> PropagatorTable::displacement(std::size_t flat) const {
    std::vector<int> d(lattice.extent.size());
    for (int ax = static_cast<int>(d.size()) - 1; ax >= 0; --ax) {
        int n = lattice.extent[ax];
        d[ax] = centered(static_cast<int>(flat % n), n);
        flat /= n;
    }
    return d;
}

Complex PropagatorTable::at(const std::vector<int> &displacement) const {
    return values[flat_index(displacement)];
}

Complex &PropagatorTable::at(const std::vector<int> &displacement) {
    return values[flat_index(displacement)];
}

void dft(std::vector<Complex> &data, const std::vector<int> &extent, int sign) {
    std::vector<Complex> line;
    std::vector<Complex> out;
    for (std::size_t ax = 0; ax < extent.size(); ++ax) {
        const int n = extent[ax];
        const std::size_t stride = stride_of(extent, static_cast<int>(ax));
        std::vector<Complex> twiddle(n);
        for (int j = 0; j < n; ++j) {
            twiddle[j] = std::polar(1.0, sign * 2.0 * kPi * j / n);
        }
        line.resize(n);
        out.resize(n);
        const std::size_t block = stride * static_cast<std::size_t>(n);
        for (std::size_t start = 0; start < data.size(); start += block) {
            for (std::size_t off = 0; off < stride; ++off) {
                for (int j = 0; j < n; ++j) {
                    line[j] = data[start + off + j * stride];
                }
                for (int m = 0; m < n; ++m) {
                    Complex acc{0.0, 0.0};
                    for (int j = 0; j < n; ++j) {
                        acc += line[j] * twiddle[(static_cast<long>(j) * m) % n];
                    }
                    out[m] = acc;
                }
                for (int m = 0; m < n; ++m) {
                    data[start + off + m * stride] = out[m];
                }
            }
        }
    }
}

PropagatorTable feynman_propagator(const LatticeSpec &lattice) {
    lattice.validate();
    std::vector<Complex> f(lattice.sites());
    const double m2 = lattice.mass * lattice.mass;
    for_each_index(lattice.extent, [&](std::size_t flat, const std::vector<int> &k) {
        f[flat] = -kI / Complex(lattice.p_squared(k) + m2, -lattice.epsilon);
    });
    return from_momentum(lattice, PropagatorKind::feynman, std::move(f));
}

PropagatorTable apply_kg_operator(const PropagatorTable &t) {
    const LatticeSpec &l = t.lattice;
    Neighbours nb = neighbours(l.extent);
    std::vector<Complex> lap(t.values.size());
    apply_p_squared(nb, l.spacing, t.values, lap);
    PropagatorTable out = t;
    const Complex shift = Complex(-l.mass * l.mass, l.epsilon);
    for (std::size_t i = 0; i < lap.size(); ++i) {
        out.values[i] = -lap[i] + shift * t.values[i];
    }
    return out;
}

double kg_residual(const PropagatorTable &feynman) {
    PropagatorTable r = apply_kg_operator(feynman);
    r.values[0] -= kI / feynman.lattice.cell();
    double worst = 0.0;
    for (const auto &v : r.values) {
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

PropagatorTable onshell_propagator(const LatticeSpec &lattice, Sign sign, bool mask_zero_mode) {
    lattice.validate();
    if (lattice.dim() < 2) {
        throw DomainError("on-shell propagator needs at least one spatial axis");
    }
    const std::vector<int> sext = spatial_extent(lattice);
    const double m2 = lattice.mass * lattice.mass;
    std::size_t nspatial = 1;
    for (int n : sext) {
        nspatial *= static_cast<std::size_t>(n);
    }
    std::vector<double> energy(nspatial);
    for_each_index(sext, [&](std::size_t flat, const std::vector<int> &k) {
        energy[flat] = std::sqrt(lattice.spatial_p_squared(k) + m2);
    });
    if (energy[0] == 0.0 && !mask_zero_mode) {
        throw InfraredError("zero-momentum mode has E = 0; set m > 0 or mask the zero mode");
    }
    const double s = sign == Sign::plus ? -1.0 : 1.0;
    const double inv_l = 1.0 / spatial_volume(lattice);
    PropagatorTable out = make_table(lattice, sign == Sign::plus ? PropagatorKind::plus : PropagatorKind::minus);
    std::vector<Complex> slice(nspatial);
    for (int nt = 0; nt < lattice.extent[0]; ++nt) {
        const double t = centered(nt, lattice.extent[0]) * lattice.spacing;
        for (std::size_t i = 0; i < nspatial; ++i) {
            if (energy[i] == 0.0) {
                slice[i] = 0.0;
                continue;
            }
            slice[i] = std::polar(1.0, s * energy[i] * t) / (2.0 * energy[i]);
        }
        dft(slice, sext, +1);
        for (std::size_t i = 0; i < nspatial; ++i) {
            out.values[static_cast<std::size_t>(nt) * nspatial + i] = slice[i] * inv_l;
        }
    }
    return out;
}

Complex temporal_feynman_integral(double energy, double epsilon, double t) {
    const double e2 = energy * energy;
    const double tt = std::abs(t);
    auto g_re = [=](double p) {
        const double d = e2 - p * p;
        return d / (d * d + epsilon * epsilon);
    };
    auto g_im = [=](double p) {
        const double d = e2 - p * p;
        return epsilon / (d * d + epsilon * epsilon);
    };

    // Breakpoints: uniform chunks resolving the oscillation, refined geometrically around the pole.
    const double tail_start = energy + 20.0;
    const double chunk = std::min(1.0, kPi / std::max(tt, 1.0));
    std::vector<double> pts;
    for (double p = 0.0; p < tail_start; p += chunk) {
        pts.push_back(p);
    }
    pts.push_back(tail_start);
    const double width = epsilon / (2.0 * energy);
    for (double off = width; off < 0.5 * energy; off *= 4.0) {
        pts.push_back(energy - off);
        pts.push_back(energy + off);
    }
    pts.push_back(energy);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        re += gk([&](double p) { return std::cos(p * tt) * g_re(p); }, pts[i], pts[i + 1]);
        im += gk([&](double p) { return std::cos(p * tt) * g_im(p); }, pts[i], pts[i + 1]);
    }

    // Tail [P, ∞): the ε part is below double precision relative to the real part there.
    if (tt == 0.0) {
        re += gk(g_re, tail_start, std::numeric_limits<double>::infinity());
        im += gk(g_im, tail_start, std::numeric_limits<double>::infinity());
    } else {
        thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_int;
        thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_int;
        auto shifted_re = [&](double s) { return g_re(tail_start + s); };
        auto shifted_im = [&](double s) { return g_im(tail_start + s); };
        const double c = std::cos(tail_start * tt);
        const double sn = std::sin(tail_start * tt);
        re += c * cos_int.integrate(shifted_re, tt).first - sn * sin_int.integrate(shifted_re, tt).first;
        im += c * cos_int.integrate(shifted_im, tt).first - sn * sin_int.integrate(shifted_im, tt).first;
    }
    // (−i/2π)·2∫_0^∞ cos(p0 t) g(p0) dp0
    return -kI * Complex(re, im) / kPi;
}

Complex theta_form(double energy, double t) {
    if (t == 0.0) {
        return Complex(1.0 / (2.0 * energy), 0.0);
    }
    return std::polar(1.0, -energy * std::abs(t)) / (2.0 * energy);
}

namespace {

std::vector<double> default_times(const LatticeSpec &lattice) {
    std::vector<double> times;
    for (int n = 0; n <= lattice.extent[0] / 2; ++n) {
        times.push_back(n * lattice.spacing);
    }
    return times;
}

std::vector<std::vector<int>> all_spatial_modes(const LatticeSpec &lattice) {
    std::vector<std::vector<int>> modes;
    for_each_index(spatial_extent(lattice), [&](std::size_t, const std::vector<int> &k) { modes.push_back(k); });
    return modes;
}

}  // namespace

ThetaReport theta_decomposition_check(const LatticeSpec &lattice, double tolerance, const ThetaOptions &opts) {
    lattice.validate();
    if (!(lattice.mass > 0)) {
        throw DomainError("theta decomposition needs m > 0");
    }
    const auto times = opts.times.empty() ? default_times(lattice) : opts.times;
    const auto modes = opts.modes.empty() ? all_spatial_modes(lattice) : opts.modes;
    ThetaReport r;
    r.tolerance = tolerance;
    // Modes with equal lattice energy give identical integrals.
    std::map<double, bool> seen;
    for (const auto &k : modes) {
        const double e = std::sqrt(lattice.spatial_p_squared(k) + lattice.mass * lattice.mass);
        if (!seen.emplace(e, true).second) {
            continue;
        }
        for (double t : times) {
            const double res = std::abs(temporal_feynman_integral(e, lattice.epsilon, t) - theta_form(e, t));
            if (res > r.max_residual) {
                r.max_residual = res;
                r.worst_energy = e;
                r.worst_time = t;
            }
        }
    }
    r.pass = r.max_residual <= tolerance;
    return r;
}

SplitResult particle_antiparticle_split(const LatticeSpec &lattice) {
    lattice.validate();
    if (!(lattice.mass > 0)) {
        throw DomainError("particle/antiparticle split needs m > 0");
    }
    const std::vector<int> sext = spatial_extent(lattice);
    const int nt = lattice.extent[0];
    const auto modes = all_spatial_modes(lattice);
    const std::size_t nspatial = modes.size();
    const double inv_l = 1.0 / spatial_volume(lattice);

    // I_p(t) depends on |t| and E_p only.
    std::map<std::pair<double, int>, std::pair<Complex, double>> cache;
    SplitResult out;
    out.feynman = make_table(lattice, PropagatorKind::feynman);
    out.mode_summed_residual.assign(nt, 0.0);
    std::vector<Complex> slice(nspatial);
    for (int it = 0; it < nt; ++it) {
        const int n = centered(it, nt);
        const double t = n * lattice.spacing;
        double summed = 0.0;
        for (std::size_t i = 0; i < nspatial; ++i) {
            const double e = std::sqrt(lattice.spatial_p_squared(modes[i]) + lattice.mass * lattice.mass);
            auto key = std::make_pair(e, std::abs(n));
            auto found = cache.find(key);
            if (found == cache.end()) {
                Complex v = temporal_feynman_integral(e, lattice.epsilon, t);
                found = cache.emplace(key, std::make_pair(v, std::abs(v - theta_form(e, t)))).first;
            }
            slice[i] = found->second.first;
            summed += found->second.second;
        }
        out.mode_summed_residual[it] = summed * inv_l;
        dft(slice, sext, +1);
        for (std::size_t i = 0; i < nspatial; ++i) {
            out.feynman.values[static_cast<std::size_t>(it) * nspatial + i] = slice[i] * inv_l;
        }
    }
    out.plus = make_table(lattice, PropagatorKind::plus);
    out.minus = make_table(lattice, PropagatorKind::minus);
    for (int it = 0; it < nt; ++it) {
        const int n = centered(it, nt);
        const double theta_plus = n > 0 ? 1.0 : (n == 0 ? 0.5 : 0.0);
        for (std::size_t i = 0; i < nspatial; ++i) {
            const std::size_t idx = static_cast<std::size_t>(it) * nspatial + i;
            const Complex v = out.feynman.values[idx];
            out.plus.values[idx] = theta_plus * v;
            // Complementary weight so plus + minus reproduces the input bit for bit.
            out.minus.values[idx] = v - out.plus.values[idx];
        }
    }
    return out;
}

PropagatorTable path_kernel(const LatticeSpec &lattice, double lambda) {
    lattice.validate();
    if (!(lambda > 0)) {
        throw DomainError("path kernel needs lambda > 0");
    }
    std::vector<Complex> f(lattice.sites());
    const double m2 = lattice.mass * lattice.mass;
    for_each_index(lattice.extent, [&](std::size_t flat, const std::vector<int> &k) {
        f[flat] = std::polar(1.0, -lambda * (lattice.p_squared(k) + m2));
    });
    return from_momentum(lattice, PropagatorKind::kernel, std::move(f));
}

PropagatorTable lattice_convolve(const PropagatorTable &f, const PropagatorTable &g) {
    if (f.lattice.extent != g.lattice.extent) {
        throw ShapeError("convolution of tables on different lattices");
    }
    const LatticeSpec &l = f.lattice;
    PropagatorTable out = make_table(l, f.kind);
    const double cell = l.cell();
    const std::size_t n = l.sites();
    // Row-major flat indices: x − y is computed per axis with wrap.
    std::vector<std::vector<int>> idx(n);
    for_each_index(l.extent, [&](std::size_t flat, const std::vector<int> &k) { idx[flat] = k; });
    const int d = l.dim();
    for (std::size_t x = 0; x < n; ++x) {
        Complex acc{0.0, 0.0};
        for (std::size_t y = 0; y < n; ++y) {
            std::size_t flat = 0;
            for (int ax = 0; ax < d; ++ax) {
                int m = l.extent[ax];
                flat = flat * m + static_cast<std::size_t>((idx[x][ax] - idx[y][ax] + m) % m);
            }
            acc += f.values[flat] * g.values[y];
        }
        out.values[x] = acc * cell;
    }
    return out;
}

PropagatorTable conj_transpose(const PropagatorTable &k) {
    PropagatorTable out = k;
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        std::vector<int> d = k.displacement(i);
        for (int &c : d) {
            c = -c;
        }
        out.values[i] = std::conj(k.at(d));
    }
    return out;
}

double semigroup_residual(const LatticeSpec &lattice, double lambda1, double lambda2) {
    PropagatorTable c = lattice_convolve(path_kernel(lattice, lambda1), path_kernel(lattice, lambda2));
    return max_difference(c, path_kernel(lattice, lambda1 + lambda2));
}

double kernel_unitarity_residual(const LatticeSpec &lattice, double lambda) {
    PropagatorTable k = path_kernel(lattice, lambda);
    PropagatorTable c = lattice_convolve(k, conj_transpose(k));
    c.values[0] -= 1.0 / lattice.cell();
    double worst = 0.0;
    for (const auto &v : c.values) {
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

PropagatorTable kernel_path_oracle_table(const LatticeSpec &lattice, double lambda, int slices, int taylor_order) {
    lattice.validate();
    if (slices < 2) {
        throw DomainError("slicing oracle needs at least 2 slices");
    }
    if (!(lambda > 0)) {
        throw DomainError("slicing oracle needs lambda > 0");
    }
    if (taylor_order < 1) {
        throw DomainError("slicing oracle needs a positive Taylor order");
    }
    if (lattice.dim() >= 4 && slices > 64) {
        throw CapacityError("slicing oracle limited to 64 slices in 3+1 dimensions or more");
    }
    const int steps = slices - 1;
    const double delta = lambda / steps;
    const double m2 = lattice.mass * lattice.mass;
    Neighbours nb = neighbours(lattice.extent);
    PropagatorTable out = make_table(lattice, PropagatorKind::kernel);
    std::vector<Complex> &f = out.values;
    f[0] = 1.0 / lattice.cell();
    std::vector<Complex> term(f.size());
    std::vector<Complex> h_term(f.size());
    for (int s = 0; s < steps; ++s) {
        term = f;
        for (int j = 1; j <= taylor_order; ++j) {
            apply_p_squared(nb, lattice.spacing, term, h_term);
            const Complex c = Complex(0.0, -delta / j);
            for (std::size_t i = 0; i < f.size(); ++i) {
                term[i] = c * (h_term[i] + m2 * term[i]);
                f[i] += term[i];
            }
        }
    }
    return out;
}

Complex kernel_path_oracle(
    const LatticeSpec &lattice,
    const std::vector<int> &x,
    const std::vector<int> &x0,
    double lambda,
    int slices,
    int taylor_order) {
    if (x.size() != x0.size()) {
        throw ShapeError("endpoint ranks differ");
    }
    std::vector<int> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        d[i] = x[i] - x0[i];
    }
    return kernel_path_oracle_table(lattice, lambda, slices, taylor_order).at(d);
}

PropagatorTable one_step_amplitude(const LatticeSpec &lattice, double lambda, int taylor_order) {
    lattice.validate();
    std::vector<Complex> f(lattice.sites());
    const double m2 = lattice.mass * lattice.mass;
    for_each_index(lattice.extent, [&](std::size_t flat, const std::vector<int> &k) {
        const Complex z = Complex(0.0, -lambda * (lattice.p_squared(k) + m2));
        Complex term = 1.0;
        Complex acc = 1.0;
        for (int j = 1; j <= taylor_order; ++j) {
            term *= z / static_cast<double>(j);
            acc += term;
        }
        f[flat] = acc;
    });
    return from_momentum(lattice, PropagatorKind::kernel, std::move(f));
}

Complex lambda_quadrature(double w, double epsilon, double lambda_max, int max_depth) {
    auto re = [=](double l) { return std::exp(-epsilon * l) * std::cos(w * l); };
    auto im = [=](double l) { return -std::exp(-epsilon * l) * std::sin(w * l); };
    auto integrate = [&](double a, double b, int pieces) {
        double sr = 0.0;
        double si = 0.0;
        const double h = (b - a) / pieces;
        for (int i = 0; i < pieces; ++i) {
            sr += gk(re, a + i * h, a + (i + 1) * h, max_depth, 1e-14);
            si += gk(im, a + i * h, a + (i + 1) * h, max_depth, 1e-14);
        }
        return Complex(sr, si);
    };
    const double aw = std::abs(w);
    if (aw == 0.0 || lambda_max * aw < 4.0 * kPi) {
        return integrate(0.0, lambda_max, 64);
    }
    const double period = 2.0 * kPi / aw;
    const double n = std::floor(lambda_max / period);
    const Complex one = integrate(0.0, period, 4);
    // Σ_{k<n} e^{−εkT} = (1 − e^{−εnT}) / (1 − e^{−εT})
    const Complex full = one * (std::expm1(-epsilon * n * period) / std::expm1(-epsilon * period));
    const double rest = lambda_max - n * period;
    Complex tail{0.0, 0.0};
    if (rest > 0.0) {
        tail = std::exp(-epsilon * n * period) * integrate(0.0, rest, 4);
    }
    return full + tail;
}

LambdaReport lambda_integrate_kernel(const PathKernelConfig &config) {
    const LatticeSpec &l = config.lattice;
    l.validate();
    LambdaReport r;
    r.lambda_max = config.lambda_max > 0 ? config.lambda_max : 40.0 / l.epsilon;
    const double m2 = l.mass * l.mass;
    std::map<double, Complex> cache;
    std::vector<Complex> f(l.sites());
    for_each_index(l.extent, [&](std::size_t flat, const std::vector<int> &k) {
        const double w = l.p_squared(k) + m2;
        auto it = cache.find(w);
        if (it == cache.end()) {
            const Complex q = lambda_quadrature(w, l.epsilon, r.lambda_max, config.lambda_steps);
            const Complex closed = -kI / Complex(w, -l.epsilon);
            r.max_mode_residual = std::max(r.max_mode_residual, std::abs(q - closed));
            it = cache.emplace(w, q).first;
        }
        f[flat] = it->second;
    });
    if (r.max_mode_residual > config.mode_tolerance) {
        throw ConvergenceError(
            "lambda quadrature misses the closed form by " + std::to_string(r.max_mode_residual) +
                "; increase lambda_max",
            r.max_mode_residual);
    }
    r.table = from_momentum(l, PropagatorKind::feynman, std::move(f));
    return r;
}

double max_difference(const PropagatorTable &a, const PropagatorTable &b) {
    if (a.values.size() != b.values.size()) {
        throw ShapeError("tables differ in size");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    }
    return worst;
}

void write_csv(std::ostream &out, const PropagatorTable &t) {
    const int d = t.lattice.dim();
    for (int ax = 0; ax < d; ++ax) {
        out << 'd' << ax << ',';
    }
    out << "re,im\n";
    // Centered order: displacement −N/2 .. N/2 − 1 on every axis.
    std::vector<int> disp(d);
    for (int ax = 0; ax < d; ++ax) {
        disp[ax] = -t.lattice.extent[ax] / 2;
    }
    char buf[64];
    for (std::size_t row = 0; row < t.values.size(); ++row) {
        for (int ax = 0; ax < d; ++ax) {
            out << disp[ax] << ',';
        }
        const Complex v = t.at(disp);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", v.real(), v.imag());
        out << buf << '\n';
        for (int ax = d - 1; ax >= 0; --ax) {
            if (++disp[ax] < t.lattice.extent[ax] - t.lattice.extent[ax] / 2) {
                break;
            }
            disp[ax] = -t.lattice.extent[ax] / 2;
        }
    }
}

}  // namespace histkit
