#pragma once

#include <span>
#include <vector>

#include "heatlab/mesh.hpp"
#include "heatlab/potential.hpp"

namespace heatlab {

/// Interior-node values over all time levels; boundary nodes are implicitly
/// zero. Layout: values[level * n + i], level = 0..steps, i = 0..n-1.
struct SpaceTimeField {
    SpaceGrid grid;
    TimeGrid tg;
    std::vector<double> values;

    SpaceTimeField() = default;
    SpaceTimeField(const SpaceGrid& g, const TimeGrid& t)
        : grid(g), tg(t),
          values(static_cast<std::size_t>(t.steps + 1) * g.n, 0.0) {}

    double at(int level, int i) const {
        return values[static_cast<std::size_t>(level) * grid.n + i];
    }
    double& at(int level, int i) {
        return values[static_cast<std::size_t>(level) * grid.n + i];
    }
    std::span<const double> level(int n) const {
        return {values.data() + static_cast<std::size_t>(n) * grid.n,
                static_cast<std::size_t>(grid.n)};
    }
    std::span<double> level(int n) {
        return {values.data() + static_cast<std::size_t>(n) * grid.n,
                static_cast<std::size_t>(grid.n)};
    }
};

/// Source samples at interior nodes x half-steps: values[step * n + i].
struct HalfStepSource {
    std::vector<double> values;

    HalfStepSource() = default;
    HalfStepSource(const SpaceGrid& g, const TimeGrid& t)
        : values(static_cast<std::size_t>(t.steps) * g.n, 0.0) {}

    double at(int step, int n_space, int i) const {
        return values[static_cast<std::size_t>(step) * n_space + i];
    }
    double& at(int step, int n_space, int i) {
        return values[static_cast<std::size_t>(step) * n_space + i];
    }
    bool empty() const { return values.empty(); }
};

/// Discrete L2 inner product h * sum_i u_i v_i.
double dot_h(std::span<const double> u, std::span<const double> v, double h);
double norm_h(std::span<const double> u, double h);

/// Trapezoidal stepping with the potential frozen at half-steps:
///   (I + dt/2 A^{n+1/2}) y^{n+1} = (I - dt/2 A^{n+1/2}) y^n + dt f^{n+1/2},
/// A = -Laplacian_h + diag(V). Forward and adjoint use the same step matrix,
/// which makes the discrete duality identity exact.
SpaceTimeField forward_solve(const SpaceGrid& grid, const TimeGrid& tg,
                             std::span<const double> y0, const Potential& V,
                             const HalfStepSource* source = nullptr);

SpaceTimeField adjoint_solve(const SpaceGrid& grid, const TimeGrid& tg,
                             std::span<const double> qT, const Potential& V);

/// Half-step midpoint trace (q^n + q^{n+1})/2 on the mask, scaled by
/// sqrt(w_n/dt); zero off the region.
HalfStepSource observation_trace(const SpaceTimeField& q,
                                 const ObservationRegion& region);

/// <y^N, q^N>_h - <y^0, q^0>_h - dt * sum_n <f^{n+1/2}, (q^n+q^{n+1})/2>_h.
/// Zero to round-off by construction of the scheme.
double duality_gap(const SpaceGrid& grid, const TimeGrid& tg,
                   std::span<const double> y0, std::span<const double> qT,
                   const HalfStepSource* source, const Potential& V);

struct DissipativityReport {
    double c_min = 0.0;        // smallest admissible amplification constant
    bool holds_c0 = false;     // ||q(t1)|| <= ||q(t2)|| for all t1 <= t2
    double neg_sup = 0.0;
};

/// Backward energy growth check for an adjoint field: for all t1 <= t2,
/// ||q(t1)|| <= exp(c (t2-t1) ||V_-||) ||q(t2)||, reporting the smallest c.
DissipativityReport dissipativity_check(const SpaceTimeField& q,
                                        const PotentialNorms& vnorms);

struct EnergyReport {
    double max_energy = 0.0;       // max_t ||y(t)||_h^2
    double gradient_energy = 0.0;  // sum_n dt ||grad_h y||^2 (trapezoid in t)
};

EnergyReport energy_report(const SpaceTimeField& y);

} // namespace heatlab
