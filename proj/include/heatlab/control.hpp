#pragma once

#include <vector>

#include "heatlab/observability.hpp"
#include "heatlab/pde.hpp"

namespace heatlab {

struct HUMOptions {
    double eps = 1e-10;     // penalization; 0 is allowed
    double cg_tol = 1e-10;
    int max_iter = 500;
};

struct HUMSolution {
    std::vector<double> qT_star;
    HalfStepSource control;     // injected source, supported on omega x E
    SpaceTimeField trajectory;  // independent forward simulation with control
    double terminal_ratio = 0.0;
    double cost_l2 = 0.0;       // ||h||_{L2(omega x E)}
    int cg_iterations = 0;
    double cg_residual = 0.0;
    double eps = 0.0;
    bool converged = false;
};

/// Penalized HUM: solve (Lambda + eps I) qT = -y_free^N by CG, re-extract the
/// control from the adjoint of qT, then verify by an independent forward run.
HUMSolution hum_solve(std::span<const double> y0, const Potential& V,
                      const ObservationRegion& region, const SpaceGrid& grid,
                      const TimeGrid& tg, const HUMOptions& opts = {});

struct ControlCostReport {
    double cost_l2 = 0.0;
    double log_cost = 0.0;   // -inf sentinel (lowest double) for zero cost
    double log_bound = 0.0;  // C (1 + 1/T + T sup + triple)
    double log_ratio = 0.0;
};

ControlCostReport cost_report(const HUMSolution& sol, double T,
                              const PotentialNorms& n, double C = 1.0);

/// C^3 time cutoff: 1 on [0, r T], 0 on [(1-r) T, T], 7th-order smoothstep
/// in between; derivative analytic.
struct TimeCutoff {
    double T = 1.0;
    double ramp = 0.25;
    double value(double t) const;
    double deriv(double t) const;
};

TimeCutoff build_chi(double T, double ramp_fraction);

/// C^3 space cutoff: 1 on [l4, r4], 0 outside [l, r], smoothstep collars;
/// first and second derivatives analytic.
struct SpaceCutoff {
    double l = 0.0, l4 = 0.0, r4 = 0.0, r = 0.0;
    double value(double x) const;
    double deriv(double x) const;
    double deriv2(double x) const;
};

SpaceCutoff build_phi(const SpaceGrid& grid, const Interval& omega4,
                      const Interval& omega);

struct RegularControl {
    SpaceTimeField h_reg;  // node-level control, supported in omega
    SpaceTimeField y;      // assembled trajectory
    double residual_norm = 0.0;   // discrete-equation residual, L2(Q_T)
    double holder_norm = 0.0;     // localized C^{alpha, alpha/2} estimate
    double terminal_rel = 0.0;    // ||y^N||_h / ||y0||_h
    Interval omega2, omega3, omega4;
    HUMSolution hum;
};

struct RegularControlOptions {
    HUMOptions hum{0.0, 1e-12, 2000};
    double chi_ramp = 0.25;
    double alpha = 0.5;
    int holder_radius = 8;
};

/// Cutoff-patched regular-control assembly: free solution u, HUM pair on the
/// innermost mask, y_hat = y_tilde - chi u, y = (1-phi) y_hat + chi u,
/// h = phi chi' u + Lap(phi) y_hat + 2 phi' grad(y_hat).
RegularControl regular_control(std::span<const double> y0, const Potential& V,
                               const SpaceGrid& grid, const TimeGrid& tg,
                               const Interval& omega,
                               const RegularControlOptions& opts = {});

/// Same, with the nested masks given explicitly (each strictly inside the next).
RegularControl regular_control_nested(std::span<const double> y0,
                                      const Potential& V, const SpaceGrid& grid,
                                      const TimeGrid& tg, const Interval& omega2,
                                      const Interval& omega3, const Interval& omega4,
                                      const Interval& omega,
                                      const RegularControlOptions& opts = {});

/// Localized discrete parabolic Hoelder norm: sup norm plus
/// max |f(p)-f(p')| / (|x-x'| + |t-t'|^{1/2})^alpha over pairs within the
/// locality radius (a lower bound on the full seminorm).
double holder_norm(const SpaceTimeField& field, double alpha, int radius = 8);

} // namespace heatlab
