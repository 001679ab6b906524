#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "heatlab/pde.hpp"

namespace heatlab {

/// Gramian application qT -> y^N: adjoint-solve from qT, re-inject the
/// time-weighted masked midpoint trace as a forward source from zero initial
/// data. Symmetric PSD in <.,.>_h by the discrete duality identity:
/// <Lambda q, p>_h equals the observation pairing sum_n w_n <avg q, avg p>_omega.
std::vector<double> gramian_apply(std::span<const double> qT, const Potential& V,
                                  const ObservationRegion& region,
                                  const SpaceGrid& grid, const TimeGrid& tg);

/// Initial-energy operator qT -> forward(adjoint(qT)(0))^N; symmetric PSD,
/// <N q, q>_h = ||q(0)||_h^2.
std::vector<double> initial_energy_apply(std::span<const double> qT,
                                         const Potential& V,
                                         const SpaceGrid& grid,
                                         const TimeGrid& tg);

struct ObservabilityEstimate {
    double c_obs = 0.0;
    int iterations = 0;
    double pencil_residual = 0.0;
    double regularization_eps = 0.0;
    bool converged = false;
};

struct CobsOptions {
    double eps = -1.0;        // <= 0: auto, 1e-12 * trace(Lambda)/n (8 probes)
    double tol = 1e-8;        // relative Rayleigh-quotient stall tolerance
    int max_iter = 500;       // power-iteration steps
    double cg_tol = 1e-3;     // inner CG tolerance (tightened at the end)
    double cg_tol_final = 1e-8;
    int cg_max_iter = 5000;
    std::uint64_t seed = 1;
};

/// Observability constant in the dual form: c_obs^2 = largest generalized
/// eigenvalue of (N, Lambda + eps I), by pencil power iteration with
/// matrix-free inner CG solves.
ObservabilityEstimate cobs_estimate(const Potential& V,
                                    const ObservationRegion& region,
                                    const SpaceGrid& grid, const TimeGrid& tg,
                                    const CobsOptions& opts = {});

/// Per-mode diagonal oracle, valid for omega = Omega, E = (0,T) and
/// time-independent V: eigendecompose A = -Lap_h + diag(V) and run the
/// scalar step recursions mode by mode. Returns c_obs.
double cobs_diagonal_oracle(const Potential& V, const SpaceGrid& grid,
                            const TimeGrid& tg, double eps);

// Predicted log-scale bound shapes (the absolute constants are non-explicit;
// C is
// a caller-supplied shape constant, default 1).
double bound_new(double T, const PotentialNorms& n, double C = 1.0);
double bound_classical(double T, const PotentialNorms& n, double C = 1.0);
double bound_split(double T, const PotentialNorms& lipschitz_part,
                   const PotentialNorms& rough_part, double C = 1.0,
                   double sup_combined = -1.0);
double bound_1d(double T, const PotentialNorms& n, double C_E, double C_domain);
double bound_1d_full_time(double T, const PotentialNorms& n, double C = 1.0);

/// Interpolation-inequality probe for time-independent V >= 0:
/// ||e^{t2 D} f|| / (||e^{t D} f||_omega^{1-delta} ||e^{t1 D} f||^delta)
/// with the discrete semigroup; times snap to the nearest grid level.
double interpolation_check(const Potential& V, const SpaceGrid& grid,
                           const TimeGrid& tg, std::span<const double> f,
                           double t1, double t, double t2,
                           const SpaceMask& omega, double delta);

} // namespace heatlab
