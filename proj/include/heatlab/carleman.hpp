#pragma once

#include <cstdint>
#include <vector>

#include "heatlab/pde.hpp"

namespace heatlab {

/// Auxiliary weight-shape function xi(x) = xh (1-xh) e^{mu (xh - c')} with
/// xh = (x-a)/(b-a); positive inside (a,b), zero at the endpoints, unique
/// critical point at the prescribed center c.
struct XiFunction {
    double a = 0.0, b = 1.0;
    double center = 0.5;   // critical point, in domain coordinates
    double c_hat = 0.5;    // normalized center
    double mu = 0.0;       // (2 c' - 1)/(c' (1 - c'))
    double sup = 0.25;     // ||xi||_inf = c'(1 - c') (attained at the center)
    double delta_xi = 0.0; // min |xi'| outside a 5% neighborhood of the center

    double value(double x) const;
    double deriv(double x) const;
    double deriv2(double x) const;
};

XiFunction build_xi(const SpaceGrid& grid, double omega_prime_center);

struct CarlemanParams {
    double s = 2.0;
    double lambda = 2.0;
    double tau = 1.0;
    double C1 = 1.0;
};

/// beta, eta and their derivatives on interior nodes x half-steps;
/// layout values[m * n + i] like HalfStepSource.
struct WeightField {
    std::vector<double> beta, eta, dt_beta, grad_beta, grad_eta, lap_beta;
};

WeightField weights(const XiFunction& xi, const CarlemanParams& params,
                    const SpaceGrid& grid, const TimeGrid& tg);

/// tau_0 = C (T + T^2 + T^2 (sup^{1/2} + grad^{1/2} + dt^{1/3})).
double tau0(double T, const PotentialNorms& n, double C = 1.0);

struct CarlemanSides {
    double lhs3 = 0.0;      // tau^3 lambda^4 weighted ||w||^2 over Q_T
    double lhs1 = 0.0;      // tau lambda^2 weighted ||grad w||^2
    double lhs_neg1 = 0.0;  // tau^{-1} weighted ||Lap w||^2 + ||w_t||^2
    double rhs_f = 0.0;     // weighted ||w_t + Lap w + V w||^2
    double rhs_local = 0.0; // tau^3 lambda^4 weighted ||w||^2 over omega
    bool holds = false;     // C1 (rhs_f + rhs_local) >= lhs3 + lhs1 + lhs_neg1
    double slack = 0.0;     // rhs / lhs ratio (confidence margin)
};

/// Both sides of the weighted inequality, evaluated with discrete operators
/// at half-steps; all weights computed in the log domain.
CarlemanSides carleman_sides(const SpaceTimeField& w, const Potential& V,
                             const XiFunction& xi, const CarlemanParams& params,
                             const SpaceMask& omega);

/// Random Fourier-sine corpus with k^{-2} spectrum; seeded, reproducible.
std::vector<SpaceTimeField> make_corpus(const SpaceGrid& grid, const TimeGrid& tg,
                                        int count, std::uint64_t seed);

/// Smallest C1 making the inequality hold for every corpus member at tau_cal.
double calibrate_c1(const std::vector<SpaceTimeField>& corpus, const Potential& V,
                    const XiFunction& xi, CarlemanParams params,
                    const SpaceMask& omega, double tau_cal);

struct TauSearchResult {
    bool found = false;
    double tau_star = 0.0;
    bool verified = false;       // holds at tau_star
    bool refuted_below = false;  // fails at tau_star / 1.05
    bool degenerate = false;     // holds down to the smallest probe
    bool monotone_warning = false;
};

/// 40-iteration bisection for the smallest tau in (0, tau_hi] at which the
/// inequality holds for every corpus member.
TauSearchResult min_tau_search(const std::vector<SpaceTimeField>& corpus,
                               const Potential& V, const XiFunction& xi,
                               CarlemanParams params, const SpaceMask& omega,
                               double tau_hi);

} // namespace heatlab
