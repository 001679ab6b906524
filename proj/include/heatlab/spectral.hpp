#pragma once

#include <functional>
#include <vector>

#include "heatlab/pde.hpp"

namespace heatlab {

/// Full Dirichlet eigenstructure of the tridiagonal -d_xx + V(x) on the grid,
/// orthonormal in <.,.>_h. vectors are column-major: vectors[k*n + i] is the
/// i-th node value of the k-th eigenvector.
struct HillBasis {
    SpaceGrid grid;
    std::vector<double> eigenvalues;  // nondecreasing
    std::vector<double> vectors;
    double max_residual = 0.0;        // max_k ||H phi_k - lambda_k phi_k||_h
    double gram_deviation = 0.0;      // max |<phi_j, phi_k>_h - delta_jk|

    double vec(int k, int i) const {
        return vectors[static_cast<std::size_t>(k) * grid.n + i];
    }
};

HillBasis hill_eigensolve(const Potential& V, const SpaceGrid& grid);

struct SpectralWindow {
    double lambda_cut = 0.0;
    std::vector<int> indices;  // {k : lambda_k <= lambda_cut}
};

SpectralWindow make_window(const HillBasis& basis, double lambda_cut);

struct SpectralRatio {
    double max_ratio = 0.0;   // max ||phi|| / ||phi||_{L2(omega)} over the window
    double lambda_min = 0.0;  // smallest eigenvalue of the omega Gram matrix
    std::vector<double> worst_coefficients;
    int iterations = 0;
    bool reliable = true;     // false when the Gram is numerically singular
};

/// Worst-case window-function concentration ratio = lambda_min(M_omega)^{-1/2}
/// with (M_omega)_{jk} = h sum_{i in omega} phi_j phi_k; lambda_min by inverse
/// power iteration on M_omega + reg I.
SpectralRatio spectral_ratio(const HillBasis& basis, const SpectralWindow& window,
                             const SpaceMask& omega, double reg = 0.0);

struct ConstantFitRow {
    double lambda_cut = 0.0;
    double M = 0.0;
    double omega_measure = 0.0;
    int window_size = 0;
    double max_ratio = 0.0;
    double K = 0.0;  // log max_ratio
};

struct ConstantFitResult {
    std::vector<ConstantFitRow> rows;
    double slope_sqrt_lambda = 0.0;  // least-squares slope of K vs sqrt(lambda)
    double r2 = 0.0;
};

ConstantFitResult constant_fit(const HillBasis& basis,
                               const std::vector<double>& lambda_ladder,
                               const SpaceMask& omega, double M);

/// Nonnegative shift V -> V + M: eigenvalues shift by exactly M, eigenvectors
/// unchanged.
HillBasis shift_reduce(const HillBasis& basis, double M);

struct GaugeResult {
    SpaceTimeField y_hat;         // e^{-c t_n} y
    double scheme_residual = 0.0; // residual against the V + c stepping, O(dt^2)
};

GaugeResult gauge_time(const SpaceTimeField& y, const Potential& V, double c);

struct MultiplierResult {
    std::vector<double> w;     // interior nodes of (-1, 1)
    std::vector<double> x;     // node coordinates
    bool bounds_hold = false;  // e^{-sqrt(M)} <= w <= e^{sqrt(M)} pointwise
    int violation_index = -1;
    double min_w = 0.0, max_w = 0.0;
};

/// Positive multiplier: -w'' + V w = 0 on (-1,1), w(+-1) = e^{sqrt(M)},
/// one tridiagonal solve; V must be nonnegative with sup <= M.
MultiplierResult multiplier_solve(const std::function<double(double)>& V_ext,
                                  int n_ext, double M);

struct ExtensionReport {
    double residual_norm = 0.0;   // 5-point residual of -Lap u + V u on (-1,1)^2
    double neumann_defect = 0.0;  // centered d_y u at y = 0 (zero by symmetry)
    double trace_error = 0.0;     // max |u(x,0) - window function| on base nodes
};

/// Harmonic-extension probe u(x,y) = sum a_k cosh(sqrt(lambda_k) y) phi_k^ext(x)
/// on the tensor grid of (-1,1)^2; phi^ext is the odd reflection of the (0, L)
/// eigenvector across x = 0, continued 1-periodically. Window eigenvalues must
/// be nonnegative (shift_reduce first when V changes sign).
ExtensionReport extension_check(const HillBasis& basis, const Potential& V,
                                const SpectralWindow& window,
                                const std::vector<double>& coefficients);

} // namespace heatlab
