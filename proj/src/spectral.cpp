#include "heatlab/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace heatlab {

HillBasis hill_eigensolve(const Potential& V, const SpaceGrid& grid) {
    if (!V.time_independent_kind())
        throw std::invalid_argument("hill_eigensolve: V must be time-independent");
    const int n = grid.n;
    const double ih2 = 1.0 / (grid.h * grid.h);
    Eigen::VectorXd diag(n), sub(n - 1);
    for (int i = 0; i < n; ++i) diag[i] = 2.0 * ih2 + V(grid.node(i), 0.0);
    sub.setConstant(-ih2);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hill_eigensolve: eigensolver failed");

    HillBasis basis;
    basis.grid = grid;
    basis.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    basis.vectors.resize(static_cast<std::size_t>(n) * n);
    const double scale = 1.0 / std::sqrt(grid.h);  // Euclidean -> <.,.>_h
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            basis.vectors[static_cast<std::size_t>(k) * n + i] =
                es.eigenvectors()(i, k) * scale;

    for (int k = 0; k < n; ++k) {
        double res2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double left = (i > 0) ? basis.vec(k, i - 1) : 0.0;
            double right = (i + 1 < n) ? basis.vec(k, i + 1) : 0.0;
            double Hv = (2.0 * basis.vec(k, i) - left - right) * ih2 +
                        V(grid.node(i), 0.0) * basis.vec(k, i);
            double r = Hv - basis.eigenvalues[k] * basis.vec(k, i);
            res2 += r * r;
        }
        basis.max_residual = std::max(basis.max_residual, std::sqrt(grid.h * res2));
    }
    for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) {
            double g = 0.0;
            for (int i = 0; i < n; ++i) g += basis.vec(j, i) * basis.vec(k, i);
            g *= grid.h;
            basis.gram_deviation =
                std::max(basis.gram_deviation, std::abs(g - (j == k ? 1.0 : 0.0)));
        }
    }
    return basis;
}

SpectralWindow make_window(const HillBasis& basis, double lambda_cut) {
    SpectralWindow w;
    w.lambda_cut = lambda_cut;
    for (int k = 0; k < static_cast<int>(basis.eigenvalues.size()); ++k)
        if (basis.eigenvalues[k] <= lambda_cut) w.indices.push_back(k);
    return w;
}

SpectralRatio spectral_ratio(const HillBasis& basis, const SpectralWindow& window,
                             const SpaceMask& omega, double reg) {
    if (window.indices.empty())
        throw std::invalid_argument("spectral_ratio: empty window");
    if (omega.indices.empty())
        throw std::invalid_argument("spectral_ratio: empty omega");
    const int m = static_cast<int>(window.indices.size());

    Eigen::MatrixXd gram(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
            double s = 0.0;
            for (int i : omega.indices)
                s += basis.vec(window.indices[a], i) * basis.vec(window.indices[b], i);
            gram(a, b) = gram(b, a) = basis.grid.h * s;
        }
    }

    SpectralRatio out;
    // Full observation window: the Gram is the identity by h-orthonormality
    // of the basis, so the ratio is 1 without any numerical work.
    if (static_cast<int>(omega.indices.size()) == basis.grid.n && reg == 0.0) {
        out.lambda_min = 1.0;
        out.max_ratio = 1.0;
        out.iterations = 0;
        out.worst_coefficients.assign(m, 0.0);
        out.worst_coefficients[0] = 1.0;
        return out;
    }
    // lambda_min(M_omega) through the factor M_omega = G G^T with
    // G(j, i) = sqrt(h) phi_j(x_i), i restricted to omega: the smallest
    // singular value of G is representable far below the point where the
    // assembled Gram's smallest eigenvalue underflows working precision.
    const int p = static_cast<int>(omega.indices.size());
    Eigen::MatrixXd G(m, p);
    const double sh = std::sqrt(basis.grid.h);
    for (int a = 0; a < m; ++a)
        for (int c = 0; c < p; ++c)
            G(a, c) = sh * basis.vec(window.indices[a], omega.indices[c]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU);
    out.iterations = 1;
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    if (reg > 0.0) smin = std::sqrt(smin * smin + reg);
    out.lambda_min = smin * smin;
    Eigen::VectorXd z = svd.matrixU().col(svd.singularValues().size() - 1);
    out.worst_coefficients.assign(z.data(), z.data() + m);
    if (!(smin > 0.0)) {
        out.reliable = false;
        out.max_ratio = std::numeric_limits<double>::infinity();
    } else {
        // absolute singular-value error is ~eps * smax; keep a safety margin
        if (smin < 1e-13 * std::max(smax, 1.0)) out.reliable = false;
        out.max_ratio = 1.0 / smin;
    }
    // consistency of the two routes where both are well conditioned
    if (out.reliable && out.lambda_min > 1e-8) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        double direct = es.eigenvalues()(0) + reg;
        if (direct > 0.0 &&
            std::abs(direct - out.lambda_min) > 1e-6 * std::abs(direct))
            out.reliable = false;
    }
    return out;
}

ConstantFitResult constant_fit(const HillBasis& basis,
                               const std::vector<double>& lambda_ladder,
                               const SpaceMask& omega, double M) {
    ConstantFitResult res;
    for (double lc : lambda_ladder) {
        SpectralWindow w = make_window(basis, lc);
        if (w.indices.empty()) continue;
        SpectralRatio r = spectral_ratio(basis, w, omega);
        ConstantFitRow row;
        row.lambda_cut = lc;
        row.M = M;
        row.omega_measure = omega.measure;
        row.window_size = static_cast<int>(w.indices.size());
        row.max_ratio = r.max_ratio;
        row.K = std::log(r.max_ratio);
        res.rows.push_back(row);
    }
    // OLS of K against sqrt(lambda).
    const int n = static_cast<int>(res.rows.size());
    if (n >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (const auto& row : res.rows) {
            double x = std::sqrt(row.lambda_cut);
            sx += x;
            sy += row.K;
            sxx += x * x;
            sxy += x * row.K;
            syy += row.K * row.K;
        }
        double det = n * sxx - sx * sx;
        if (det != 0.0) {
            res.slope_sqrt_lambda = (n * sxy - sx * sy) / det;
            double a = (sy - res.slope_sqrt_lambda * sx) / n;
            double ss_res = 0.0, ss_tot = 0.0, ybar = sy / n;
            for (const auto& row : res.rows) {
                double x = std::sqrt(row.lambda_cut);
                double e = row.K - (a + res.slope_sqrt_lambda * x);
                ss_res += e * e;
                ss_tot += (row.K - ybar) * (row.K - ybar);
            }
            res.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
        }
    }
    return res;
}

HillBasis shift_reduce(const HillBasis& basis, double M) {
    HillBasis shifted = basis;
    for (double& lam : shifted.eigenvalues) lam += M;
    return shifted;
}

GaugeResult gauge_time(const SpaceTimeField& y, const Potential& V, double c) {
    GaugeResult out;
    out.y_hat = y;
    const int n = y.grid.n;
    for (int m = 0; m <= y.tg.steps; ++m) {
        double factor = std::exp(-c * y.tg.level_time(m));
        for (int i = 0; i < n; ++i) out.y_hat.at(m, i) = factor * y.at(m, i);
    }
    // Residual of y_hat against the stepping with potential V + c.
    double res2 = 0.0;
    const double ih2 = 1.0 / (y.grid.h * y.grid.h);
    for (int m = 0; m < y.tg.steps; ++m) {
        double t = y.tg.half_time(m);
        for (int i = 0; i < n; ++i) {
            double bar = 0.5 * (out.y_hat.at(m, i) + out.y_hat.at(m + 1, i));
            double l = (i > 0) ? 0.5 * (out.y_hat.at(m, i - 1) + out.y_hat.at(m + 1, i - 1)) : 0.0;
            double r = (i + 1 < n) ? 0.5 * (out.y_hat.at(m, i + 1) + out.y_hat.at(m + 1, i + 1)) : 0.0;
            double lap = (l - 2.0 * bar + r) * ih2;
            double yt = (out.y_hat.at(m + 1, i) - out.y_hat.at(m, i)) / y.tg.dt;
            double resid = yt - lap + (V(y.grid.node(i), t) + c) * bar;
            res2 += y.grid.h * y.tg.dt * resid * resid;
        }
    }
    out.scheme_residual = std::sqrt(res2);
    return out;
}

MultiplierResult multiplier_solve(const std::function<double(double)>& V_ext,
                                  int n_ext, double M) {
    if (n_ext < 2) throw std::invalid_argument("multiplier_solve: n_ext >= 2");
    const double h = 2.0 / (n_ext + 1);
    const double bc = std::exp(std::sqrt(M));
    MultiplierResult out;
    out.x.resize(n_ext);
    out.w.resize(n_ext);

    std::vector<double> diag(n_ext), rhs(n_ext, 0.0), c(n_ext);
    for (int i = 0; i < n_ext; ++i) {
        out.x[i] = -1.0 + (i + 1) * h;
        double v = V_ext(out.x[i]);
        if (v < 0.0)
            throw std::invalid_argument("multiplier_solve: V must be nonnegative");
        diag[i] = 2.0 / (h * h) + v;
    }
    rhs[0] = bc / (h * h);
    rhs[n_ext - 1] += bc / (h * h);
    const double off = -1.0 / (h * h);
    c[0] = off / diag[0];
    rhs[0] /= diag[0];
    for (int i = 1; i < n_ext; ++i) {
        double piv = diag[i] - off * c[i - 1];
        c[i] = off / piv;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / piv;
    }
    for (int i = n_ext - 2; i >= 0; --i) rhs[i] -= c[i] * rhs[i + 1];
    out.w = rhs;

    out.min_w = bc;
    out.max_w = 0.0;
    out.bounds_hold = true;
    const double lo = std::exp(-std::sqrt(M));
    for (int i = 0; i < n_ext; ++i) {
        out.min_w = std::min(out.min_w, out.w[i]);
        out.max_w = std::max(out.max_w, out.w[i]);
        if ((out.w[i] < lo * (1.0 - 1e-12) || out.w[i] > bc * (1.0 + 1e-12)) &&
            out.violation_index < 0) {
            out.bounds_hold = false;
            out.violation_index = i;
        }
    }
    return out;
}

ExtensionReport extension_check(const HillBasis& basis, const Potential& V,
                                const SpectralWindow& window,
                                const std::vector<double>& coefficients) {
    if (window.indices.size() != coefficients.size())
        throw std::invalid_argument("extension_check: coefficient count mismatch");
    const SpaceGrid& grid = basis.grid;
    if (std::abs(grid.a) > 1e-14)
        throw std::invalid_argument("extension_check: base domain must start at 0");
    const double L = grid.b - grid.a;
    const double h = grid.h;
    const int per = 2 * (grid.n + 1);  // nodes per period 2L

    // Odd reflection across x = 0, continued periodically with period 2L;
    // exact at grid nodes by construction.
    auto phi_ext = [&](int k, int j_ext) {
        int j = ((j_ext % per) + per) % per;  // node index within [0, 2L)
        if (j == 0 || j == grid.n + 1) return 0.0;
        if (j <= grid.n) return basis.vec(k, j - 1);
        return -basis.vec(k, per - j - 1);
    };
    auto v_ext = [&](int j_ext) {
        int j = ((j_ext % per) + per) % per;
        if (j > grid.n + 1) j = per - j;  // even reflection
        if (j == 0) return V(grid.a, 0.0);
        if (j == grid.n + 1) return V(grid.b, 0.0);
        return V(grid.node(j - 1), 0.0);
    };
    for (int k : window.indices)
        if (basis.eigenvalues[k] < 0.0)
            throw std::invalid_argument(
                "extension_check: window eigenvalues must be nonnegative "
                "(apply shift_reduce)");

    // Tensor grid on (-2L, 2L)^2 (the square (-1,1)^2 for the default L = 1/2),
    // spacing h in both directions.
    const int nx = 2 * per;           // intervals across (-2L, 2L)
    const int j0 = -per;              // j_ext of the left edge
    auto u_at = [&](int j_ext, int ky) {
        double y = ky * h;
        double s = 0.0;
        for (std::size_t a = 0; a < window.indices.size(); ++a) {
            int k = window.indices[a];
            s += coefficients[a] * std::cosh(std::sqrt(basis.eigenvalues[k]) * y) *
                 phi_ext(k, j_ext);
        }
        return s;
    };

    ExtensionReport rep;
    const int ky_max = 2 * (grid.n + 1);  // y = ky*h spans (-2L, 2L)
    double res2 = 0.0;
    for (int j = 1; j < nx; ++j) {
        int j_ext = j0 + j;
        for (int ky = -ky_max + 1; ky < ky_max; ++ky) {
            double u = u_at(j_ext, ky);
            double lap = (u_at(j_ext - 1, ky) + u_at(j_ext + 1, ky) +
                          u_at(j_ext, ky - 1) + u_at(j_ext, ky + 1) - 4.0 * u) /
                         (h * h);
            double r = -lap + v_ext(j_ext) * u;
            res2 += h * h * r * r;
        }
        double defect = (u_at(j_ext, 1) - u_at(j_ext, -1)) / (2.0 * h);
        rep.neumann_defect = std::max(rep.neumann_defect, std::abs(defect));
    }
    rep.residual_norm = std::sqrt(res2);
    for (int i = 0; i < grid.n; ++i) {
        double target = 0.0;
        for (std::size_t a = 0; a < window.indices.size(); ++a)
            target += coefficients[a] * basis.vec(window.indices[a], i);
        rep.trace_error =
            std::max(rep.trace_error, std::abs(u_at(i + 1, 0) - target));
    }
    return rep;
}

} // namespace heatlab
