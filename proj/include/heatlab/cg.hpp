#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace heatlab {

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

inline double edot(std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

/// Plain CG on a symmetric PSD operator; relative-residual stopping rule.
/// Keeps the lowest-residual iterate and stops once the residual has stalled
/// (no meaningful improvement over a trailing window), which matters for
/// severely ill-conditioned operators where late iterations only inflate the
/// iterate along near-null directions without reducing the residual.
/// Returns the iteration count; final relative residual via out-parameter.
inline int conjugate_gradient(const ApplyFn& apply, std::span<const double> b,
                              std::span<double> x, double tol, int max_iter,
                              double* final_residual = nullptr) {
    const std::size_t n = b.size();
    std::vector<double> r(b.begin(), b.end());
    std::fill(x.begin(), x.end(), 0.0);
    std::vector<double> p = r, ap(n);
    double rr = edot(r, r);
    double b_norm = std::sqrt(rr);
    if (b_norm == 0.0) {
        if (final_residual) *final_residual = 0.0;
        return 0;
    }
    std::vector<double> x_best(x.begin(), x.end());
    double rr_best = rr;
    double rr_mark = rr;  // last residual that counted as real progress
    const int stall_window = 50;
    int since_mark = 0;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::sqrt(rr) <= tol * b_norm) break;
        apply(p, ap);
        double pap = edot(p, ap);
        if (pap <= 0.0) break;  // PSD breakdown; keep best iterate
        double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_new = edot(r, r);
        double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        if (rr < rr_best) {
            rr_best = rr;
            std::copy(x.begin(), x.end(), x_best.begin());
        }
        if (rr < 0.99 * rr_mark) {
            rr_mark = rr;
            since_mark = 0;
        } else if (++since_mark >= stall_window) {
            ++it;
            break;
        }
    }
    if (rr_best < rr) {
        std::copy(x_best.begin(), x_best.end(), x.begin());
        rr = rr_best;
    }
    if (final_residual) *final_residual = std::sqrt(rr) / b_norm;
    return it;
}

} // namespace heatlab
