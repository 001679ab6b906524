#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace heatlab {

/// Ordinary least squares y ~ a + b * f(x) for a fixed transform f.
struct LineFit {
    double a = 0.0;
    double b = 0.0;
    double rss = 0.0;
    double r2 = 0.0;
};

inline LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("line_fit: need >= 2 matching samples");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("line_fit: degenerate abscissae");
    LineFit f;
    f.b = (n * sxy - sx * sy) / det;
    f.a = (sy - f.b * sx) / n;
    double ybar = sy / n, ss_tot = 0.0;
    for (int i = 0; i < n; ++i) {
        double e = y[i] - (f.a + f.b * x[i]);
        f.rss += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = (ss_tot > 0.0) ? 1.0 - f.rss / ss_tot : 1.0;
    return f;
}

/// y ~ a + b * x^p (x must be positive when p is fractional).
inline LineFit power_fit(const std::vector<double>& x, const std::vector<double>& y,
                         double p) {
    std::vector<double> xp(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xp[i] = std::pow(x[i], p);
    return line_fit(xp, y);
}

/// Slope of log(y) against log(x): observed convergence order and similar.
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return line_fit(lx, ly).b;
}

} // namespace heatlab
