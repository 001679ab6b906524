#include "heatlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace heatlab {

PotentialNorms PotentialNorms::from_components(double sup, double grad,
                                               double dt, double neg,
                                               bool approx) {
    PotentialNorms n;
    n.sup = sup;
    n.grad_sup = grad;
    n.dt_sup = dt;
    n.neg_sup = neg;
    n.triple = std::sqrt(sup) + std::sqrt(grad) + std::cbrt(dt);
    n.approximate = approx;
    return n;
}

Potential Potential::constant(double c) {
    Potential p;
    p.kind_ = Kind::Constant;
    p.eval_ = [c](double, double) { return c; };
    p.dx_ = [](double, double) { return 0.0; };
    p.dt_ = [](double, double) { return 0.0; };
    p.closed_form_ = PotentialNorms::from_components(
        std::abs(c), 0.0, 0.0, std::max(0.0, -c));
    return p;
}

Potential Potential::time_independent(std::function<double(double)> v,
                                      std::function<double(double)> dv) {
    Potential p;
    p.kind_ = Kind::TimeIndependent;
    p.eval_ = [v](double x, double) { return v(x); };
    if (dv) p.dx_ = [dv](double x, double) { return dv(x); };
    p.dt_ = [](double, double) { return 0.0; };
    return p;
}

Potential Potential::separable(std::function<double(double)> v0,
                               std::function<double(double)> dv0,
                               std::function<double(double)> g,
                               std::function<double(double)> dg) {
    Potential p;
    p.kind_ = Kind::Separable;
    p.eval_ = [v0, g](double x, double t) { return v0(x) * g(t); };
    if (dv0) p.dx_ = [dv0, g](double x, double t) { return dv0(x) * g(t); };
    if (dg) p.dt_ = [v0, dg](double x, double t) { return v0(x) * dg(t); };
    return p;
}

Potential Potential::sine_poly(double amplitude, int frequency, double beta,
                               double a, double b, double T) {
    if (frequency < 1) throw std::invalid_argument("sine_poly: frequency >= 1");
    const double pi = 3.14159265358979323846;
    const double width = b - a;
    auto v0 = [=](double x) { return amplitude * std::sin(frequency * pi * (x - a) / width); };
    auto dv0 = [=](double x) {
        return amplitude * frequency * pi / width *
               std::cos(frequency * pi * (x - a) / width);
    };
    auto g = [=](double t) { return std::pow(1.0 + t, beta); };
    auto dg = [=](double t) { return beta * std::pow(1.0 + t, beta - 1.0); };
    Potential p = separable(v0, dv0, g, dg);

    // Closed forms: sin(k pi u) on u in [0,1] attains 1; its minimum is 0 for
    // k = 1 and -1 for k >= 2. g = (1+t)^beta is monotone for beta >= 0.
    double s_max = 1.0;
    double s_min = (frequency >= 2) ? -1.0 : 0.0;
    double g_max = std::pow(1.0 + T, std::max(beta, 0.0));
    double g_min = std::pow(1.0 + ((beta >= 0.0) ? 0.0 : T), std::abs(beta) * 0.0 + beta);
    double A = std::abs(amplitude);
    double sup = A * std::max(std::abs(s_max), std::abs(s_min)) * g_max;
    double grad = A * frequency * pi / width * g_max;
    double dt_sup = A * std::max(std::abs(s_max), std::abs(s_min)) *
                    std::abs(beta) * std::pow(1.0 + ((beta >= 1.0) ? T : 0.0), beta - 1.0);
    double v_min = std::min({amplitude * s_min * g_min, amplitude * s_min * g_max,
                             amplitude * s_max * g_min, amplitude * s_max * g_max});
    double neg = std::max(0.0, -v_min);
    p.closed_form_ = PotentialNorms::from_components(sup, grad, dt_sup, neg);
    return p;
}

Potential Potential::sampled(const SpaceGrid& grid, const TimeGrid& tg,
                             std::vector<double> midstep_values) {
    if (static_cast<int>(midstep_values.size()) != grid.n * tg.steps)
        throw std::invalid_argument("Potential::sampled: size mismatch");
    Potential p;
    p.kind_ = Kind::Sampled;
    auto values = std::make_shared<std::vector<double>>(std::move(midstep_values));
    int n = grid.n;
    int steps = tg.steps;
    double a = grid.a, h = grid.h, dt = tg.dt;
    p.eval_ = [=](double x, double t) {
        int i = static_cast<int>(std::lround((x - a) / h)) - 1;
        int m = static_cast<int>(std::lround(t / dt - 0.5));
        i = std::clamp(i, 0, n - 1);
        m = std::clamp(m, 0, steps - 1);
        return (*values)[static_cast<std::size_t>(m) * n + i];
    };
    return p;
}

PotentialNorms norms(const Potential& V, const SpaceGrid& grid,
                     const TimeGrid& tg, int oversample) {
    if (oversample < 1) throw std::invalid_argument("norms: oversample >= 1");
    if (V.closed_form_norms()) return *V.closed_form_norms();

    int nx = (grid.n + 1) * oversample;
    int nt = tg.steps * oversample;
    double dx = (grid.b - grid.a) / nx;
    double dtau = tg.T / nt;

    double sup = 0.0, grad = 0.0, dts = 0.0, neg = 0.0;
    bool approx_dx = !V.dx_;
    bool approx_dt = !V.dt_;
    for (int j = 0; j <= nt; ++j) {
        double t = std::min(j * dtau, tg.T);
        for (int i = 0; i <= nx; ++i) {
            double x = std::min(grid.a + i * dx, grid.b);
            double v = V(x, t);
            sup = std::max(sup, std::abs(v));
            neg = std::max(neg, -std::min(v, 0.0));
            double gx = V.dx_ ? V.dx_(x, t)
                              : (V(std::min(x + dx, grid.b), t) -
                                 V(std::max(x - dx, grid.a), t)) /
                                    (std::min(x + dx, grid.b) - std::max(x - dx, grid.a));
            grad = std::max(grad, std::abs(gx));
            double gt = 0.0;
            if (V.time_independent_kind()) {
                gt = 0.0;
            } else if (V.dt_) {
                gt = V.dt_(x, t);
            } else {
                double tp = std::min(t + dtau, tg.T);
                double tm = std::max(t - dtau, 0.0);
                gt = (V(x, tp) - V(x, tm)) / (tp - tm);
            }
            dts = std::max(dts, std::abs(gt));
        }
    }
    if (V.time_independent_kind()) dts = 0.0;
    return PotentialNorms::from_components(sup, grad, dts, neg,
                                           approx_dx || approx_dt);
}

std::vector<double> evaluate_midstep(const Potential& V, const SpaceGrid& grid,
                                     const TimeGrid& tg) {
    std::vector<double> out(static_cast<std::size_t>(grid.n) * tg.steps);
    for (int m = 0; m < tg.steps; ++m) {
        double t = tg.half_time(m);
        for (int i = 0; i < grid.n; ++i)
            out[static_cast<std::size_t>(m) * grid.n + i] = V(grid.node(i), t);
    }
    return out;
}

} // namespace heatlab
