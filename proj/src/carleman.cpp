#include "heatlab/carleman.hpp"

#include <cmath>
#include <stdexcept>

#include "heatlab/rng.hpp"

namespace heatlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double XiFunction::value(double x) const {
    double u = (x - a) / (b - a);
    return u * (1.0 - u) * std::exp(mu * (u - c_hat));
}

double XiFunction::deriv(double x) const {
    double w = b - a;
    double u = (x - a) / w;
    return std::exp(mu * (u - c_hat)) * ((1.0 - 2.0 * u) + mu * u * (1.0 - u)) / w;
}

double XiFunction::deriv2(double x) const {
    double w = b - a;
    double u = (x - a) / w;
    return std::exp(mu * (u - c_hat)) *
           (-2.0 + 2.0 * mu * (1.0 - 2.0 * u) + mu * mu * u * (1.0 - u)) / (w * w);
}

XiFunction build_xi(const SpaceGrid& grid, double omega_prime_center) {
    if (!(omega_prime_center > grid.a && omega_prime_center < grid.b))
        throw std::invalid_argument("build_xi: center outside domain");
    XiFunction xi;
    xi.a = grid.a;
    xi.b = grid.b;
    xi.center = omega_prime_center;
    xi.c_hat = (omega_prime_center - grid.a) / (grid.b - grid.a);
    xi.mu = (2.0 * xi.c_hat - 1.0) / (xi.c_hat * (1.0 - xi.c_hat));
    xi.sup = xi.c_hat * (1.0 - xi.c_hat);

    // 16x oversampled verification sweep of the shape invariants.
    int samples = 16 * (grid.n + 1);
    double delta = 1e300;
    int sign_changes = 0;
    double prev = xi.deriv(grid.a + 0.5 * grid.h / 16.0);
    for (int j = 1; j <= samples; ++j) {
        double x = grid.a + (grid.b - grid.a) * j / (samples + 1.0);
        double v = xi.value(x);
        if (!(v > 0.0)) throw std::runtime_error("build_xi: positivity sweep failed");
        double d = xi.deriv(x);
        if (d * prev < 0.0) ++sign_changes;
        prev = d;
        if (std::abs(x - xi.center) > 0.05 * (grid.b - grid.a))
            delta = std::min(delta, std::abs(d));
    }
    if (sign_changes != 1)
        throw std::runtime_error("build_xi: xi' must change sign exactly once");
    xi.delta_xi = delta;
    return xi;
}

WeightField weights(const XiFunction& xi, const CarlemanParams& params,
                    const SpaceGrid& grid, const TimeGrid& tg) {
    const int n = grid.n;
    const double lam = params.lambda;
    const double s = params.s;
    WeightField w;
    std::size_t total = static_cast<std::size_t>(tg.steps) * n;
    w.beta.resize(total);
    w.eta.resize(total);
    w.dt_beta.resize(total);
    w.grad_beta.resize(total);
    w.grad_eta.resize(total);
    w.lap_beta.resize(total);
    for (int m = 0; m < tg.steps; ++m) {
        double t = tg.half_time(m);
        double mt = t * (tg.T - t);
        for (int i = 0; i < n; ++i) {
            double x = grid.node(i);
            double xv = xi.value(x);
            double xd = xi.deriv(x);
            double xdd = xi.deriv2(x);
            double a = lam * (s * xi.sup + xv);
            std::size_t idx = static_cast<std::size_t>(m) * n + i;
            double eta = std::exp(a) / mt;
            // beta = e^a (e^{lam(s sup - xv)} - 1)/m, evaluated via expm1 so
            // near-cancellation at xv -> s*sup stays accurate.
            double beta = std::exp(a) * std::expm1(lam * (s * xi.sup - xv)) / mt;
            w.eta[idx] = eta;
            w.beta[idx] = beta;
            w.dt_beta[idx] = -beta * (tg.T - 2.0 * t) / mt;
            w.grad_beta[idx] = -lam * eta * xd;
            w.grad_eta[idx] = lam * eta * xd;
            w.lap_beta[idx] = -lam * lam * eta * xd * xd - lam * eta * xdd;
        }
    }
    return w;
}

double tau0(double T, const PotentialNorms& n, double C) {
    if (!(C > 0.0)) throw std::invalid_argument("tau0: C > 0");
    return C * (T + T * T + T * T * n.triple);
}

CarlemanSides carleman_sides(const SpaceTimeField& w, const Potential& V,
                             const XiFunction& xi, const CarlemanParams& params,
                             const SpaceMask& omega) {
    const SpaceGrid& grid = w.grid;
    const TimeGrid& tg = w.tg;
    const int n = grid.n;
    const double h = grid.h;
    const double dt = tg.dt;
    const double lam = params.lambda;
    const double s = params.s;
    const double tau = params.tau;
    const double t3l4 = tau * tau * tau * lam * lam * lam * lam;
    const double tl2 = tau * lam * lam;

    std::vector<char> in_omega(n, 0);
    for (int i : omega.indices) in_omega[i] = 1;

    CarlemanSides out;
    std::vector<double> wbar(n);
    for (int m = 0; m < tg.steps; ++m) {
        double t = tg.half_time(m);
        double mt = t * (tg.T - t);
        for (int i = 0; i < n; ++i) wbar[i] = 0.5 * (w.at(m, i) + w.at(m + 1, i));
        for (int i = 0; i < n; ++i) {
            double x = grid.node(i);
            double a = lam * (s * xi.sup + xi.value(x));
            double log_eta = a - std::log(mt);
            double beta = std::exp(a) * std::expm1(lam * (s * xi.sup - xi.value(x))) / mt;
            double e0 = -2.0 * tau * beta;  // log of the base weight

            double left = (i > 0) ? wbar[i - 1] : 0.0;
            double right = (i + 1 < n) ? wbar[i + 1] : 0.0;
            double lap = (left - 2.0 * wbar[i] + right) / (h * h);
            double grad = (right - left) / (2.0 * h);
            double wt = (w.at(m + 1, i) - w.at(m, i)) / dt;
            double f = wt + lap + V(x, t) * wbar[i];

            double q = h * dt;
            double w3 = std::exp(e0 + 3.0 * log_eta);
            out.lhs3 += q * t3l4 * w3 * wbar[i] * wbar[i];
            out.lhs1 += q * tl2 * std::exp(e0 + log_eta) * grad * grad;
            out.lhs_neg1 += q / tau * std::exp(e0 - log_eta) * (lap * lap + wt * wt);
            out.rhs_f += q * std::exp(e0) * f * f;
            if (in_omega[i]) out.rhs_local += q * t3l4 * w3 * wbar[i] * wbar[i];
        }
    }
    double lhs = out.lhs3 + out.lhs1 + out.lhs_neg1;
    double rhs = params.C1 * (out.rhs_f + out.rhs_local);
    out.holds = rhs >= lhs;
    out.slack = (lhs > 0.0) ? rhs / lhs : (rhs >= 0.0 ? 1e300 : 0.0);
    return out;
}

std::vector<SpaceTimeField> make_corpus(const SpaceGrid& grid, const TimeGrid& tg,
                                        int count, std::uint64_t seed) {
    std::vector<SpaceTimeField> corpus;
    corpus.reserve(count);
    for (int c = 0; c < count; ++c) {
        SplitMix64 rng(derive_seed(seed, c));
        SpaceTimeField w(grid, tg);
        for (int k = 1; k <= 8; ++k) {
            double amp = 1.0 / (k * k);
            double ak = rng.gaussian() * amp;
            double bk = rng.gaussian() * amp;
            for (int m = 0; m <= tg.steps; ++m) {
                double t = tg.level_time(m);
                double tprof = ak * std::cos(k * kPi * t / tg.T) +
                               bk * std::sin(k * kPi * t / tg.T);
                for (int i = 0; i < grid.n; ++i) {
                    double u = (grid.node(i) - grid.a) / (grid.b - grid.a);
                    w.at(m, i) += tprof * std::sin(k * kPi * u);
                }
            }
        }
        corpus.push_back(std::move(w));
    }
    return corpus;
}

double calibrate_c1(const std::vector<SpaceTimeField>& corpus, const Potential& V,
                    const XiFunction& xi, CarlemanParams params,
                    const SpaceMask& omega, double tau_cal) {
    params.tau = tau_cal;
    params.C1 = 1.0;
    double c1 = 0.0;
    for (const auto& w : corpus) {
        CarlemanSides s = carleman_sides(w, V, xi, params, omega);
        double rhs = s.rhs_f + s.rhs_local;
        double lhs = s.lhs3 + s.lhs1 + s.lhs_neg1;
        if (rhs > 0.0) c1 = std::max(c1, lhs / rhs);
    }
    return c1;
}

TauSearchResult min_tau_search(const std::vector<SpaceTimeField>& corpus,
                               const Potential& V, const XiFunction& xi,
                               CarlemanParams params, const SpaceMask& omega,
                               double tau_hi) {
    if (!(tau_hi > 0.0)) throw std::invalid_argument("min_tau_search: tau_hi > 0");

    auto holds_all = [&](double tau) {
        CarlemanParams p = params;
        p.tau = tau;
        for (const auto& w : corpus)
            if (!carleman_sides(w, V, xi, p, omega).holds) return false;
        return true;
    };

    TauSearchResult res;
    if (!holds_all(tau_hi)) return res;  // not found

    double lo = 0.0, hi = tau_hi;
    for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) break;
        if (holds_all(mid))
            hi = mid;
        else
            lo = mid;
    }
    res.found = true;
    res.tau_star = hi;
    res.degenerate = (lo == 0.0);  // held all the way down
    res.verified = holds_all(res.tau_star);
    res.refuted_below = !res.degenerate && !holds_all(res.tau_star / 1.05);
    res.monotone_warning = !res.verified || (!res.degenerate && !res.refuted_below);
    return res;
}

} // namespace heatlab
