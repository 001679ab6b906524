#include "heatlab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace heatlab {

double dot_h(std::span<const double> u, std::span<const double> v, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return h * s;
}

double norm_h(std::span<const double> u, double h) {
    return std::sqrt(dot_h(u, u, h));
}

namespace {

// Thomas solve of (I + dt/2 A) x = rhs with A = -Lap_h + diag(vmid).
// diag_i = 1 + dt/2 (2/h^2 + vmid_i), off = -dt/(2 h^2).
void step_solve(std::span<const double> vmid, double dt, double h,
                std::vector<double>& scratch_c, std::vector<double>& x,
                int step_index) {
    const int n = static_cast<int>(x.size());
    const double off = -dt / (2.0 * h * h);
    auto diag = [&](int i) { return 1.0 + 0.5 * dt * (2.0 / (h * h) + vmid[i]); };

    double piv = diag(0);
    if (std::abs(piv) < 1e-300)
        throw std::runtime_error("singular step matrix at step " +
                                 std::to_string(step_index));
    scratch_c[0] = off / piv;
    x[0] /= piv;
    for (int i = 1; i < n; ++i) {
        piv = diag(i) - off * scratch_c[i - 1];
        if (std::abs(piv) < 1e-300)
            throw std::runtime_error("singular step matrix at step " +
                                     std::to_string(step_index));
        scratch_c[i] = off / piv;
        x[i] = (x[i] - off * x[i - 1]) / piv;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= scratch_c[i] * x[i + 1];
}

// rhs = (I - dt/2 A) u + dt * f
void step_rhs(std::span<const double> u, std::span<const double> vmid,
              const double* f, double dt, double h, std::vector<double>& rhs) {
    const int n = static_cast<int>(u.size());
    const double ih2 = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        double left = (i > 0) ? u[i - 1] : 0.0;
        double right = (i + 1 < n) ? u[i + 1] : 0.0;
        double Au = (2.0 * u[i] - left - right) * ih2 + vmid[i] * u[i];
        rhs[i] = u[i] - 0.5 * dt * Au + (f ? dt * f[i] : 0.0);
    }
}

} // namespace

SpaceTimeField forward_solve(const SpaceGrid& grid, const TimeGrid& tg,
                             std::span<const double> y0, const Potential& V,
                             const HalfStepSource* source) {
    if (static_cast<int>(y0.size()) != grid.n)
        throw std::invalid_argument("forward_solve: y0 length mismatch");
    SpaceTimeField y(grid, tg);
    std::copy(y0.begin(), y0.end(), y.level(0).begin());

    auto vmid = evaluate_midstep(V, grid, tg);
    std::vector<double> rhs(grid.n), scratch(grid.n);
    for (int m = 0; m < tg.steps; ++m) {
        std::span<const double> v(vmid.data() + static_cast<std::size_t>(m) * grid.n,
                                  static_cast<std::size_t>(grid.n));
        const double* f =
            (source && !source->empty())
                ? source->values.data() + static_cast<std::size_t>(m) * grid.n
                : nullptr;
        step_rhs(y.level(m), v, f, tg.dt, grid.h, rhs);
        step_solve(v, tg.dt, grid.h, scratch, rhs, m);
        std::copy(rhs.begin(), rhs.end(), y.level(m + 1).begin());
    }
    return y;
}

SpaceTimeField adjoint_solve(const SpaceGrid& grid, const TimeGrid& tg,
                             std::span<const double> qT, const Potential& V) {
    if (static_cast<int>(qT.size()) != grid.n)
        throw std::invalid_argument("adjoint_solve: qT length mismatch");
    SpaceTimeField q(grid, tg);
    std::copy(qT.begin(), qT.end(), q.level(tg.steps).begin());

    auto vmid = evaluate_midstep(V, grid, tg);
    std::vector<double> rhs(grid.n), scratch(grid.n);
    for (int m = tg.steps - 1; m >= 0; --m) {
        std::span<const double> v(vmid.data() + static_cast<std::size_t>(m) * grid.n,
                                  static_cast<std::size_t>(grid.n));
        step_rhs(q.level(m + 1), v, nullptr, tg.dt, grid.h, rhs);
        step_solve(v, tg.dt, grid.h, scratch, rhs, m);
        std::copy(rhs.begin(), rhs.end(), q.level(m).begin());
    }
    return q;
}

HalfStepSource observation_trace(const SpaceTimeField& q,
                                 const ObservationRegion& region) {
    const int n = q.grid.n;
    HalfStepSource trace(q.grid, q.tg);
    for (int m = 0; m < q.tg.steps; ++m) {
        double w = region.times.weights.empty() ? q.tg.dt : region.times.weights[m];
        if (w == 0.0) continue;
        double scale = std::sqrt(w / q.tg.dt);
        for (int i : region.mask.indices)
            trace.at(m, n, i) = scale * 0.5 * (q.at(m, i) + q.at(m + 1, i));
    }
    return trace;
}

double duality_gap(const SpaceGrid& grid, const TimeGrid& tg,
                   std::span<const double> y0, std::span<const double> qT,
                   const HalfStepSource* source, const Potential& V) {
    SpaceTimeField y = forward_solve(grid, tg, y0, V, source);
    SpaceTimeField q = adjoint_solve(grid, tg, qT, V);
    double gap = dot_h(y.level(tg.steps), q.level(tg.steps), grid.h) -
                 dot_h(y.level(0), q.level(0), grid.h);
    if (source && !source->empty()) {
        for (int m = 0; m < tg.steps; ++m) {
            double s = 0.0;
            for (int i = 0; i < grid.n; ++i)
                s += source->at(m, grid.n, i) * 0.5 * (q.at(m, i) + q.at(m + 1, i));
            gap -= tg.dt * grid.h * s;
        }
    }
    return gap;
}

DissipativityReport dissipativity_check(const SpaceTimeField& q,
                                        const PotentialNorms& vnorms) {
    const int N = q.tg.steps;
    std::vector<double> norms(N + 1);
    for (int m = 0; m <= N; ++m) norms[m] = norm_h(q.level(m), q.grid.h);

    DissipativityReport rep;
    rep.neg_sup = vnorms.neg_sup;
    rep.holds_c0 = true;
    for (int m1 = 0; m1 <= N; ++m1) {
        for (int m2 = m1 + 1; m2 <= N; ++m2) {
            if (norms[m1] > norms[m2] * (1.0 + 1e-13)) rep.holds_c0 = false;
            if (vnorms.neg_sup > 0.0 && norms[m2] > 0.0 && norms[m1] > norms[m2]) {
                double c = std::log(norms[m1] / norms[m2]) /
                           ((m2 - m1) * q.tg.dt * vnorms.neg_sup);
                rep.c_min = std::max(rep.c_min, c);
            }
        }
    }
    return rep;
}

EnergyReport energy_report(const SpaceTimeField& y) {
    EnergyReport rep;
    const int n = y.grid.n;
    const double h = y.grid.h;
    for (int m = 0; m <= y.tg.steps; ++m) {
        auto lvl = y.level(m);
        double e = dot_h(lvl, lvl, h);
        rep.max_energy = std::max(rep.max_energy, e);
        // forward differences including the boundary gaps (Dirichlet zeros)
        double g = 0.0;
        for (int i = 0; i <= n; ++i) {
            double lo = (i > 0) ? lvl[i - 1] : 0.0;
            double hi = (i < n) ? lvl[i] : 0.0;
            double d = (hi - lo) / h;
            g += d * d;
        }
        g *= h;
        double wt = (m == 0 || m == y.tg.steps) ? 0.5 : 1.0;
        rep.gradient_energy += wt * y.tg.dt * g;
    }
    return rep;
}

} // namespace heatlab
