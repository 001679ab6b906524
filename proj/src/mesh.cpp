#include "heatlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heatlab {

namespace {

void validate_intervals(const IntervalList& intervals, double lo, double hi,
                        const char* what) {
    double prev_hi = lo;
    bool first = true;
    for (const auto& [l, r] : intervals) {
        if (!(l < r))
            throw std::invalid_argument(std::string(what) + ": empty or reversed interval");
        if (l < lo || r > hi)
            throw std::invalid_argument(std::string(what) + ": interval outside domain");
        if (!first && l < prev_hi)
            throw std::invalid_argument(std::string(what) + ": intervals overlap or unsorted");
        prev_hi = r;
        first = false;
    }
}

} // namespace

SpaceGrid build_space_grid(double a, double b, int n) {
    if (!(b > a)) throw std::invalid_argument("build_space_grid: requires b > a");
    if (n < 2) throw std::invalid_argument("build_space_grid: requires n >= 2");
    SpaceGrid g;
    g.a = a;
    g.b = b;
    g.n = n;
    g.h = (b - a) / (n + 1);
    return g;
}

TimeGrid build_time_grid(double T, int steps) {
    if (!(T > 0.0)) throw std::invalid_argument("build_time_grid: requires T > 0");
    if (steps < 1) throw std::invalid_argument("build_time_grid: requires steps >= 1");
    TimeGrid tg;
    tg.T = T;
    tg.steps = steps;
    tg.dt = T / steps;
    return tg;
}

bool SpaceMask::contains(int offset) const {
    return std::binary_search(indices.begin(), indices.end(), offset);
}

SpaceMask build_mask(const SpaceGrid& grid, const IntervalList& intervals) {
    validate_intervals(intervals, grid.a, grid.b, "build_mask");
    SpaceMask mask;
    mask.intervals = intervals;
    for (const auto& [lo, hi] : intervals) mask.measure += hi - lo;
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.node(i);
        for (const auto& [lo, hi] : intervals) {
            if (x >= lo && x < hi) {
                mask.indices.push_back(i);
                break;
            }
        }
    }
    return mask;
}

double overlap_measure(const IntervalList& E, double lo, double hi) {
    double total = 0.0;
    for (const auto& [l, r] : E) {
        double a = std::max(l, lo);
        double b = std::min(r, hi);
        if (b > a) total += b - a;
    }
    return total;
}

TimeSet build_time_set(const TimeGrid& tg, const IntervalList& intervals) {
    validate_intervals(intervals, 0.0, tg.T, "build_time_set");
    TimeSet ts;
    ts.T = tg.T;
    ts.intervals = intervals;
    for (const auto& [lo, hi] : intervals) ts.measure += hi - lo;
    if (!(ts.measure > 0.0))
        throw std::invalid_argument("build_time_set: E must have positive measure");
    ts.weights.resize(tg.steps);
    for (int n = 0; n < tg.steps; ++n)
        ts.weights[n] = overlap_measure(intervals, n * tg.dt, (n + 1) * tg.dt);
    return ts;
}

DensitySequence density_sequence(const TimeSet& E, double k, double gamma,
                                 double k1, int m_max) {
    if (!(gamma > 1.0)) throw std::invalid_argument("density_sequence: requires gamma > 1");
    if (!(k < k1 && k1 <= E.T))
        throw std::invalid_argument("density_sequence: requires k < k1 <= T");
    DensitySequence seq;
    seq.k = k;
    seq.gamma = gamma;
    seq.k1 = k1;
    seq.terms.reserve(m_max + 1);
    for (int m = 0; m <= m_max; ++m)
        seq.terms.push_back(k + std::pow(gamma, -m) * (k1 - k));
    seq.flags.reserve(m_max);
    seq.all_hold = true;
    for (int m = 0; m < m_max; ++m) {
        double upper = seq.terms[m];      // k_{m+1}
        double lower = seq.terms[m + 1];  // k_{m+2}
        bool ok = overlap_measure(E.intervals, lower, upper) >= (upper - lower) / 3.0;
        seq.flags.push_back(ok);
        seq.all_hold = seq.all_hold && ok;
    }
    return seq;
}

std::optional<double> find_k1(const TimeSet& E, double k, double gamma, int m_max) {
    for (int j = 0; j <= 20; ++j) {
        double k1 = k + (E.T - k) * std::pow(2.0, -j);
        if (!(k1 > k)) break;
        if (density_sequence(E, k, gamma, k1, m_max).all_hold) return k1;
    }
    return std::nullopt;
}

} // namespace heatlab
