#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace heatlab {

using Interval = std::pair<double, double>;
using IntervalList = std::vector<Interval>;

/// Uniform grid of interior nodes on (a, b) with homogeneous Dirichlet
/// boundary; x_i = a + i*h for i = 1..n, h = (b-a)/(n+1).
struct SpaceGrid {
    double a = 0.0;
    double b = 1.0;
    int n = 0;
    double h = 0.0;

    double node(int i) const { return a + (i + 1) * h; } // i = 0..n-1 (array offset)
};

SpaceGrid build_space_grid(double a, double b, int n);

struct TimeGrid {
    double T = 1.0;
    int steps = 0;
    double dt = 0.0;

    double level_time(int n) const { return n * dt; }           // n = 0..steps
    double half_time(int n) const { return (n + 0.5) * dt; }    // n = 0..steps-1
};

TimeGrid build_time_grid(double T, int steps);

/// Observation set in space: a finite union of disjoint intervals, with the
/// derived set of interior node offsets (closed-open membership [lo, hi)).
struct SpaceMask {
    IntervalList intervals;
    std::vector<int> indices;  // array offsets into interior node vectors
    double measure = 0.0;

    bool contains(int offset) const;
};

SpaceMask build_mask(const SpaceGrid& grid, const IntervalList& intervals);

/// Observation set in time: interval union inside (0, T) with one quadrature
/// weight per half-step, w_n = |[t_n, t_{n+1}] ∩ E|.
struct TimeSet {
    double T = 0.0;
    IntervalList intervals;
    std::vector<double> weights;  // size = steps
    double measure = 0.0;
};

TimeSet build_time_set(const TimeGrid& tg, const IntervalList& intervals);

struct ObservationRegion {
    SpaceMask mask;
    TimeSet times;
};

/// Telescoping sequence k_{m+1} = k + gamma^{-m} (k1 - k) toward the anchor k,
/// with a density flag per consecutive gap.
struct DensitySequence {
    double k = 0.0;
    double gamma = 2.0;
    double k1 = 0.0;
    std::vector<double> terms;   // terms[m] = k_{m+1}, m = 0..m_max
    std::vector<bool> flags;     // flags[m]: |E ∩ (k_{m+2}, k_{m+1})| >= gap/3, m < m_max
    bool all_hold = false;
};

DensitySequence density_sequence(const TimeSet& E, double k, double gamma,
                                 double k1, int m_max);

/// Dyadic-ladder search for a k1 making every density flag hold; candidates
/// k + (T-k)*2^{-j}, j = 0..20. Returns empty when none works.
std::optional<double> find_k1(const TimeSet& E, double k, double gamma, int m_max);

/// Length of E ∩ (lo, hi) for an interval-union E.
double overlap_measure(const IntervalList& E, double lo, double hi);

} // namespace heatlab
