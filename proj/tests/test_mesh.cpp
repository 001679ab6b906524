#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "heatlab/mesh.hpp"

#include <cmath>

using namespace heatlab;

TEST_CASE("space grid spacing and nodes") {
    SpaceGrid g = build_space_grid(0.0, 0.5, 3);
    CHECK(g.h == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g.node(0) == doctest::Approx(0.125));
    CHECK(g.node(1) == doctest::Approx(0.25));
    CHECK(g.node(2) == doctest::Approx(0.375));

    CHECK(build_space_grid(0.0, 1.0, 7).h == doctest::Approx(0.125));
    CHECK_THROWS(build_space_grid(0.0, 1.0, 1));
    CHECK_THROWS(build_space_grid(1.0, 1.0, 4));
}

TEST_CASE("mask membership is closed-open") {
    SpaceGrid g = build_space_grid(0.0, 1.0, 7);
    SpaceMask m = build_mask(g, {{0.3, 0.7}});
    REQUIRE(m.indices.size() == 3);
    // nodes 0.375, 0.5, 0.625 -> offsets 2,3,4
    CHECK(m.indices[0] == 2);
    CHECK(m.indices[1] == 3);
    CHECK(m.indices[2] == 4);
    CHECK(m.contains(3));
    CHECK(!m.contains(1));

    SpaceMask full = build_mask(g, {{0.0, 1.0}});
    CHECK(full.indices.size() == 7);

    SpaceMask tiny = build_mask(g, {{0.9, 0.95}});
    CHECK(tiny.indices.empty());
    CHECK(tiny.measure == doctest::Approx(0.05));

    CHECK_THROWS(build_mask(g, {{0.2, 0.5}, {0.4, 0.8}}));  // overlap
    CHECK_THROWS(build_mask(g, {{-0.1, 0.5}}));             // out of domain
}

TEST_CASE("mask discrete measure consistency") {
    SpaceGrid g = build_space_grid(0.0, 1.0, 63);
    for (auto iv : {Interval{0.1, 0.4}, Interval{0.3, 0.7}, Interval{0.05, 0.95}}) {
        SpaceMask m = build_mask(g, {iv});
        CHECK(double(m.indices.size()) * g.h <= m.measure + 2 * g.h);
    }
}

TEST_CASE("time set weights") {
    TimeGrid tg = build_time_grid(1.0, 4);
    TimeSet full = build_time_set(tg, {{0.0, 1.0}});
    for (double w : full.weights) CHECK(w == doctest::Approx(0.25));

    TimeSet e = build_time_set(tg, {{0.1, 0.3}});
    CHECK(e.weights[0] == doctest::Approx(0.15));
    CHECK(e.weights[1] == doctest::Approx(0.05));
    CHECK(e.weights[2] == doctest::Approx(0.0));
    CHECK(e.weights[3] == doctest::Approx(0.0));

    CHECK_THROWS(build_time_set(tg, {}));

    // weights reproduce |E| exactly
    TimeGrid tg2 = build_time_grid(0.7, 13);
    TimeSet e2 = build_time_set(tg2, {{0.1, 0.23}, {0.31, 0.64}});
    double sum = 0.0;
    for (double w : e2.weights) {
        sum += w;
        CHECK(w >= 0.0);
        CHECK(w <= tg2.dt + 1e-15);
    }
    CHECK(sum == doctest::Approx(0.46).epsilon(1e-14));
}

TEST_CASE("density sequence on the dyadic choice") {
    TimeGrid tg = build_time_grid(1.0, 8);
    TimeSet E = build_time_set(tg, {{0.0, 1.0}});
    DensitySequence ds = density_sequence(E, 0.0, 2.0, 1.0, 10);
    REQUIRE(ds.terms.size() == 11);
    // k_{m+1} = 2^{-m}, exact recurrence
    for (int m = 0; m <= 10; ++m)
        CHECK(ds.terms[m] == doctest::Approx(std::pow(2.0, -double(m))).epsilon(1e-15));
    // k1 - k2 = T/2
    CHECK(ds.terms[0] - ds.terms[1] == doctest::Approx(0.5));
    CHECK(ds.all_hold);

    // E filling every gap: flags hold with a density anchor inside E
    TimeSet Eh = build_time_set(tg, {{0.5, 1.0}});
    DensitySequence ds2 = density_sequence(Eh, 0.5, 2.0, 1.0, 8);
    CHECK(ds2.all_hold);
}

TEST_CASE("find_k1 dyadic ladder") {
    TimeGrid tg = build_time_grid(1.0, 8);
    TimeSet E = build_time_set(tg, {{0.0, 1.0}});
    auto k1 = find_k1(E, 0.0, 2.0, 10);
    REQUIRE(k1.has_value());
    DensitySequence ds = density_sequence(E, 0.0, 2.0, *k1, 10);
    CHECK(ds.all_hold);
}

TEST_CASE("overlap measure") {
    IntervalList E = {{0.1, 0.3}, {0.5, 0.9}};
    CHECK(overlap_measure(E, 0.0, 1.0) == doctest::Approx(0.6));
    CHECK(overlap_measure(E, 0.2, 0.6) == doctest::Approx(0.2));
    CHECK(overlap_measure(E, 0.35, 0.45) == doctest::Approx(0.0));
}
