#include "doctest.h"
#include "idim/sets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace idim;
using namespace idim::sets;

namespace {

double min_dist_to(const PointCloud& c, double x, double y) {
    double best = 1e300;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double* p = c.point(i);
        best = std::min(best, std::hypot(p[0] - x, p[1] - y));
    }
    return best;
}

}  // namespace

TEST_SUITE("sets") {

TEST_CASE("power sequence lists 0 and k^-p down to the count") {
    const PointCloud c = generate_sequence(SequenceSpec::power(1.0), 4);
    REQUIRE(c.size() == 5);
    CHECK(c.coords[0] == 0.0);
    CHECK(c.coords[1] == 1.0);
    CHECK(c.coords[2] == 0.5);
    CHECK(c.coords[3] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(c.coords[4] == 0.25);
    CHECK(c.resolution == 0.25);
}

TEST_CASE("log-reciprocal sequence values") {
    const PointCloud c = generate_sequence(SequenceSpec::log_recip(), 3);
    REQUIRE(c.size() == 4);
    CHECK(c.coords[1] == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-15));
    CHECK(c.coords[2] == doctest::Approx(1.0 / std::log(3.0)).epsilon(1e-15));
    CHECK(c.coords[3] == doctest::Approx(1.0 / std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("sequence gaps decrease for every built-in kind") {
    for (const auto& spec : {SequenceSpec::power(0.5), SequenceSpec::power(2.0),
                             SequenceSpec::log_recip(), SequenceSpec::exp_decay()}) {
        double prev_gap = 1e300;
        for (int k = 1; k <= 50; ++k) {
            const double gap = spec.value(k) - spec.value(k + 1);
            CHECK(gap > 0.0);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
    }
}

TEST_CASE("custom sequence validation rejects non-monotone data") {
    CHECK_THROWS(SequenceSpec::custom([](double k) { return std::sin(k); },
                                      [](double k) { return std::cos(k); }));
    CHECK_NOTHROW(SequenceSpec::custom([](double k) { return 1.0 / k; },
                                       [](double k) { return -1.0 / (k * k); }));
}

TEST_CASE("filled sequence keeps exact heads and grids the tail") {
    const auto spec = SequenceSpec::power(0.5);
    const double h = 1e-3;
    PointCloud c = generate_sequence_filled(spec, h);
    CHECK(c.resolution == h);
    CHECK(c.size() == filled_sequence_count(spec, h));

    std::set<double> vals(c.coords.begin(), c.coords.end());
    CHECK(vals.count(0.0) == 1);
    CHECK(vals.count(1.0) == 1);  // f(1)
    CHECK(vals.count(spec.value(2.0)) == 1);

    // Gaps above h may only separate exact sequence values; the rest of the
    // cloud is h-dense.
    std::sort(c.coords.begin(), c.coords.end());
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double gap = c.coords[i] - c.coords[i - 1];
        if (gap <= h * (1.0 + 1e-12)) continue;
        const double k = std::pow(c.coords[i], -1.0 / 0.5);
        CHECK(std::abs(k - std::round(k)) < 1e-9);
        CHECK(c.coords[i - 1] == doctest::Approx(spec.value(std::round(k) + 1.0)).epsilon(1e-12));
    }
    // Count scales like h^{-1/(p+1)} for the p=1/2 sequence, i.e. h^{-2/3}.
    CHECK(static_cast<double>(c.size()) < 3.0 * std::pow(h, -2.0 / 3.0));
    CHECK(static_cast<double>(c.size()) > 0.5 * std::pow(h, -2.0 / 3.0));
}

TEST_CASE("circle family covers each ring at the stated resolution") {
    const double p = 1.0, delta_min = 1.0 / 16.0;
    const PointCloud c = generate_circles(p, delta_min);
    CHECK(c.ambient_dim == 2);
    CHECK(c.resolution == delta_min / 4.0);
    CHECK(min_dist_to(c, 0.0, 0.0) == 0.0);
    // Ring radii are k^-1 for k up to (delta_min/4)^-1 = 64.
    CHECK(min_dist_to(c, 1.0, 0.0) == 0.0);
    CHECK(min_dist_to(c, 1.0 / 64.0, 0.0) < 1e-12);
    // A generic point on the unit circle is within one chord step.
    CHECK(min_dist_to(c, std::cos(0.1), std::sin(0.1)) <= delta_min / 4.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(std::hypot(c.point(i)[0], c.point(i)[1]) <= 1.0 + 1e-12);
    }
}

TEST_CASE("spiral samples trace (t^-p sin pi t, t^-q cos pi t)") {
    const double step = 1e-3;
    const PointCloud c = generate_spiral(1.0, 1.0, 40.0, step);
    // t = 1 gives (0, -1); t = 1.5 gives (-2/3, 0).
    CHECK(c.coords[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.coords[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(min_dist_to(c, -2.0 / 3.0, 0.0) <= step);
    // Consecutive samples stay within the step budget.
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double* a = c.point(i - 1);
        const double* b = c.point(i);
        CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) <= step * (1.0 + 1e-9));
    }
    CHECK(c.resolution == doctest::Approx(step + 2.0 / 38.0));
}

TEST_CASE("sine curve samples trace (t^-p, sin pi t)") {
    const double step = 1e-3;
    const PointCloud c = generate_sine_curve(1.0, 30.0, step);
    CHECK(c.coords[0] == doctest::Approx(1.0));
    CHECK(c.coords[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(min_dist_to(c, 1.0 / 1.5, -1.0) <= step);  // t = 1.5 trough
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double* a = c.point(i - 1);
        const double* b = c.point(i);
        CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) <= step * (1.0 + 1e-9));
    }
}

TEST_CASE("carpet cylinders enumerate corner points") {
    CarpetSpec spec;
    spec.m = 2;
    spec.n = 3;
    spec.digits = {{0, 0}, {1, 1}, {1, 2}};
    spec.validate();
    CHECK(spec.digit_count() == 3);
    CHECK(spec.occupied_columns() == 2);
    CHECK(spec.column_counts() == std::vector<int>{1, 2});

    const PointCloud lvl1 = generate_carpet(spec, 1);
    REQUIRE(lvl1.size() == 3);
    CHECK(min_dist_to(lvl1, 0.0, 0.0) == 0.0);
    CHECK(min_dist_to(lvl1, 0.5, 1.0 / 3.0) < 1e-15);
    CHECK(min_dist_to(lvl1, 0.5, 2.0 / 3.0) < 1e-15);

    const PointCloud lvl5 = generate_carpet(spec, 5);
    REQUIRE(lvl5.size() == 243);
    for (std::size_t i = 0; i < lvl5.size(); ++i) {
        CHECK(lvl5.point(i)[0] >= 0.0);
        CHECK(lvl5.point(i)[0] < 1.0);
        CHECK(lvl5.point(i)[1] >= 0.0);
        CHECK(lvl5.point(i)[1] < 1.0);
    }
    CHECK(lvl5.resolution == doctest::Approx(std::hypot(std::pow(2.0, -5), std::pow(3.0, -5))));

    CarpetSpec bad = spec;
    bad.digits.push_back({1, 1});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(generate_carpet(spec, 30), std::invalid_argument);
}

TEST_CASE("product concatenates coordinates pairwise") {
    const PointCloud e = generate_sequence(SequenceSpec::power(1.0), 3);
    const PointCloud f = generate_sequence(SequenceSpec::power(2.0), 2);
    const PointCloud prod = product_set(e, f);
    CHECK(prod.ambient_dim == 2);
    CHECK(prod.size() == e.size() * f.size());
    CHECK(prod.resolution == doctest::Approx(std::hypot(e.resolution, f.resolution)));
    CHECK(min_dist_to(prod, 0.5, 0.25) < 1e-15);
    CHECK(min_dist_to(prod, 1.0 / 3.0, 1.0) < 1e-15);
}

TEST_CASE("union merges points closer than the finer resolution") {
    PointCloud e;
    e.ambient_dim = 1;
    e.resolution = 0.25;
    e.coords = {0.0, 1.0, 2.0};
    PointCloud f;
    f.ambient_dim = 1;
    f.resolution = 0.25;
    f.coords = {1.1, 3.0};
    const PointCloud u = union_set(e, f);
    CHECK(u.size() == 4);  // 1.1 collapses into 1.0
    CHECK(u.resolution == 0.25);

    f.resolution = 0.05;
    const PointCloud v = union_set(e, f);
    CHECK(v.size() == 5);  // finer tolerance keeps 1.1
    CHECK(v.resolution == 0.25);
}

}  // TEST_SUITE
