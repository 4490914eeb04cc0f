#include "doctest.h"
#include "idim/capacity.hpp"
#include "idim/covers.hpp"
#include "idim/rng.hpp"
#include "idim/sets.hpp"
#include "oracle_utils.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace idim;
using namespace idim::capacity;

namespace {

PointCloud cloud_of(std::vector<double> coords, int dim, double res) {
    PointCloud c;
    c.ambient_dim = dim;
    c.resolution = res;
    c.coords = std::move(coords);
    return c;
}

Eigen::MatrixXd kernel_matrix(const PointCloud& cloud, const KernelParams& params) {
    const auto n = static_cast<Eigen::Index>(cloud.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double* a = cloud.point(static_cast<std::size_t>(i));
            const double* b = cloud.point(static_cast<std::size_t>(j));
            double q = 0.0;
            for (int d = 0; d < cloud.ambient_dim; ++d) q += (a[d] - b[d]) * (a[d] - b[d]);
            k(i, j) = kernel_value(params, std::sqrt(q));
        }
    }
    return k;
}

}  // namespace

TEST_SUITE("capacity") {

TEST_CASE("kernel branches, breakpoints, monotonicity") {
    const KernelParams k{0.01, 0.5, 1.0, 2.0};

    CHECK(kernel_value(k, 0.0) == 1.0);
    CHECK(kernel_value(k, 0.0099) == 1.0);
    CHECK(kernel_value(k, 0.02) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(kernel_value(k, 0.1) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(kernel_value(k, 0.2) == doctest::Approx(0.01 * std::sqrt(0.01) / 0.04).epsilon(1e-14));

    // continuity at both breakpoints
    for (const KernelParams kp : {KernelParams{0.01, 0.5, 1.0, 2.0}, KernelParams{0.03, 0.7, 0.4, 1.0},
                                  KernelParams{0.001, 0.25, 1.7, 2.0}}) {
        const double rt = std::pow(kp.r, kp.theta);
        CHECK(kernel_value(kp, kp.r * (1 - 1e-12)) ==
              doctest::Approx(kernel_value(kp, kp.r * (1 + 1e-12))).epsilon(1e-10));
        CHECK(kernel_value(kp, rt * (1 - 1e-12)) ==
              doctest::Approx(kernel_value(kp, rt * (1 + 1e-12))).epsilon(1e-10));
    }

    // monotone non-increasing in distance
    double prev = 2.0;
    for (double d = 0.0; d < 1.0; d += 1e-3) {
        const double v = kernel_value(k, d);
        CHECK(v <= prev + 1e-15);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }

    // s = m collapses middle and tail branches to one power law
    const KernelParams sm{0.02, 0.6, 1.3, 1.3};
    for (double d : {0.03, 0.09, 0.3, 0.8}) {
        CHECK(kernel_value(sm, d) == doctest::Approx(std::pow(sm.r / d, sm.s)).epsilon(1e-13));
    }

    CHECK_THROWS_AS((KernelParams{0.0, 0.5, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((KernelParams{1.5, 0.5, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((KernelParams{0.1, 0.0, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((KernelParams{0.1, 1.2, 1.0, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((KernelParams{0.1, 0.5, -0.1, 1.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((KernelParams{0.1, 0.5, 1.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("energy and potential definitions") {
    const KernelParams k{0.05, 0.5, 0.8, 1.0};
    const PointCloud c = cloud_of({0.0, 0.1, 0.35, 0.8}, 1, 1e-3);

    // point mass
    CHECK(energy(c, {1.0, 0.0, 0.0, 0.0}, k) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(potential(c, {1.0, 0.0, 0.0, 0.0}, k, {0.0}) == doctest::Approx(1.0).epsilon(1e-14));

    // uniform on two points
    const double phi = kernel_value(k, 0.1);
    CHECK(energy(c, {0.5, 0.5, 0.0, 0.0}, k) == doctest::Approx(0.5 * (1.0 + phi)).epsilon(1e-14));

    // energy equals the weighted sum of potentials at the atoms
    Rng rng(77);
    std::vector<double> w(4);
    double total = 0.0;
    for (auto& x : w) total += (x = rng.next_uniform());
    for (auto& x : w) x /= total;
    double via_potentials = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        via_potentials += w[i] * potential(c, w, k, {c.coords[i]});
    }
    CHECK(energy(c, w, k) == doctest::Approx(via_potentials).epsilon(1e-13));

    CHECK_THROWS_AS(energy(c, {0.5, 0.5}, k), std::invalid_argument);
    CHECK_THROWS_AS(potential(c, w, k, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("equilibrium on symmetric configurations is exact") {
    const KernelParams k{0.01, 0.5, 0.9, 2.0};

    // single point
    {
        const PointCloud c = cloud_of({0.3, 0.4}, 2, 1e-6);
        const EquilibriumResult eq = equilibrium_measure(c, k);
        CHECK(eq.converged);
        CHECK(eq.energy == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(eq.capacity == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(eq.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    // two points: uniform by symmetry, gamma = (1 + phi(d)) / 2
    {
        const double d = 0.2;
        const PointCloud c = cloud_of({0.0, 0.0, d, 0.0}, 2, 1e-6);
        const EquilibriumResult eq = equilibrium_measure(c, k);
        const double expect = 0.5 * (1.0 + kernel_value(k, d));
        CHECK(eq.converged);
        CHECK(eq.energy == doctest::Approx(expect).epsilon(1e-12));
        CHECK(eq.weights[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(eq.weights[1] == doctest::Approx(0.5).epsilon(1e-10));
    }

    // equilateral triangle: gamma = (1 + 2 phi(d)) / 3
    {
        const double d = 0.3;
        const PointCloud c =
            cloud_of({0.0, 0.0, d, 0.0, 0.5 * d, d * std::sqrt(3.0) / 2.0}, 2, 1e-6);
        const EquilibriumResult eq = equilibrium_measure(c, k);
        const double expect = (1.0 + 2.0 * kernel_value(k, d)) / 3.0;
        CHECK(eq.converged);
        CHECK(eq.energy == doctest::Approx(expect).epsilon(1e-12));
        for (double w : eq.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }

    // two far points: third branch value is tiny, capacity approaches 2
    {
        const KernelParams far{1e-4, 0.5, 1.5, 2.0};
        const PointCloud c = cloud_of({0.0, 0.0, 0.9, 0.0}, 2, 1e-9);
        const EquilibriumResult eq = equilibrium_measure(c, far);
        CHECK(eq.capacity == doctest::Approx(2.0).epsilon(1e-3));
    }
}

TEST_CASE("equilibrium energies match simplex enumeration on small clouds") {
    Rng rng(4251);
    for (int tc = 0; tc < 12; ++tc) {
        const std::size_t n = 3 + tc % 2;  // 3 or 4 points
        std::vector<double> coords(2 * n);
        for (auto& x : coords) x = rng.next_uniform();
        const PointCloud c = cloud_of(std::move(coords), 2, 1e-9);
        const KernelParams k{0.01 + 0.05 * rng.next_uniform(), 0.3 + 0.6 * rng.next_uniform(),
                             0.4 + 1.2 * rng.next_uniform(), 2.0};

        const Eigen::MatrixXd km = kernel_matrix(c, k);
        const int steps = n == 3 ? 600 : 160;
        const double grid_best = oracles::simplex_grid_energy(km, steps);

        const EquilibriumResult eq = equilibrium_measure(c, k);
        CHECK(eq.converged);
        CHECK(eq.energy <= grid_best + 1e-9);     // solver at least as good as the grid
        CHECK(eq.energy >= grid_best - 2e-3);     // and the grid is near-optimal
    }
}

TEST_CASE("equilibrium energies match pairwise-transfer descent up to six points") {
    Rng rng(90210);
    for (int tc = 0; tc < 10; ++tc) {
        const std::size_t n = 5 + tc % 2;
        std::vector<double> coords(n);
        for (auto& x : coords) x = rng.next_uniform();
        const PointCloud c = cloud_of(std::move(coords), 1, 1e-9);
        const KernelParams k{0.02 + 0.03 * rng.next_uniform(), 0.4 + 0.5 * rng.next_uniform(),
                             0.3 + 0.6 * rng.next_uniform(), 1.0};

        const Eigen::MatrixXd km = kernel_matrix(c, k);
        const double oracle = oracles::refined_simplex_energy(km);
        const EquilibriumResult eq = equilibrium_measure(c, k);
        CHECK(eq.converged);
        CHECK(eq.energy == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("kkt certificate holds on a sequence-set cloud") {
    const PointCloud f1 =
        sets::generate_sequence_filled(sets::SequenceSpec::power(1.0), std::pow(2.0, -14));
    REQUIRE(f1.size() > 200);

    for (double s : {0.2, 0.45, 0.8}) {
        for (double r : {1.0 / 64, 1.0 / 512}) {
            const KernelParams k{r, 0.5, s, 1.0};
            const EquilibriumResult eq = equilibrium_measure(f1, k);
            const KktReport rep = kkt_report(eq);
            CHECK(eq.converged);
            CHECK(rep.relative_gap <= 1e-6);
            CHECK(rep.relative_support_deviation <= 1e-4);
            CHECK(rep.support >= 2);

            double mass = 0.0;
            for (double w : eq.weights) {
                CHECK(w >= 0.0);
                mass += w;
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(eq.capacity * eq.energy == doctest::Approx(1.0).epsilon(1e-12));

            // the reported energy is the true quadratic form of the weights
            CHECK(energy(f1, eq.weights, k) == doctest::Approx(eq.energy).epsilon(1e-9));
        }
    }
}

TEST_CASE("energy is convex and monotone in the expected directions") {
    Rng rng(3141);
    const PointCloud c = cloud_of(
        [&] {
            std::vector<double> xs(40);
            for (auto& x : xs) x = rng.next_uniform();
            return xs;
        }(),
        1, 1e-9);

    const KernelParams k{0.02, 0.5, 0.7, 1.0};
    for (int tc = 0; tc < 20; ++tc) {
        std::vector<double> a(c.size()), b(c.size());
        double sa = 0.0, sb = 0.0;
        for (auto& x : a) sa += (x = rng.next_uniform());
        for (auto& x : b) sb += (x = rng.next_uniform());
        std::vector<double> mid(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            a[i] /= sa;
            b[i] /= sb;
            mid[i] = 0.5 * (a[i] + b[i]);
        }
        CHECK(energy(c, mid, k) <= 0.5 * energy(c, a, k) + 0.5 * energy(c, b, k) + 1e-12);
    }

    // kernel decreases pointwise in s, so the minimal energy does too
    const double e_small_s = equilibrium_measure(c, KernelParams{0.02, 0.5, 0.3, 1.0}).energy;
    const double e_large_s = equilibrium_measure(c, KernelParams{0.02, 0.5, 0.9, 1.0}).energy;
    CHECK(e_large_s <= e_small_s + 1e-12);

    // capacity is monotone under set inclusion
    PointCloud sub = c;
    sub.coords.resize(20);
    const double cap_sub = equilibrium_measure(sub, k).capacity;
    const double cap_full = equilibrium_measure(c, k).capacity;
    CHECK(cap_sub <= cap_full + 1e-9);
}

TEST_CASE("profile root: degenerate and interval cases") {
    // single point: capacity 1 for every s, root 0
    const PointCloud one = cloud_of({0.5}, 1, 1e-9);
    CHECK(capacity_profile_root(one, 0.5, 0.01, 1.0) == doctest::Approx(0.0).epsilon(1e-9));

    // dense grid on [0,1] approaches root 1 from below as r shrinks
    PointCloud grid;
    grid.ambient_dim = 1;
    const int n = 2049;
    grid.resolution = 1.0 / (n - 1);
    for (int i = 0; i < n; ++i) grid.coords.push_back(double(i) / (n - 1));
    double prev = 0.0;
    for (double r : {1.0 / 32, 1.0 / 128, 1.0 / 512}) {
        const double root = capacity_profile_root(grid, 1.0, r, 1.0);
        CHECK(root > prev - 1e-3);  // deepening the scale improves the reading
        CHECK(root <= 1.0 + 1e-9);
        prev = root;
    }
    CHECK(prev > 0.5);

    // the bisection objective log C(s)/log(1/r) - s decreases across the bracket
    const double r = 1.0 / 128;
    double prev_g = std::numeric_limits<double>::infinity();
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const EquilibriumResult eq = equilibrium_measure(grid, KernelParams{r, 1.0, s, 1.0});
        const double g = std::log(eq.capacity) / std::log(1.0 / r) - s;
        CHECK(g < prev_g);
        prev_g = g;
    }
}

TEST_CASE("profile roots are monotone in m and match the window dimension on grids") {
    const PointCloud f1 =
        sets::generate_sequence_filled(sets::SequenceSpec::power(1.0), std::pow(2.0, -14));
    const double r = 1.0 / 256;
    const double root_half = capacity_profile_root(f1, 0.5, r, 0.5);
    const double root_one = capacity_profile_root(f1, 0.5, r, 1.0);
    CHECK(root_half <= root_one + 1e-3);
    CHECK(root_one < 0.5);  // far below the ambient bound for this sparse set
}

TEST_CASE("capacity_dim input validation and determinism") {
    const PointCloud f1 =
        sets::generate_sequence_filled(sets::SequenceSpec::power(1.0), std::pow(2.0, -14));

    ProfileOptions po;
    po.m = 1.0;
    CHECK_THROWS_AS(capacity_dim(f1, 0.5, po), std::invalid_argument);  // no radii
    po.radii = {1.0 / 64};
    CHECK_THROWS_AS(capacity_dim(f1, 0.5, po), std::invalid_argument);  // slope needs 2
    po.radii = {1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
    CHECK_THROWS_AS(capacity_dim(f1, 0.0, po), std::invalid_argument);
    CHECK_THROWS_AS(capacity_dim(f1, 1.5, po), std::invalid_argument);

    const covers::DimEstimate a = capacity_dim(f1, 0.5, po);
    const covers::DimEstimate b = capacity_dim(f1, 0.5, po);
    CHECK(a.value == b.value);
    CHECK(a.scale_roots.size() == b.scale_roots.size());
    for (std::size_t i = 0; i < a.scale_roots.size(); ++i) {
        CHECK(a.scale_roots[i].second == b.scale_roots[i].second);
    }
    CHECK(a.lower <= a.value);
    CHECK(a.value <= a.upper);
}

TEST_CASE("warm starts reproduce the cold solution") {
    const PointCloud f1 =
        sets::generate_sequence_filled(sets::SequenceSpec::power(1.0), std::pow(2.0, -12));
    const KernelParams k{1.0 / 128, 0.5, 0.4, 1.0};

    const EquilibriumResult cold = equilibrium_measure(f1, k);
    SolveOptions warm_opt;
    warm_opt.warm_start = &cold.weights;
    const EquilibriumResult warm = equilibrium_measure(f1, k, warm_opt);

    CHECK(cold.converged);
    CHECK(warm.converged);
    CHECK(warm.rounds <= cold.rounds);
    CHECK(warm.energy == doctest::Approx(cold.energy).epsilon(1e-10));
}

}  // TEST_SUITE
