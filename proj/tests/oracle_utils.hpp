#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

// Reference implementations kept deliberately naive and structurally
// unrelated to the library's algorithms.
namespace oracles {

// Minimal two-scale cover cost by recursion over every diameter choice at
// the leftmost uncovered point.
inline double brute_force_cover_cost(const std::vector<double>& xs_sorted,
                                     const std::vector<double>& menu, double s,
                                     std::size_t i = 0) {
    if (i >= xs_sorted.size()) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double d : menu) {
        std::size_t j = i + 1;
        while (j < xs_sorted.size() && xs_sorted[j] <= xs_sorted[i] + d) ++j;
        best = std::min(best, std::pow(d, s) + brute_force_cover_cost(xs_sorted, menu, s, j));
    }
    return best;
}

namespace detail {

inline void simplex_grid_rec(const Eigen::MatrixXd& k, std::vector<int>& c, std::size_t idx,
                             int remaining, int steps, double& best,
                             std::vector<int>* best_c) {
    const std::size_t n = static_cast<std::size_t>(k.rows());
    if (idx + 1 == n) {
        c[idx] = remaining;
        double e = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                e += static_cast<double>(c[a]) * static_cast<double>(c[b]) *
                     k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
        e /= static_cast<double>(steps) * static_cast<double>(steps);
        if (e < best) {
            best = e;
            if (best_c) *best_c = c;
        }
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        c[idx] = v;
        simplex_grid_rec(k, c, idx + 1, remaining - v, steps, best, best_c);
    }
}

}  // namespace detail

// Full enumeration of the probability simplex at resolution 1/steps.
inline double simplex_grid_energy(const Eigen::MatrixXd& k, int steps,
                                  std::vector<double>* argmin = nullptr) {
    std::vector<int> c(static_cast<std::size_t>(k.rows()), 0);
    std::vector<int> best_c(c.size(), 0);
    double best = std::numeric_limits<double>::infinity();
    detail::simplex_grid_rec(k, c, 0, steps, steps, best, &best_c);
    if (argmin) {
        argmin->resize(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) (*argmin)[i] = static_cast<double>(best_c[i]) / steps;
    }
    return best;
}

// Pairwise mass-transfer descent: for each ordered pair, move the exactly
// optimal amount of mass between the two coordinates.  Independent of any
// active-set or projected-gradient machinery.
inline double pairwise_descent_energy(const Eigen::MatrixXd& k, std::vector<double> w,
                                      int sweeps = 400) {
    const std::size_t n = static_cast<std::size_t>(k.rows());
    Eigen::VectorXd wv = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(n));
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double moved = 0.0;
        Eigen::VectorXd kw = k * wv;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const Eigen::Index ii = static_cast<Eigen::Index>(i);
                const Eigen::Index jj = static_cast<Eigen::Index>(j);
                const double curv = k(jj, jj) - 2.0 * k(ii, jj) + k(ii, ii);
                if (!(curv > 0.0)) continue;
                double t = (kw[ii] - kw[jj]) / curv;
                t = std::min(t, wv[ii]);   // cannot take more than w_i
                t = std::max(t, -wv[jj]);  // cannot give more than w_j
                if (t == 0.0) continue;
                wv[ii] -= t;
                wv[jj] += t;
                kw += t * (k.col(jj) - k.col(ii));
                moved += std::abs(t);
            }
        }
        if (moved < 1e-15) break;
    }
    return wv.dot(k * wv);
}

// Oracle energy for supports up to ~6 points: coarse enumeration feeding the
// exact pairwise descent.
inline double refined_simplex_energy(const Eigen::MatrixXd& k) {
    std::vector<double> coarse;
    simplex_grid_energy(k, 8, &coarse);
    const double descended = pairwise_descent_energy(k, coarse);
    std::vector<double> uniform(static_cast<std::size_t>(k.rows()),
                                1.0 / static_cast<double>(k.rows()));
    return std::min(descended, pairwise_descent_energy(k, uniform));
}

}  // namespace oracles
