#pragma once

#include "idim/cloud.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace idim::stochastic {

// One sampled path of index-alpha fractional Brownian motion R -> R^m,
// evaluated exactly at the given sites.
struct FbmPath {
    double alpha = 0.0;
    std::vector<double> sites;   // strictly increasing, >= 0
    std::vector<double> values;  // site-major: values[i*m + j]
    std::size_t m = 1;
    std::uint64_t seed = 0;
    bool jittered = false;  // covariance needed a diagonal bump to factor
    void validate() const;
};

// Exact joint Gaussian sample via Cholesky factorization of the fBm
// covariance R(s,t) = (|s|^2a + |t|^2a - |s-t|^2a) / 2, one independent copy
// per coordinate.  Deterministic per seed; factorizations are cached per
// (sites, alpha) and shared across seeds.
FbmPath sample_fbm(std::vector<double> sites, double alpha, std::size_t m, std::uint64_t seed);

// Image {B(x) : x in F} of a one-dimensional cloud whose points all occur
// among the path's sites.  Resolution is the empirical modulus of
// continuity: the largest image displacement across consecutive gaps of F.
PointCloud image_cloud(const PointCloud& f, const FbmPath& path);

struct BrownianRow {
    std::uint64_t seed = 0;
    double theta = 0.0;
    double estimate = 0.0;
    double formula = 0.0;       // theta / (p*alpha + theta)
    double holder_bound = 0.0;  // theta / (alpha*(p + theta))
};

struct BrownianReport {
    double p = 0.0;
    double alpha = 0.0;
    std::vector<double> theta_grid;
    std::vector<BrownianRow> rows;      // seed-major, theta inner
    std::vector<double> mean_estimate;  // per theta over seeds
    std::vector<double> spread;         // max - min per theta
};

// Covering estimates of dim_theta for images of the sequence set F_p under
// independent fBm paths, against the closed form theta/(p*alpha + theta) and
// the Holder upper bound theta/(alpha*(p + theta)).
BrownianReport brownian_dim_check(double p, double alpha, const std::vector<double>& theta_grid,
                                  int n_seeds, std::uint64_t seed0 = 1);

// CSV rows `seed,theta,estimate,formula,holder_bound`.
void write_brownian_csv(const BrownianReport&, std::ostream&);

}  // namespace idim::stochastic
