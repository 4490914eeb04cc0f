#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "idim/cloud.hpp"

namespace idim::projections {

// Linear subspace of R^ambient given by an orthonormal basis, stored as
// `dim` rows of `ambient` entries.
struct Subspace {
    int ambient = 0;
    int dim = 0;
    std::vector<double> basis;

    const double* row(int k) const {
        return basis.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(ambient);
    }
    // Throws std::invalid_argument unless 1 <= dim < ambient and the basis is
    // orthonormal to 1e-12.
    void validate() const;
};

// Rotation-invariant random subspace: orthonormalized standard Gaussian
// vectors, deterministic per seed.
Subspace sample_subspace(int ambient, int dim, std::uint64_t seed);

// Coordinate subspace spanned by the given distinct axes.
Subspace axis_subspace(int ambient, const std::vector<int>& axes);

// Orthogonal projection; coordinates are expressed in the subspace basis.
// Resolution carries over since projections are 1-Lipschitz.
PointCloud project(const PointCloud& cloud, const Subspace& subspace);

struct ProjectionRow {
    std::uint64_t seed = 0;  // seed of the sampled subspace; 0 for axis rows
    std::size_t subspace_id = 0;
    double theta = 0.0;
    double estimate = 0.0;  // cover estimate for the projected cloud
    double profile = 0.0;   // capacity profile of the source cloud at m
    bool bound_ok = true;   // estimate <= profile + bound_slack
};

struct ExperimentOptions {
    double bound_slack = 0.07;
    // Inner scales for the projected-cloud cover estimates; empty derives a
    // halving menu from the cloud resolution.
    std::vector<double> cover_scales;
    // Radii for the capacity profile; empty mirrors the cover scales.
    std::vector<double> profile_radii;
    std::size_t max_profile_points = 4000;
};

struct ProjectionReport {
    std::vector<double> theta_grid;
    std::vector<double> profiles;  // capacity profile per theta
    std::vector<ProjectionRow> random_rows;
    // Coordinate subspaces, reported separately: these are the potential
    // exceptional directions that random sampling almost surely misses.
    std::vector<ProjectionRow> axis_rows;
};

// Projects the cloud onto n_subspaces random m-subspaces plus every
// coordinate m-subspace, estimates each image's intermediate dimension, and
// compares against the capacity profile at m.
ProjectionReport projection_experiment(const PointCloud& cloud, int m,
                                       const std::vector<double>& theta_grid,
                                       std::size_t n_subspaces, std::uint64_t seed,
                                       const ExperimentOptions& options = {});

struct DichotomyReport {
    int m = 0;
    double hausdorff_proxy = 0.0;
    bool expect_full = false;    // proxy >= m
    double median_estimate = 0.0;
    bool observed_full = false;  // median box estimate >= m - 0.1
    bool consistent = false;
    std::vector<double> estimates;  // per sampled subspace, theta = 1
};

// Almost every m-projection has box dimension m exactly when the Hausdorff
// dimension reaches m; checks which side of that dichotomy the sampled box
// estimates support, given a Hausdorff value (or proxy) for the cloud.
DichotomyReport box_dimension_dichotomy(const PointCloud& cloud, int m, double hausdorff_proxy,
                                        std::size_t n_subspaces, std::uint64_t seed,
                                        const ExperimentOptions& options = {});

// CSV rows "seed,subspace_id,theta,estimate,profile,bound_ok"; random rows
// first, then axis rows.
void write_projection_csv(const ProjectionReport& report, std::ostream& out);

}  // namespace idim::projections
