#pragma once

#include "idim/cloud.hpp"
#include "idim/covers.hpp"

#include <vector>

namespace idim::capacity {

// Three-branch radial kernel: 1 inside radius r, (r/|x|)^s out to r^theta,
// then r^(theta(m-s)+s) / |x|^m; continuous at both breakpoints.
struct KernelParams {
    double r = 0.0;
    double theta = 0.0;
    double s = 0.0;
    double m = 0.0;
    void validate() const;
};

double kernel_value(const KernelParams&, double dist);

// Quadratic kernel energy of a nonnegative weight vector on the cloud,
// diagonal terms included.
double energy(const PointCloud&, const std::vector<double>& weights, const KernelParams&);

// Kernel potential of the weighted measure at an arbitrary point x.
double potential(const PointCloud&, const std::vector<double>& weights, const KernelParams&,
                 const std::vector<double>& x);

struct SolveOptions {
    // Relative KKT gap target: stop once energy - min potential <= gap_tol * energy.
    double gap_tol = 1e-7;
    int max_rounds = 120;
    int max_added_per_round = 1024;
    // Previous solution on the same cloud to seed the active set.
    const std::vector<double>* warm_start = nullptr;
    // Per-round trace on stderr.
    bool verbose = false;
};

struct EquilibriumResult {
    std::vector<double> weights;     // probability vector on cloud points
    std::vector<double> potentials;  // (K w)_i for every cloud point
    double energy = 0.0;             // w^T K w
    double capacity = 0.0;           // 1 / energy
    double gap = 0.0;                // energy - min_i potential
    int rounds = 0;
    bool converged = false;

    double support_deviation() const;  // max |potential - energy| over the support
    std::size_t support_size(double w_tol = 1e-9) const;
};

// Energy-minimizing probability measure on the cloud for the given kernel.
EquilibriumResult equilibrium_measure(const PointCloud&, const KernelParams&,
                                      const SolveOptions& = {});

// Root of log C(s) / log(1/r) = s in s over [0, m], where C(s) is the
// equilibrium capacity at radius r.  Clamps to an endpoint when the profile
// does not cross.
double capacity_profile_root(const PointCloud&, double theta, double r, double m,
                             const SolveOptions& = {}, double s_tol = 1e-3);

// Aggregated KKT statistics across every equilibrium solve of a profile run.
struct SolveAudit {
    std::size_t solves = 0;
    std::size_t failures = 0;  // solves that missed the gap target
    double worst_relative_gap = 0.0;
    double worst_relative_deviation = 0.0;
    void record(const EquilibriumResult&);
};

struct ProfileOptions {
    std::vector<double> radii;  // descending
    double m = 0.0;             // homogeneity exponent; 0 means the ambient dimension
    bool slope = true;          // pair radii instead of reading single-radius roots
    std::size_t pair_span = 0;  // 0 picks half the grid
    double s_tolerance = 1e-3;
    // Clouds larger than this are thinned per radius to spacing r/8 (grown
    // until the cap holds) before solving; the plateau cannot resolve finer
    // structure anyway.  0 disables thinning.
    std::size_t max_points = 4000;
    // Fit root(L) = s - c/L over the tail slots (L = mean log window depth)
    // and report the intercept, removing the leading finite-depth bias.
    bool extrapolate = true;
    SolveAudit* audit = nullptr;  // optional sink for per-solve certificates
    SolveOptions solve;
};

// Capacity-route intermediate dimension estimate at the given theta.  With
// slope pairing the root solves
//   [log C(r_deep) - log C(r_shallow)] / [log(1/r_deep) - log(1/r_shallow)] = s,
// which cancels radius-independent factors of the capacity.
covers::DimEstimate capacity_dim(const PointCloud&, double theta, const ProfileOptions&);

// KKT witness bundle on a solved measure, for acceptance checks.
struct KktReport {
    double relative_gap = 0.0;
    double relative_support_deviation = 0.0;
    std::size_t support = 0;
};
KktReport kkt_report(const EquilibriumResult&);

}  // namespace idim::capacity
