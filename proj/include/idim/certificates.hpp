#pragma once

#include <cstddef>
#include <vector>

#include "idim/cloud.hpp"

namespace idim::certificates {

// Worst ball found by a density scan, as mass / diameter^s.
struct BallReport {
    double delta = 0.0;
    std::size_t center = 0;
    double diameter = 0.0;
    double mass = 0.0;
    double ratio = 0.0;
};

struct MassDistributionCertificate {
    double s = 0.0;
    double c = 0.0;
    double a = 0.0;  // smallest witness total mass
    double theta = 0.0;
    std::vector<double> deltas;
    bool passed = false;
    BallReport worst;
};

// Checks mu(B) <= c * diam(B)^s for each witness measure over balls centered
// at cloud points, with diameters on a sqrt(2)-geometric grid spanning
// [delta, delta^theta].  Any set of diameter d lies in such a ball of
// comparable diameter, so a pass certifies a dimension lower bound of s with
// the grid slack folded into c.  Witness masses are raw nonnegative weights
// aligned with the cloud; they need not sum to 1.  The i-th witness is tested
// at deltas[i].
MassDistributionCertificate verify_mass_distribution(
    const PointCloud& cloud, const std::vector<std::vector<double>>& witnesses,
    double s, double c, double theta, const std::vector<double>& deltas);

// Explicit witness for power sequence clouds {k^-p}: point masses delta^s on
// the M largest coordinates, where s = theta/(p+theta) and
// M = ceil(delta^-((s+theta(1-s))/(p+1))), clamped to the cloud size.
// Passes the density test with c = 1 + 1/p.
std::vector<double> power_sequence_witness(const PointCloud& cloud, double p,
                                           double theta, double delta);

struct FrostmanEstimate {
    double s = 0.0;
    std::vector<double> weights;  // probability weights on the cloud
    double c = 0.0;               // measured density constant at s
};

// Largest s (bisection to tol) admitting a probability measure whose mass in
// every ball of radius rho in [delta^(1/theta), delta] is at most
// density_cap * rho^s.  Candidate measures are equilibrium measures at
// exponent s with m = ambient dimension; s = 0 always succeeds with the
// uniform measure.
FrostmanEstimate frostman_exponent(const PointCloud& cloud, double theta,
                                   double delta, double tol,
                                   double density_cap = 2.0);

}  // namespace idim::certificates
