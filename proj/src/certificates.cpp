#include "idim/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "idim/capacity.hpp"

namespace idim::certificates {

namespace {

// Geometric grid with ratio sqrt(2) from lo to hi, endpoints included.
std::vector<double> sqrt2_grid(double lo, double hi) {
    std::vector<double> grid;
    for (double v = lo; v < hi * (1.0 - 1e-9); v *= std::sqrt(2.0)) grid.push_back(v);
    grid.push_back(hi);
    return grid;
}

struct ScanHit {
    std::size_t center = 0;
    double radius = 0.0;
    double mass = 0.0;
    double ratio = 0.0;
};

// Max over centers and radii of mu(closed ball) / denom(radius).  denoms[k]
// belongs to radii[k]; radii must be ascending.
ScanHit max_ball_density(const PointCloud& cloud, const std::vector<double>& masses,
                         const std::vector<double>& radii, const std::vector<double>& denoms) {
    const std::size_t n = cloud.size();
    const int dim = cloud.ambient_dim;
    std::vector<double> r2(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) r2[k] = radii[k] * radii[k];

    ScanHit worst;
    std::vector<double> bucket(radii.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(bucket.begin(), bucket.end(), 0.0);
        const double* xi = cloud.point(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (masses[j] == 0.0) continue;
            const double* xj = cloud.point(j);
            double d2 = 0.0;
            for (int a = 0; a < dim; ++a) {
                const double diff = xi[a] - xj[a];
                d2 += diff * diff;
            }
            const auto slot = std::lower_bound(r2.begin(), r2.end(), d2 * (1.0 - 1e-12));
            if (slot == r2.end()) continue;
            bucket[static_cast<std::size_t>(slot - r2.begin())] += masses[j];
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < radii.size(); ++k) {
            acc += bucket[k];
            const double ratio = acc / denoms[k];
            if (ratio > worst.ratio) worst = ScanHit{i, radii[k], acc, ratio};
        }
    }
    return worst;
}

void check_window(double theta, double delta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
    if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

}  // namespace

MassDistributionCertificate verify_mass_distribution(
    const PointCloud& cloud, const std::vector<std::vector<double>>& witnesses, double s, double c,
    double theta, const std::vector<double>& deltas) {
    cloud.validate();
    if (!(s >= 0.0)) throw std::invalid_argument("exponent s must be nonnegative");
    if (!(c > 0.0)) throw std::invalid_argument("constant c must be positive");
    if (witnesses.size() != deltas.size())
        throw std::invalid_argument("one witness measure per delta required");
    if (witnesses.empty()) throw std::invalid_argument("empty delta list");

    MassDistributionCertificate cert;
    cert.s = s;
    cert.c = c;
    cert.theta = theta;
    cert.deltas = deltas;
    cert.a = std::numeric_limits<double>::infinity();
    cert.passed = true;

    for (std::size_t w = 0; w < witnesses.size(); ++w) {
        const double delta = deltas[w];
        check_window(theta, delta);
        const std::vector<double>& masses = witnesses[w];
        if (masses.size() != cloud.size())
            throw std::invalid_argument("witness " + std::to_string(w) +
                                        " is not aligned with the cloud");
        double total = 0.0;
        for (double m : masses) {
            if (!(m >= 0.0) || !std::isfinite(m))
                throw std::invalid_argument("witness masses must be finite and nonnegative");
            total += m;
        }
        cert.a = std::min(cert.a, total);

        const std::vector<double> diams = sqrt2_grid(delta, std::pow(delta, theta));
        std::vector<double> radii(diams.size());
        std::vector<double> denoms(diams.size());
        for (std::size_t k = 0; k < diams.size(); ++k) {
            radii[k] = 0.5 * diams[k];
            denoms[k] = std::pow(diams[k], s);
        }
        const ScanHit hit = max_ball_density(cloud, masses, radii, denoms);
        if (hit.ratio > cert.worst.ratio) {
            cert.worst = BallReport{delta, hit.center, 2.0 * hit.radius, hit.mass, hit.ratio};
        }
    }
    cert.passed = cert.worst.ratio <= c * (1.0 + 1e-12);
    return cert;
}

std::vector<double> power_sequence_witness(const PointCloud& cloud, double p, double theta,
                                           double delta) {
    cloud.validate();
    if (cloud.ambient_dim != 1)
        throw std::invalid_argument("power sequence witnesses are one-dimensional");
    if (!(p > 0.0)) throw std::invalid_argument("p must be positive");
    check_window(theta, delta);

    const double s = theta / (p + theta);
    const double exponent = (s + theta * (1.0 - s)) / (p + 1.0);
    const std::size_t n = cloud.size();
    const std::size_t m =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(std::pow(delta, -exponent))));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cloud.coords[a] > cloud.coords[b]; });

    std::vector<double> masses(n, 0.0);
    const double atom = std::pow(delta, s);
    for (std::size_t k = 0; k < m; ++k) masses[order[k]] = atom;
    return masses;
}

FrostmanEstimate frostman_exponent(const PointCloud& cloud, double theta, double delta, double tol,
                                   double density_cap) {
    cloud.validate();
    check_window(theta, delta);
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!(density_cap >= 1.0)) throw std::invalid_argument("density_cap must be at least 1");
    const double r_inner = std::pow(delta, 1.0 / theta);
    if (r_inner < 4.0 * cloud.resolution)
        throw std::invalid_argument("scale window reaches below the cloud resolution");

    const std::vector<double> radii = sqrt2_grid(r_inner, delta);
    const std::size_t n = cloud.size();

    const auto measured_c = [&](const std::vector<double>& weights, double s) {
        std::vector<double> denoms(radii.size());
        for (std::size_t k = 0; k < radii.size(); ++k) denoms[k] = std::pow(radii[k], s);
        return max_ball_density(cloud, weights, radii, denoms).ratio;
    };

    FrostmanEstimate best;
    best.weights.assign(n, 1.0 / static_cast<double>(n));
    best.c = measured_c(best.weights, 0.0);

    const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    std::vector<double> warm;
    const auto candidate = [&](double s) {
        capacity::KernelParams params;
        params.r = r_inner;
        params.theta = theta;
        params.s = s;
        params.m = static_cast<double>(cloud.ambient_dim);
        capacity::SolveOptions opt;
        if (!warm.empty()) opt.warm_start = &warm;
        auto eq = capacity::equilibrium_measure(cloud, params, opt);
        warm = eq.weights;
        FrostmanEstimate cand;
        cand.s = s;
        cand.weights = std::move(eq.weights);
        cand.c = measured_c(cand.weights, s);
        // The uniform measure beats the equilibrium one on homogeneous
        // clouds; keep whichever certifies the smaller constant.
        const double uc = measured_c(uniform, s);
        if (uc < cand.c) {
            cand.weights = uniform;
            cand.c = uc;
        }
        return cand;
    };

    double lo = 0.0;
    double hi = static_cast<double>(cloud.ambient_dim);
    {
        FrostmanEstimate top = candidate(hi);
        if (top.c <= density_cap) return top;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        FrostmanEstimate cand = candidate(mid);
        if (cand.c <= density_cap) {
            lo = mid;
            best = std::move(cand);
        } else {
            hi = mid;
        }
    }
    best.s = lo;
    return best;
}

}  // namespace idim::certificates
