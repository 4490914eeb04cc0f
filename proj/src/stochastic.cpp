#include "idim/stochastic.hpp"

#include "idim/covers.hpp"
#include "idim/rng.hpp"
#include "idim/sets.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace idim::stochastic {

namespace {

constexpr std::size_t kSiteCap = 4096;

double fbm_cov(double s, double t, double two_alpha) {
    return 0.5 * (std::pow(std::abs(s), two_alpha) + std::pow(std::abs(t), two_alpha) -
                  std::pow(std::abs(s - t), two_alpha));
}

struct Factor {
    Eigen::MatrixXd chol;  // lower triangular
    bool jittered = false;
};

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Factorizations are cubic in the site count; share them across seeds.
std::shared_ptr<const Factor> factor_for(const std::vector<double>& sites, double alpha) {
    static std::mutex mu;
    static std::map<std::pair<std::uint64_t, std::uint64_t>, std::shared_ptr<const Factor>> cache;

    std::uint64_t h = fnv1a(sites.data(), sites.size() * sizeof(double));
    h = fnv1a(&alpha, sizeof(double), h);
    const std::pair<std::uint64_t, std::uint64_t> key{h, sites.size()};
    {
        std::lock_guard<std::mutex> lock(mu);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::MatrixXd cov(n, n);
    const double two_alpha = 2.0 * alpha;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            cov(i, j) = fbm_cov(sites[static_cast<std::size_t>(i)],
                                sites[static_cast<std::size_t>(j)], two_alpha);
            cov(j, i) = cov(i, j);
        }
    }

    auto factor = std::make_shared<Factor>();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-12;
        llt.compute(cov);
        factor->jittered = true;
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("fbm: covariance not positive definite even with jitter");
        }
    }
    factor->chol = llt.matrixL();

    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(factor)).first->second;
}

}  // namespace

void FbmPath::validate() const {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("fbm: alpha must be in (0,1)");
    if (m < 1) throw std::invalid_argument("fbm: m must be >= 1");
    if (sites.empty()) throw std::invalid_argument("fbm: no sites");
    if (values.size() != sites.size() * m) throw std::invalid_argument("fbm: value count mismatch");
    for (std::size_t i = 0; i + 1 < sites.size(); ++i) {
        if (!(sites[i] < sites[i + 1])) throw std::invalid_argument("fbm: sites must increase strictly");
    }
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i] == 0.0) {
            for (std::size_t j = 0; j < m; ++j) {
                if (std::abs(values[i * m + j]) > 1e-4) {
                    throw std::invalid_argument("fbm: path must vanish at the origin");
                }
            }
        }
    }
}

FbmPath sample_fbm(std::vector<double> sites, double alpha, std::size_t m, std::uint64_t seed) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("fbm: alpha must be in (0,1)");
    if (m < 1) throw std::invalid_argument("fbm: m must be >= 1");
    if (sites.empty()) throw std::invalid_argument("fbm: no sites");
    if (sites.size() > kSiteCap) throw std::invalid_argument("fbm: too many sites");

    const std::shared_ptr<const Factor> factor = factor_for(sites, alpha);
    const auto n = static_cast<Eigen::Index>(sites.size());

    FbmPath path;
    path.alpha = alpha;
    path.m = m;
    path.seed = seed;
    path.jittered = factor->jittered;
    path.values.assign(sites.size() * m, 0.0);

    Rng rng(seed);
    Eigen::VectorXd z(n);
    for (std::size_t j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.next_gaussian();
        const Eigen::VectorXd b = factor->chol.triangularView<Eigen::Lower>() * z;
        for (Eigen::Index i = 0; i < n; ++i) {
            path.values[static_cast<std::size_t>(i) * m + j] = b[i];
        }
    }
    path.sites = std::move(sites);
    path.validate();
    return path;
}

PointCloud image_cloud(const PointCloud& f, const FbmPath& path) {
    f.validate();
    path.validate();
    if (f.ambient_dim != 1) throw std::invalid_argument("fbm image: domain cloud must be 1-dimensional");

    const std::size_t n = f.size();
    std::vector<std::size_t> site_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = f.coords[i];
        const auto it = std::lower_bound(path.sites.begin(), path.sites.end(), x);
        if (it == path.sites.end() || *it != x) {
            throw std::invalid_argument("fbm image: cloud point is not a path site");
        }
        site_of[i] = static_cast<std::size_t>(it - path.sites.begin());
    }

    PointCloud image;
    image.ambient_dim = static_cast<int>(path.m);
    image.provenance = "fbm image alpha=" + std::to_string(path.alpha) +
                       " seed=" + std::to_string(path.seed) + " of " + f.provenance;
    image.coords.reserve(n * path.m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < path.m; ++j) {
            image.coords.push_back(path.values[site_of[i] * path.m + j]);
        }
    }

    // Between consecutive domain samples the path is unobserved, so the
    // image is only trustworthy down to the largest adjacent displacement.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return f.coords[a] < f.coords[b]; });
    double modulus = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < path.m; ++j) {
            const double dj = path.values[site_of[order[k + 1]] * path.m + j] -
                              path.values[site_of[order[k]] * path.m + j];
            d2 += dj * dj;
        }
        modulus = std::max(modulus, std::sqrt(d2));
    }
    image.resolution = modulus > 0.0 ? modulus : f.resolution;
    image.validate();
    return image;
}

BrownianReport brownian_dim_check(double p, double alpha, const std::vector<double>& theta_grid,
                                  int n_seeds, std::uint64_t seed0) {
    if (!(p > 0.0)) throw std::invalid_argument("brownian check: p must be > 0");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("brownian check: alpha must be in (0,1)");
    if (theta_grid.empty()) throw std::invalid_argument("brownian check: empty theta grid");
    for (double theta : theta_grid) {
        if (!(theta > 0.0) || !(theta > 0.0 && theta <= 1.0)) {
            throw std::invalid_argument("brownian check: theta must be in (0,1]");
        }
    }
    if (n_seeds < 1) throw std::invalid_argument("brownian check: need at least one seed");

    // Fill F_p just deep enough to use the site budget.
    double h = std::pow(static_cast<double>(kSiteCap) / 4.0, -(p + 1.0));
    PointCloud f = sets::generate_sequence_filled(sets::SequenceSpec::power(p), h);
    while (f.size() > kSiteCap) {
        h *= 2.0;
        f = sets::generate_sequence_filled(sets::SequenceSpec::power(p), h);
    }
    std::vector<double> sites = f.coords;
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    f.coords = sites;

    BrownianReport report;
    report.p = p;
    report.alpha = alpha;
    report.theta_grid = theta_grid;
    report.mean_estimate.assign(theta_grid.size(), 0.0);
    report.spread.assign(theta_grid.size(), 0.0);

    std::vector<double> lo(theta_grid.size(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(theta_grid.size(), -std::numeric_limits<double>::infinity());

    Rng seeder(seed0);
    for (int run = 0; run < n_seeds; ++run) {
        const std::uint64_t seed = seeder.next_u64();
        const FbmPath path = sample_fbm(sites, alpha, 1, seed);
        const PointCloud image = image_cloud(f, path);
        covers::EstimateOptions opt;
        opt.inner_scales = covers::scale_menu(image.resolution);
        for (std::size_t t = 0; t < theta_grid.size(); ++t) {
            const double theta = theta_grid[t];
            BrownianRow row;
            row.seed = seed;
            row.theta = theta;
            row.estimate = covers::estimate_intermediate_dim(image, theta, opt).value;
            row.formula = theta / (p * alpha + theta);
            row.holder_bound = theta / (alpha * (p + theta));
            report.rows.push_back(row);
            report.mean_estimate[t] += row.estimate;
            lo[t] = std::min(lo[t], row.estimate);
            hi[t] = std::max(hi[t], row.estimate);
        }
    }
    for (std::size_t t = 0; t < theta_grid.size(); ++t) {
        report.mean_estimate[t] /= static_cast<double>(n_seeds);
        report.spread[t] = hi[t] - lo[t];
    }
    return report;
}

void write_brownian_csv(const BrownianReport& report, std::ostream& out) {
    out << "seed,theta,estimate,formula,holder_bound\n";
    char line[256];
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof(line), "%llu,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<unsigned long long>(row.seed), row.theta, row.estimate,
                      row.formula, row.holder_bound);
        out << line;
    }
}

}  // namespace idim::stochastic
