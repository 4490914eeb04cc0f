#include "idim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace idim::analytic {

void DimCurve::push(double theta, double lo, double up, std::string tag) {
    thetas.push_back(theta);
    lower.push_back(lo);
    upper.push_back(up);
    source.push_back(std::move(tag));
}

std::vector<double> default_theta_grid() {
    std::vector<double> grid{0.001, 0.01};
    for (int k = 1; k <= 64; ++k) grid.push_back(static_cast<double>(k) / 64.0);
    return grid;
}

namespace {

void check_theta(double theta) {
    if (!(theta >= 0.0) || !(theta <= 1.0)) throw std::invalid_argument("theta must be in [0,1]");
}

}  // namespace

double polynomial_sequence_dim(double p, double theta) {
    if (!(p > 0.0)) throw std::invalid_argument("sequence: p must be > 0");
    check_theta(theta);
    if (theta == 0.0) return 0.0;
    return theta / (p + theta);
}

double circles_dim(double p, double theta) {
    if (!(p > 0.0)) throw std::invalid_argument("circles: p must be > 0");
    check_theta(theta);
    if (p >= 1.0) return 1.0;
    return (2.0 * p + 2.0 * theta * (1.0 - p)) / (2.0 * p + theta * (1.0 - p));
}

double spiral_dim(double p, double q, double theta) {
    if (!(p > 0.0) || !(q >= p)) throw std::invalid_argument("spiral: need q >= p > 0");
    check_theta(theta);
    if (p >= 1.0) return 1.0;
    return (p + q + 2.0 * theta * (1.0 - p)) / (p + q + theta * (1.0 - p));
}

double sine_curve_dim(double p, double theta) {
    if (!(p > 0.0)) throw std::invalid_argument("sine curve: p must be > 0");
    check_theta(theta);
    return (p + 2.0 * theta) / (p + theta);
}

double plateau_example_dim(double theta) {
    check_theta(theta);
    return std::max(theta / (1.0 + theta), 0.25);
}

double plateau_example_zero_dim(double theta) {
    check_theta(theta);
    if (theta == 0.0) return 0.0;
    return plateau_example_dim(theta);
}

double jump_example_dim(double theta) {
    check_theta(theta);
    if (theta == 0.0) return 0.0;
    return 1.0 + theta / (1.0 + theta);
}

double fbm_power_sequence_dim(double p, double alpha, double theta) {
    if (!(p > 0.0)) throw std::invalid_argument("sequence: p must be > 0");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("index must be in (0,1)");
    check_theta(theta);
    if (theta == 0.0) return 0.0;
    return theta / (p * alpha + theta);
}

double holder_image_bound(double domain_dim, double alpha, int image_dim) {
    if (!(alpha > 0.0) || !(alpha <= 1.0)) throw std::invalid_argument("exponent must be in (0,1]");
    if (!(domain_dim >= 0.0)) throw std::invalid_argument("dimension must be >= 0");
    return std::min(domain_dim / alpha, static_cast<double>(image_dim));
}

double carpet_box_dim(const sets::CarpetSpec& spec) {
    spec.validate();
    const double m = spec.m, n = spec.n;
    const double cols = spec.occupied_columns();
    const double digits = static_cast<double>(spec.digit_count());
    return std::log(cols) / std::log(m) + (std::log(digits) - std::log(cols)) / std::log(n);
}

double carpet_hausdorff_dim(const sets::CarpetSpec& spec) {
    spec.validate();
    const double gamma = std::log(static_cast<double>(spec.m)) / std::log(static_cast<double>(spec.n));
    double sum = 0.0;
    for (int c : spec.column_counts()) {
        if (c > 0) sum += std::pow(static_cast<double>(c), gamma);
    }
    return std::log(sum) / std::log(static_cast<double>(spec.m));
}

std::vector<double> carpet_digit_weights(const sets::CarpetSpec& spec) {
    spec.validate();
    const double gamma = std::log(static_cast<double>(spec.m)) / std::log(static_cast<double>(spec.n));
    const std::vector<int> counts = spec.column_counts();
    double z = 0.0;
    for (int c : counts) {
        if (c > 0) z += std::pow(static_cast<double>(c), gamma);
    }
    std::vector<double> w;
    w.reserve(spec.digits.size());
    for (const auto& [p, q] : spec.digits) {
        w.push_back(std::pow(static_cast<double>(counts[static_cast<std::size_t>(p)]), gamma - 1.0) / z);
    }
    return w;
}

double carpet_lower_bound(const sets::CarpetSpec& spec, double theta) {
    check_theta(theta);
    const std::vector<double> w = carpet_digit_weights(spec);
    double entropy = 0.0;
    for (double wi : w) entropy -= wi * std::log(wi);
    const double excess = std::log(static_cast<double>(spec.digit_count())) - entropy;
    return carpet_hausdorff_dim(spec) + theta * excess / std::log(static_cast<double>(spec.n));
}

double carpet_upper_bound_small_theta(const sets::CarpetSpec& spec, double theta, double a) {
    spec.validate();
    if (!(theta > 0.0) || !(theta < 1.0)) throw std::invalid_argument("theta must be in (0,1)");
    const double m = spec.m, n = spec.n;
    const double gamma = std::log(m) / std::log(n);
    if (!(theta < 0.25 * gamma * gamma)) {
        throw std::invalid_argument("carpet upper bound: theta out of the small-theta regime");
    }
    if (a <= 0.0) a = n;
    const double numerator = 2.0 * std::log(std::log(n) / std::log(m)) * std::log(a);
    return carpet_hausdorff_dim(spec) + numerator / (std::log(n) * std::log(1.0 / theta));
}

EnvelopeBand dimension_envelope(double base_theta, double base_value, double query_theta,
                                int ambient_dim) {
    if (!(base_theta > 0.0) || !(base_theta <= 1.0) || !(query_theta > 0.0) || !(query_theta <= 1.0)) {
        throw std::invalid_argument("envelope: thetas must be in (0,1]");
    }
    const double n = ambient_dim;
    if (!(base_value >= 0.0) || !(base_value <= n)) throw std::invalid_argument("envelope: value outside [0,n]");

    EnvelopeBand band;
    if (query_theta >= base_theta) {
        band.lower = base_value;
        const double ratio = (query_theta / base_theta) * base_value;
        const double interp = base_value + (1.0 - base_theta / query_theta) * (n - base_value);
        band.upper = std::min({ratio, interp, n});
    } else {
        band.upper = base_value;
        const double ratio = (query_theta / base_theta) * base_value;
        const double interp = n - (n - base_value) * (base_theta / query_theta);
        band.lower = std::max({ratio, interp, 0.0});
        band.lower = std::min(band.lower, band.upper);
    }
    return band;
}

double lower_bound_from_box(double theta, double box_dim, int ambient_dim) {
    check_theta(theta);
    const double n = ambient_dim;
    if (!(box_dim >= 0.0) || !(box_dim <= n)) throw std::invalid_argument("bound: box dim outside [0,n]");
    if (theta == 0.0) return 0.0;
    return std::max({theta * box_dim, n - (n - box_dim) / theta, 0.0});
}

double sequence_dim_bound(double theta, double a, double b) {
    check_theta(theta);
    if (!(a >= b) || !(b > 0.0)) throw std::invalid_argument("bound: need a >= b > 0");
    if (theta == 0.0) return 0.0;
    return theta * a * b / (a - (1.0 - theta) * b);
}

EnvelopeBand product_band(const EnvelopeBand& e, const EnvelopeBand& f, double box_f) {
    return EnvelopeBand{e.lower + f.lower, e.upper + box_f};
}

}  // namespace idim::analytic
