#pragma once

#include "idim/sets.hpp"

#include <string>
#include <vector>

namespace idim::analytic {

// Dimension curve over a theta grid with lower/upper bounds per point; the
// bounds coincide when the value is exact.
struct DimCurve {
    std::vector<double> thetas;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> source;

    std::size_t size() const { return thetas.size(); }
    void push(double theta, double lo, double up, std::string tag);
};

// {0.001, 0.01} followed by k/64 for k = 1..64.
std::vector<double> default_theta_grid();

// --- closed forms ------------------------------------------------------

// {0} u {k^-p}: theta / (p + theta), 0 at theta = 0.
double polynomial_sequence_dim(double p, double theta);

// Concentric circles of radii k^-p.
double circles_dim(double p, double theta);

// Polynomially winding spiral (t^-p sin pi t, t^-q cos pi t), q >= p.
double spiral_dim(double p, double q, double theta);

// Oscillation (t^-p, sin pi t).
double sine_curve_dim(double p, double theta);

// A compact plane set whose curve flattens at 1/4 below theta = 1/3.
double plateau_example_dim(double theta);
// Same curve except the value at theta = 0 drops to 0.
double plateau_example_zero_dim(double theta);
// Curve jumping from 0 at theta = 0 to 1 + theta/(1+theta).
double jump_example_dim(double theta);

// Image of {0} u {k^-p} under index-alpha fractional Brownian motion:
// theta / (p alpha + theta) almost surely.
double fbm_power_sequence_dim(double p, double alpha, double theta);

// An alpha-Holder map divides dimensions by at most alpha.
double holder_image_bound(double domain_dim, double alpha, int image_dim = 1);

// --- self-affine carpets ------------------------------------------------

double carpet_box_dim(const sets::CarpetSpec&);
double carpet_hausdorff_dim(const sets::CarpetSpec&);
// Mass per digit of the measure maximizing the Hausdorff exponent: digits in
// column p carry N_p^(log_n m - 1) / sum_p' N_p'^(log_n m).
std::vector<double> carpet_digit_weights(const sets::CarpetSpec&);
// Lower bound hdim + theta (log|D| - H(mu)) / log n.
double carpet_lower_bound(const sets::CarpetSpec&, double theta);
// Upper bound hdim + 2 log(log_m n) log(a) / (log n * log(1/theta)), valid
// for theta < (log_n m)^2 / 4; `a` is the modulus constant (default n).
double carpet_upper_bound_small_theta(const sets::CarpetSpec&, double theta, double a = 0.0);

// --- inequality envelopes ------------------------------------------------

struct EnvelopeBand {
    double lower = 0.0;
    double upper = 0.0;
};

// Admissible values at query_theta given the exact value at base_theta, from
// monotonicity, the ratio bound and the interpolation bound.
EnvelopeBand dimension_envelope(double base_theta, double base_value, double query_theta,
                                int ambient_dim);

// Lower bound from the box dimension: max(theta b, n - (n - b)/theta).
double lower_bound_from_box(double theta, double box_dim, int ambient_dim);

// General decay-profile bound theta A B / (A - (1 - theta) B) for sequence
// sets with box dimension B and tail exponent A >= B; 0 at theta = 0.
double sequence_dim_bound(double theta, double a, double b);

// Product set band: [lower_e + lower_f, upper_e + box_f].
EnvelopeBand product_band(const EnvelopeBand& e, const EnvelopeBand& f, double box_f);

}  // namespace idim::analytic
