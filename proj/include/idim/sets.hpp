#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "idim/cloud.hpp"

namespace idim::sets {

// Decreasing sequence x_k -> 0; the attached set is {0} union {f(k) : k >= 1}.
// Indices start at 1.
struct SequenceSpec {
    enum class Kind { power, log_recip, exp_decay, custom };

    Kind kind = Kind::power;
    double p = 1.0;  // power kind: f(k) = k^-p, requires p > 0
    std::function<double(double)> f;   // custom kind
    std::function<double(double)> df;  // custom kind, derivative of f

    static SequenceSpec power(double p);
    static SequenceSpec log_recip();  // f(k) = 1/log(k+1)
    static SequenceSpec exp_decay();  // f(k) = e^-k
    static SequenceSpec custom(std::function<double(double)> f, std::function<double(double)> df);

    double value(double k) const;
    double derivative(double k) const;
    std::string name() const;

    // Throws unless f is positive and strictly decreasing with |f'| decreasing
    // (checked on a sample of indices for custom specs).
    void validate() const;
};

// {0} union {f(k) : 1 <= k <= count}; resolution f(count).
PointCloud generate_sequence(const SequenceSpec& spec, std::size_t count);

// Same set, discretized to a target resolution h with far fewer points than
// the plain truncation would need: keeps f(k) exactly while consecutive gaps
// exceed h, then covers the remaining initial segment [0, f(K)] with a grid
// of spacing <= h.  Declared resolution is h.
PointCloud generate_sequence_filled(const SequenceSpec& spec, double h);

// Number of points generate_sequence_filled would produce.
std::size_t filled_sequence_count(const SequenceSpec& spec, double h);

// Concentric circles of radii k^-p plus the center point.  All circles of
// radius >= delta_min/4 are sampled with chord spacing <= delta_min/4, the
// rest collapse to the center; resolution delta_min/4.
PointCloud generate_circles(double p, double delta_min);

// (t^-p sin(pi t), t^-q cos(pi t)) for t in [1, t_max], q >= p > 0.
// Adaptive parameter steps keep consecutive gaps <= step_resolution; the
// discarded tail t > t_max adds 2*max(1, t_max-2)^-p to the declared
// resolution.
PointCloud generate_spiral(double p, double q, double t_max, double step_resolution);

// (t^-p, sin(pi t)) for t in [1, t_max]; same stepping contract as the
// spiral, truncation term max(1, t_max-2)^-p.
PointCloud generate_sine_curve(double p, double t_max, double step_resolution);

// Self-affine carpet: the attractor of maps (x,y) -> ((x+p)/m, (y+q)/n) over
// digits (p,q), with n > m >= 2.
struct CarpetSpec {
    int m = 2;
    int n = 3;
    std::vector<std::pair<int, int>> digits;  // (column p in [0,m), row q in [0,n))

    std::size_t digit_count() const { return digits.size(); }
    int occupied_columns() const;
    std::vector<int> column_counts() const;  // size m, zeros for empty columns
    void validate() const;
};

// All level-`level` cylinder corner points (|digits|^level of them);
// resolution sqrt(m^-2L + n^-2L).  Throws when the count exceeds point_cap.
PointCloud generate_carpet(const CarpetSpec& spec, int level, std::size_t point_cap = (std::size_t{1} << 25));

// Cartesian product; resolution sqrt(hE^2 + hF^2).
PointCloud product_set(const PointCloud& e, const PointCloud& f);

// Concatenation with duplicate merge at tolerance min(hE, hF); resolution
// max(hE, hF).  Requires equal ambient dimensions.
PointCloud union_set(const PointCloud& e, const PointCloud& f);

}  // namespace idim::sets
