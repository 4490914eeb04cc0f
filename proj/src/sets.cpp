#include "idim/sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>

namespace idim::sets {

SequenceSpec SequenceSpec::power(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("sequence: power exponent must be > 0");
    SequenceSpec s;
    s.kind = Kind::power;
    s.p = p;
    return s;
}

SequenceSpec SequenceSpec::log_recip() {
    SequenceSpec s;
    s.kind = Kind::log_recip;
    return s;
}

SequenceSpec SequenceSpec::exp_decay() {
    SequenceSpec s;
    s.kind = Kind::exp_decay;
    return s;
}

SequenceSpec SequenceSpec::custom(std::function<double(double)> f, std::function<double(double)> df) {
    SequenceSpec s;
    s.kind = Kind::custom;
    s.f = std::move(f);
    s.df = std::move(df);
    s.validate();
    return s;
}

double SequenceSpec::value(double k) const {
    switch (kind) {
        case Kind::power: return std::pow(k, -p);
        case Kind::log_recip: return 1.0 / std::log(k + 1.0);
        case Kind::exp_decay: return std::exp(-k);
        case Kind::custom: return f(k);
    }
    return 0.0;
}

double SequenceSpec::derivative(double k) const {
    switch (kind) {
        case Kind::power: return -p * std::pow(k, -p - 1.0);
        case Kind::log_recip: {
            const double l = std::log(k + 1.0);
            return -1.0 / ((k + 1.0) * l * l);
        }
        case Kind::exp_decay: return -std::exp(-k);
        case Kind::custom: return df(k);
    }
    return 0.0;
}

std::string SequenceSpec::name() const {
    switch (kind) {
        case Kind::power: return "fp(p=" + std::to_string(p) + ")";
        case Kind::log_recip: return "flog";
        case Kind::exp_decay: return "fexp";
        case Kind::custom: return "fcustom";
    }
    return {};
}

void SequenceSpec::validate() const {
    if (kind == Kind::power && !(p > 0.0)) throw std::invalid_argument("sequence: power exponent must be > 0");
    if (kind != Kind::custom) return;
    if (!f || !df) throw std::invalid_argument("sequence: custom spec needs f and f'");
    // Spot-check monotonicity: f decreasing, |f'| decreasing.
    double prev_f = f(1.0);
    double prev_df = df(1.0);
    if (!(prev_f > 0.0)) throw std::invalid_argument("sequence: f must be positive");
    if (!(prev_df < 0.0)) throw std::invalid_argument("sequence: f' must be negative");
    for (double k = 2.0; k <= 4096.0; k *= 2.0) {
        const double fk = f(k);
        const double dfk = df(k);
        if (!(fk > 0.0) || !(fk < prev_f)) throw std::invalid_argument("sequence: f must be positive decreasing");
        if (!(dfk < 0.0) || !(dfk >= prev_df)) throw std::invalid_argument("sequence: f' must be negative increasing");
        prev_f = fk;
        prev_df = dfk;
    }
}

PointCloud generate_sequence(const SequenceSpec& spec, std::size_t count) {
    spec.validate();
    if (count == 0) throw std::invalid_argument("sequence: count must be >= 1");
    PointCloud cloud;
    cloud.ambient_dim = 1;
    cloud.provenance = spec.name() + " count=" + std::to_string(count);
    cloud.coords.reserve(count + 1);
    cloud.coords.push_back(0.0);
    for (std::size_t k = 1; k <= count; ++k) cloud.coords.push_back(spec.value(static_cast<double>(k)));
    cloud.resolution = spec.value(static_cast<double>(count));
    cloud.validate();
    return cloud;
}

namespace {

// Smallest k with f(k) - f(k+1) <= h.  Gaps decrease, so binary search works.
std::size_t gap_cutoff(const SequenceSpec& spec, double h) {
    auto gap = [&](std::size_t k) {
        return spec.value(static_cast<double>(k)) - spec.value(static_cast<double>(k) + 1.0);
    };
    if (gap(1) <= h) return 1;
    std::size_t lo = 1, hi = 2;
    while (gap(hi) > h) {
        hi *= 2;
        if (hi > (std::size_t{1} << 40)) throw std::invalid_argument("sequence: resolution target too small");
    }
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (gap(mid) > h ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

std::size_t filled_sequence_count(const SequenceSpec& spec, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("sequence: resolution must be > 0");
    const std::size_t cutoff = gap_cutoff(spec, h);
    const double head = spec.value(static_cast<double>(cutoff));
    return cutoff + static_cast<std::size_t>(std::ceil(head / h));
}

PointCloud generate_sequence_filled(const SequenceSpec& spec, double h) {
    spec.validate();
    if (!(h > 0.0)) throw std::invalid_argument("sequence: resolution must be > 0");
    const std::size_t cutoff = gap_cutoff(spec, h);
    const double head = spec.value(static_cast<double>(cutoff));

    PointCloud cloud;
    cloud.ambient_dim = 1;
    cloud.provenance = spec.name() + " filled h=" + std::to_string(h);
    const std::size_t grid_n = static_cast<std::size_t>(std::ceil(head / h));
    cloud.coords.reserve(cutoff + grid_n + 1);
    // Grid over [0, f(cutoff)] ascending, then exact points f(cutoff-1)..f(1).
    const double step = head / static_cast<double>(grid_n);
    for (std::size_t j = 0; j <= grid_n; ++j) cloud.coords.push_back(step * static_cast<double>(j));
    for (std::size_t k = cutoff; k-- > 1;) cloud.coords.push_back(spec.value(static_cast<double>(k)));
    cloud.resolution = h;
    cloud.validate();
    return cloud;
}

PointCloud generate_circles(double p, double delta_min) {
    if (!(p > 0.0)) throw std::invalid_argument("circles: p must be > 0");
    if (!(delta_min > 0.0) || !(delta_min < 1.0)) throw std::invalid_argument("circles: delta_min must be in (0,1)");
    const double h = delta_min / 4.0;
    const std::size_t k_max = static_cast<std::size_t>(std::floor(std::pow(h, -1.0 / p)));

    PointCloud cloud;
    cloud.ambient_dim = 2;
    cloud.provenance = "circles p=" + std::to_string(p) + " delta_min=" + std::to_string(delta_min);
    cloud.coords.push_back(0.0);
    cloud.coords.push_back(0.0);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double r = std::pow(static_cast<double>(k), -p);
        const auto arcs = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi * r / h));
        for (std::size_t a = 0; a < arcs; ++a) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(arcs);
            cloud.coords.push_back(r * std::cos(phi));
            cloud.coords.push_back(r * std::sin(phi));
        }
    }
    cloud.resolution = h;
    cloud.validate();
    return cloud;
}

namespace {

PointCloud generate_curve(double p, double q, double t_max, double step_resolution, bool spiral) {
    if (!(p > 0.0)) throw std::invalid_argument("curve: p must be > 0");
    if (spiral && !(q >= p)) throw std::invalid_argument("spiral: requires q >= p");
    if (!(t_max > 1.0)) throw std::invalid_argument("curve: t_max must be > 1");
    if (!(step_resolution > 0.0)) throw std::invalid_argument("curve: step resolution must be > 0");

    const double pi = std::numbers::pi;
    PointCloud cloud;
    cloud.ambient_dim = 2;
    for (double t = 1.0; t <= t_max;) {
        if (spiral) {
            cloud.coords.push_back(std::pow(t, -p) * std::sin(pi * t));
            cloud.coords.push_back(std::pow(t, -q) * std::cos(pi * t));
        } else {
            cloud.coords.push_back(std::pow(t, -p));
            cloud.coords.push_back(std::sin(pi * t));
        }
        // Speed bound decreasing in t, so the gap to the next sample is at
        // most step * bound(t).
        double bound;
        if (spiral) {
            const double bx = std::pow(t, -p) * (pi + p / t);
            const double by = std::pow(t, -q) * (pi + q / t);
            bound = std::hypot(bx, by);
        } else {
            bound = std::hypot(p * std::pow(t, -p - 1.0), pi);
        }
        const double last = t;
        t += step_resolution / bound;
        if (t > t_max && last < t_max) t = t_max;  // always sample the endpoint
    }
    const double trunc_base = std::max(1.0, t_max - 2.0);
    const double trunc = (spiral ? 2.0 : 1.0) * std::pow(trunc_base, -p);
    cloud.resolution = step_resolution + trunc;
    cloud.provenance = (spiral ? "spiral p=" : "sine p=") + std::to_string(p) +
                       (spiral ? " q=" + std::to_string(q) : std::string{}) + " t_max=" + std::to_string(t_max);
    cloud.validate();
    return cloud;
}

}  // namespace

PointCloud generate_spiral(double p, double q, double t_max, double step_resolution) {
    return generate_curve(p, q, t_max, step_resolution, true);
}

PointCloud generate_sine_curve(double p, double t_max, double step_resolution) {
    return generate_curve(p, 0.0, t_max, step_resolution, false);
}

int CarpetSpec::occupied_columns() const {
    const auto counts = column_counts();
    int m_count = 0;
    for (int c : counts) m_count += (c > 0);
    return m_count;
}

std::vector<int> CarpetSpec::column_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(m), 0);
    for (const auto& [p, q] : digits) counts[static_cast<std::size_t>(p)]++;
    return counts;
}

void CarpetSpec::validate() const {
    if (m < 2 || n <= m) throw std::invalid_argument("carpet: requires n > m >= 2");
    if (digits.empty()) throw std::invalid_argument("carpet: empty digit set");
    std::map<std::pair<int, int>, int> seen;
    for (const auto& [p, q] : digits) {
        if (p < 0 || p >= m || q < 0 || q >= n) throw std::invalid_argument("carpet: digit out of range");
        if (seen[{p, q}]++) throw std::invalid_argument("carpet: repeated digit");
    }
}

PointCloud generate_carpet(const CarpetSpec& spec, int level, std::size_t point_cap) {
    spec.validate();
    if (level < 1) throw std::invalid_argument("carpet: level must be >= 1");
    double count_f = 1.0;
    for (int i = 0; i < level; ++i) count_f *= static_cast<double>(spec.digit_count());
    if (count_f > static_cast<double>(point_cap)) throw std::invalid_argument("carpet: level exceeds point cap");
    const auto count = static_cast<std::size_t>(count_f);

    PointCloud cloud;
    cloud.ambient_dim = 2;
    cloud.provenance = "carpet " + std::to_string(spec.m) + "x" + std::to_string(spec.n) +
                       " digits=" + std::to_string(spec.digit_count()) + " level=" + std::to_string(level);
    cloud.coords.resize(2 * count);

    // Corner of the cylinder with digit string d_1..d_L is
    // (sum p_i m^-i, sum q_i n^-i); enumerate strings with an odometer.
    std::vector<std::size_t> digit_idx(static_cast<std::size_t>(level), 0);
    std::vector<double> mw(static_cast<std::size_t>(level)), nw(static_cast<std::size_t>(level));
    {
        double mp = 1.0, np = 1.0;
        for (int i = 0; i < level; ++i) {
            mp /= spec.m;
            np /= spec.n;
            mw[static_cast<std::size_t>(i)] = mp;
            nw[static_cast<std::size_t>(i)] = np;
        }
    }
    for (std::size_t idx = 0; idx < count; ++idx) {
        double x = 0.0, y = 0.0;
        for (int i = 0; i < level; ++i) {
            const auto& [p, q] = spec.digits[digit_idx[static_cast<std::size_t>(i)]];
            x += p * mw[static_cast<std::size_t>(i)];
            y += q * nw[static_cast<std::size_t>(i)];
        }
        cloud.coords[2 * idx] = x;
        cloud.coords[2 * idx + 1] = y;
        for (int i = level; i-- > 0;) {
            auto& d = digit_idx[static_cast<std::size_t>(i)];
            if (++d < spec.digit_count()) break;
            d = 0;
        }
    }
    cloud.resolution = std::hypot(std::pow(spec.m, -level), std::pow(spec.n, -level));
    cloud.validate();
    return cloud;
}

PointCloud product_set(const PointCloud& e, const PointCloud& f) {
    e.validate();
    f.validate();
    PointCloud cloud;
    cloud.ambient_dim = e.ambient_dim + f.ambient_dim;
    cloud.resolution = std::hypot(e.resolution, f.resolution);
    cloud.provenance = "(" + e.provenance + ") x (" + f.provenance + ")";
    const std::size_t ne = e.size(), nf = f.size();
    cloud.coords.reserve(ne * nf * static_cast<std::size_t>(cloud.ambient_dim));
    for (std::size_t i = 0; i < ne; ++i) {
        const double* a = e.point(i);
        for (std::size_t j = 0; j < nf; ++j) {
            const double* b = f.point(j);
            cloud.coords.insert(cloud.coords.end(), a, a + e.ambient_dim);
            cloud.coords.insert(cloud.coords.end(), b, b + f.ambient_dim);
        }
    }
    cloud.validate();
    return cloud;
}

PointCloud union_set(const PointCloud& e, const PointCloud& f) {
    e.validate();
    f.validate();
    if (e.ambient_dim != f.ambient_dim) throw std::invalid_argument("union: ambient dimensions differ");
    const double tol = std::min(e.resolution, f.resolution);
    const int dim = e.ambient_dim;

    PointCloud cloud;
    cloud.ambient_dim = dim;
    cloud.resolution = std::max(e.resolution, f.resolution);
    cloud.provenance = "(" + e.provenance + ") u (" + f.provenance + ")";
    cloud.coords = e.coords;

    // Hash grid over cells of side tol; a point of F is dropped when some
    // kept point lies within tol.
    struct CellHash {
        std::size_t operator()(const std::vector<std::int64_t>& v) const {
            std::size_t h = 1469598103934665603ULL;
            for (auto x : v) {
                h ^= static_cast<std::size_t>(x);
                h *= 1099511628211ULL;
            }
            return h;
        }
    };
    const double cell = tol > 0.0 ? tol : 1.0;
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> grid;
    auto cell_of = [&](const double* x) {
        std::vector<std::int64_t> key(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) key[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(x[j] / cell));
        return key;
    };
    auto dist2 = [&](const double* a, const double* b) {
        double q = 0.0;
        for (int j = 0; j < dim; ++j) q += (a[j] - b[j]) * (a[j] - b[j]);
        return q;
    };
    for (std::size_t i = 0; i < e.size(); ++i) grid[cell_of(e.point(i))].push_back(i);

    std::vector<std::int64_t> probe(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double* x = f.point(i);
        const auto base = cell_of(x);
        bool dup = false;
        // 3^dim neighborhood scan.
        std::vector<int> off(static_cast<std::size_t>(dim), -1);
        while (!dup) {
            for (int j = 0; j < dim; ++j) probe[static_cast<std::size_t>(j)] = base[static_cast<std::size_t>(j)] + off[static_cast<std::size_t>(j)];
            if (auto it = grid.find(probe); it != grid.end()) {
                for (std::size_t k : it->second) {
                    if (dist2(cloud.coords.data() + k * static_cast<std::size_t>(dim), x) <= tol * tol) {
                        dup = true;
                        break;
                    }
                }
            }
            int j = 0;
            for (; j < dim; ++j) {
                if (++off[static_cast<std::size_t>(j)] <= 1) break;
                off[static_cast<std::size_t>(j)] = -1;
            }
            if (j == dim) break;
        }
        if (!dup) {
            const std::size_t new_idx = cloud.size();
            cloud.coords.insert(cloud.coords.end(), x, x + dim);
            grid[base].push_back(new_idx);
        }
    }
    cloud.validate();
    return cloud;
}

}  // namespace idim::sets
