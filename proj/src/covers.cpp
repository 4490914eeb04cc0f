#include "idim/covers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <stdexcept>

namespace idim::covers {

void Window::validate() const {
    if (!(inner > 0.0) || !(outer >= inner) || !std::isfinite(outer)) {
        throw std::invalid_argument("cover window: need 0 < inner <= outer");
    }
}

Window theta_window(double inner_scale, double theta) {
    if (!(inner_scale > 0.0) || !(inner_scale < 1.0)) {
        throw std::invalid_argument("cover window: inner scale must be in (0,1)");
    }
    if (!(theta > 0.0) || !(theta <= 1.0)) {
        throw std::invalid_argument("cover window: theta must be in (0,1]");
    }
    return Window{inner_scale, std::pow(inner_scale, theta)};
}

double Cover::cost(double s) const {
    double total = 0.0;
    for (double d : diameters) total += std::pow(d, s);
    return total;
}

bool Cover::covers(const PointCloud& cloud) const {
    if (cloud.ambient_dim != ambient_dim) return false;
    const int n = ambient_dim;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double* x = cloud.point(i);
        bool hit = false;
        for (std::size_t b = 0; b < size() && !hit; ++b) {
            const double* c = center(b);
            double q = 0.0;
            for (int j = 0; j < n; ++j) q += (x[j] - c[j]) * (x[j] - c[j]);
            hit = q <= diameters[b] * diameters[b] * 0.25 * (1.0 + 1e-9);
        }
        if (!hit) return false;
    }
    return true;
}

std::vector<double> diameter_menu(const Window& w) {
    w.validate();
    const int k_steps = static_cast<int>(std::ceil(std::log2(w.outer / w.inner) - 1e-9));
    std::vector<double> menu(static_cast<std::size_t>(std::max(k_steps, 0)) + 1);
    menu.front() = w.inner;
    if (k_steps > 0) {
        const double ratio = std::pow(w.outer / w.inner, 1.0 / k_steps);
        for (int k = 1; k < k_steps; ++k) menu[static_cast<std::size_t>(k)] = w.inner * std::pow(ratio, k);
        menu.back() = w.outer;
    }
    return menu;
}

namespace {

constexpr std::size_t kReachTableCap = 30'000'000;

// Exact minimal-cost covers of a 1D point set by closed intervals with
// diameters from a fixed menu.  An optimal cover can be normalized so each
// interval starts at the leftmost point not yet covered, which gives a DP
// over sorted point indices.
class IntervalDP {
  public:
    IntervalDP(const std::vector<double>& xs, const Window& w) : xs_(xs), menu_(diameter_menu(w)) {
        const std::size_t n = xs_.size();
        const std::size_t k = menu_.size();
        if (n * k <= kReachTableCap && n < std::numeric_limits<std::uint32_t>::max()) {
            reach_.resize(n * k);
            for (std::size_t ki = 0; ki < k; ++ki) {
                std::size_t j = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (j < i + 1) j = i + 1;
                    const double edge = xs_[i] + menu_[ki];
                    while (j < n && xs_[j] <= edge) ++j;
                    reach_[ki * n + i] = static_cast<std::uint32_t>(j);
                }
            }
        }
    }

    double min_cost(double s) const { return solve(s).front(); }

    Cover cover(double s) const {
        const std::vector<double> cost = solve(s);
        std::vector<double> pw(menu_.size());
        for (std::size_t k = 0; k < menu_.size(); ++k) pw[k] = std::pow(menu_[k], s);

        Cover out;
        out.ambient_dim = 1;
        std::size_t i = 0;
        while (i < xs_.size()) {
            std::size_t best_k = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < menu_.size(); ++k) {
                const double c = pw[k] + cost[reach(i, k)];
                if (c < best) {
                    best = c;
                    best_k = k;
                }
            }
            out.centers.push_back(xs_[i] + menu_[best_k] * 0.5);
            out.diameters.push_back(menu_[best_k]);
            i = reach(i, best_k);
        }
        return out;
    }

  private:
    std::size_t reach(std::size_t i, std::size_t k) const {
        if (!reach_.empty()) return reach_[k * xs_.size() + i];
        const auto it = std::upper_bound(xs_.begin() + static_cast<std::ptrdiff_t>(i) + 1, xs_.end(), xs_[i] + menu_[k]);
        return static_cast<std::size_t>(it - xs_.begin());
    }

    std::vector<double> solve(double s) const {
        const std::size_t n = xs_.size();
        std::vector<double> pw(menu_.size());
        for (std::size_t k = 0; k < menu_.size(); ++k) pw[k] = std::pow(menu_[k], s);
        std::vector<double> cost(n + 1);
        cost[n] = 0.0;
        for (std::size_t i = n; i-- > 0;) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < menu_.size(); ++k) {
                const double c = pw[k] + cost[reach(i, k)];
                if (c < best) best = c;
            }
            cost[i] = best;
        }
        return cost;
    }

    const std::vector<double>& xs_;
    std::vector<double> menu_;
    std::vector<std::uint32_t> reach_;
};

std::uint64_t interleave(const std::int64_t* ix, int n, int bits) {
    std::uint64_t key = 0;
    for (int b = 0; b < bits; ++b) {
        for (int d = 0; d < n; ++d) {
            key |= ((static_cast<std::uint64_t>(ix[d]) >> b) & 1u) << (b * n + d);
        }
    }
    return key;
}

std::int64_t deinterleave(std::uint64_t key, int n, int d, int bits) {
    std::int64_t v = 0;
    for (int b = 0; b < bits; ++b) v |= static_cast<std::int64_t>((key >> (b * n + d)) & 1u) << b;
    return v;
}

int level_for_scale(int n, double scale) {
    return static_cast<int>(std::ceil(std::log2(std::sqrt(static_cast<double>(n)) / scale) - 1e-9));
}

// Minimal-cost dyadic-cell covers in dimension >= 2.  Cells of side 2^-j are
// anchored at the cloud min corner; a cell is billed at diameter
// clamp(sqrt(n) 2^-j, inner, outer) and either pays its own bill or the sum
// of its occupied children.
class DyadicDP {
  public:
    DyadicDP(const std::vector<std::uint64_t>& deep_keys, int j_ref, int n, int bits,
             const std::vector<double>& mins, const Window& w)
        : n_(n), bits_(bits), mins_(mins) {
        const int j_fine = level_for_scale(n, w.inner);
        const int j_coarse = level_for_scale(n, w.outer);
        if (j_fine > j_ref) throw std::logic_error("cover model built too shallow for this window");

        const int level_count = j_fine - j_coarse + 1;
        levels_.resize(static_cast<std::size_t>(level_count));
        const double rootn = std::sqrt(static_cast<double>(n));
        for (int j = j_coarse; j <= j_fine; ++j) {
            Level& lv = levels_[static_cast<std::size_t>(j - j_coarse)];
            lv.j = j;
            lv.billed = std::clamp(rootn * std::ldexp(1.0, -j), w.inner, w.outer);
        }

        Level& fine = levels_.back();
        fine.keys.resize(deep_keys.size());
        const int drop = n * (j_ref - j_fine);
        for (std::size_t i = 0; i < deep_keys.size(); ++i) fine.keys[i] = deep_keys[i] >> drop;
        fine.keys.erase(std::unique(fine.keys.begin(), fine.keys.end()), fine.keys.end());

        for (std::size_t lvl = levels_.size() - 1; lvl-- > 0;) {
            Level& up = levels_[lvl];
            const Level& dn = levels_[lvl + 1];
            up.keys.resize(dn.keys.size());
            for (std::size_t i = 0; i < dn.keys.size(); ++i) up.keys[i] = dn.keys[i] >> n;
            up.keys.erase(std::unique(up.keys.begin(), up.keys.end()), up.keys.end());
            up.child_begin.resize(up.keys.size() + 1);
            std::size_t c = 0;
            for (std::size_t i = 0; i < up.keys.size(); ++i) {
                up.child_begin[i] = static_cast<std::uint32_t>(c);
                while (c < dn.keys.size() && (dn.keys[c] >> n) == up.keys[i]) ++c;
            }
            up.child_begin.back() = static_cast<std::uint32_t>(c);
        }
    }

    double min_cost(double s) const {
        std::vector<double> cost = level_costs(s).front();
        double total = 0.0;
        for (double c : cost) total += c;
        return total;
    }

    Cover cover(double s) const {
        const std::vector<std::vector<double>> costs = level_costs(s);
        Cover out;
        out.ambient_dim = n_;
        // DFS from every top cell, descending while the children beat the
        // cell's own bill.
        std::vector<std::pair<std::size_t, std::size_t>> stack;
        for (std::size_t i = levels_.front().keys.size(); i-- > 0;) stack.emplace_back(0, i);
        while (!stack.empty()) {
            const auto [lvl, idx] = stack.back();
            stack.pop_back();
            const Level& lv = levels_[lvl];
            const double own = std::pow(lv.billed, s);
            if (lvl + 1 == levels_.size() || own <= costs[lvl][idx] * (1.0 + 1e-12)) {
                emit(out, lv, idx);
                continue;
            }
            for (std::size_t c = lv.child_begin[idx + 1]; c-- > lv.child_begin[idx];) stack.emplace_back(lvl + 1, c);
        }
        return out;
    }

  private:
    struct Level {
        int j = 0;
        double billed = 0.0;
        std::vector<std::uint64_t> keys;
        std::vector<std::uint32_t> child_begin;
    };

    std::vector<std::vector<double>> level_costs(double s) const {
        std::vector<std::vector<double>> costs(levels_.size());
        const Level& fine = levels_.back();
        costs.back().assign(fine.keys.size(), std::pow(fine.billed, s));
        for (std::size_t lvl = levels_.size() - 1; lvl-- > 0;) {
            const Level& lv = levels_[lvl];
            const double own = std::pow(lv.billed, s);
            costs[lvl].resize(lv.keys.size());
            for (std::size_t i = 0; i < lv.keys.size(); ++i) {
                double sum = 0.0;
                for (std::size_t c = lv.child_begin[i]; c < lv.child_begin[i + 1]; ++c) sum += costs[lvl + 1][c];
                costs[lvl][i] = std::min(own, sum);
            }
        }
        return costs;
    }

    void emit(Cover& out, const Level& lv, std::size_t idx) const {
        const double side = std::ldexp(1.0, -lv.j);
        for (int d = 0; d < n_; ++d) {
            const double c = static_cast<double>(deinterleave(lv.keys[idx], n_, d, bits_)) + 0.5;
            out.centers.push_back(mins_[static_cast<std::size_t>(d)] + c * side);
        }
        out.diameters.push_back(lv.billed);
    }

    int n_;
    int bits_;
    std::vector<double> mins_;
    std::vector<Level> levels_;
};

std::vector<double> cloud_mins(const PointCloud& cloud) {
    const int n = cloud.ambient_dim;
    std::vector<double> mins(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int d = 0; d < n; ++d) mins[static_cast<std::size_t>(d)] = std::min(mins[static_cast<std::size_t>(d)], cloud.point(i)[d]);
    }
    return mins;
}

}  // namespace

struct CoverCostModel::Impl {
    int dim = 1;
    double resolution = 0.0;

    std::vector<double> xs;  // 1D, sorted unique

    std::vector<std::uint64_t> deep_keys;  // nD, sorted unique at j_ref
    int j_ref = 0;
    int bits = 0;
    std::vector<double> mins;

    struct CacheEntry {
        Window w;
        std::unique_ptr<IntervalDP> interval;
        std::unique_ptr<DyadicDP> dyadic;
    };
    std::deque<CacheEntry> cache;

    Impl(const PointCloud& cloud, double min_inner) {
        cloud.validate();
        if (!(min_inner > 0.0)) throw std::invalid_argument("cover model: min inner scale must be > 0");
        if (cloud.resolution > 0.0 && min_inner < 4.0 * cloud.resolution) {
            throw std::invalid_argument("cover model: window finer than 4x cloud resolution");
        }
        dim = cloud.ambient_dim;
        resolution = cloud.resolution;
        if (dim == 1) {
            xs = cloud.coords;
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
            return;
        }
        mins = cloud_mins(cloud);
        j_ref = level_for_scale(dim, min_inner);
        const double side = std::ldexp(1.0, j_ref);  // 1 / cell side
        std::int64_t max_ix = 0;
        std::vector<std::int64_t> ix(static_cast<std::size_t>(dim));
        deep_keys.resize(cloud.size());
        // First pass to size the bit budget.
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            for (int d = 0; d < dim; ++d) {
                const double rel = (cloud.point(i)[d] - mins[static_cast<std::size_t>(d)]) * side;
                max_ix = std::max(max_ix, static_cast<std::int64_t>(std::floor(rel)));
            }
        }
        bits = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(max_ix))));
        if (bits * dim > 63) throw std::invalid_argument("cover model: window too deep for this cloud extent");
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            for (int d = 0; d < dim; ++d) {
                const double rel = (cloud.point(i)[d] - mins[static_cast<std::size_t>(d)]) * side;
                ix[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(rel));
            }
            deep_keys[i] = interleave(ix.data(), dim, bits);
        }
        std::sort(deep_keys.begin(), deep_keys.end());
        deep_keys.erase(std::unique(deep_keys.begin(), deep_keys.end()), deep_keys.end());
    }

    CacheEntry& entry_for(const Window& w) {
        w.validate();
        if (resolution > 0.0 && w.inner < 4.0 * resolution * (1.0 - 1e-12)) {
            throw std::invalid_argument("cover window finer than 4x cloud resolution");
        }
        for (auto& e : cache) {
            if (e.w.inner == w.inner && e.w.outer == w.outer) return e;
        }
        CacheEntry e;
        e.w = w;
        if (dim == 1) {
            e.interval = std::make_unique<IntervalDP>(xs, w);
        } else {
            e.dyadic = std::make_unique<DyadicDP>(deep_keys, j_ref, dim, bits, mins, w);
        }
        cache.push_back(std::move(e));
        if (cache.size() > 3) cache.pop_front();
        return cache.back();
    }
};

CoverCostModel::CoverCostModel(const PointCloud& cloud, double min_inner)
    : impl_(std::make_unique<Impl>(cloud, min_inner)) {}
CoverCostModel::~CoverCostModel() = default;
CoverCostModel::CoverCostModel(CoverCostModel&&) noexcept = default;
CoverCostModel& CoverCostModel::operator=(CoverCostModel&&) noexcept = default;

double CoverCostModel::cost(const Window& w, double s) {
    auto& e = impl_->entry_for(w);
    return e.interval ? e.interval->min_cost(s) : e.dyadic->min_cost(s);
}

Cover CoverCostModel::cover(const Window& w, double s) {
    auto& e = impl_->entry_for(w);
    return e.interval ? e.interval->cover(s) : e.dyadic->cover(s);
}

double min_cover_cost(const PointCloud& cloud, const Window& w, double s) {
    CoverCostModel model(cloud, w.inner);
    return model.cost(w, s);
}

Cover two_scale_cover(const PointCloud& cloud, const Window& w, double s) {
    CoverCostModel model(cloud, w.inner);
    return model.cover(w, s);
}

std::size_t box_count(const PointCloud& cloud, double epsilon) {
    cloud.validate();
    if (!(epsilon > 0.0)) throw std::invalid_argument("box count: epsilon must be > 0");
    const int n = cloud.ambient_dim;
    const std::vector<double> mins = cloud_mins(cloud);

    std::vector<int> shift(static_cast<std::size_t>(n));
    int total_bits = 0;
    for (int d = 0; d < n; ++d) {
        std::int64_t max_ix = 0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const double rel = (cloud.point(i)[d] - mins[static_cast<std::size_t>(d)]) / epsilon;
            max_ix = std::max(max_ix, static_cast<std::int64_t>(std::floor(rel)));
        }
        shift[static_cast<std::size_t>(d)] = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(max_ix))));
        total_bits += shift[static_cast<std::size_t>(d)];
    }
    if (total_bits > 63) throw std::invalid_argument("box count: epsilon too small for this cloud extent");

    std::vector<std::uint64_t> keys(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        std::uint64_t key = 0;
        for (int d = 0; d < n; ++d) {
            const double rel = (cloud.point(i)[d] - mins[static_cast<std::size_t>(d)]) / epsilon;
            key = (key << shift[static_cast<std::size_t>(d)]) | static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(rel)));
        }
        keys[i] = key;
    }
    std::sort(keys.begin(), keys.end());
    return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

std::vector<double> scale_menu(double resolution, double top) {
    if (!(resolution >= 0.0) || !(top > 0.0)) throw std::invalid_argument("scale menu: bad inputs");
    const double floor_scale = std::max(4.0 * resolution, top * 0x1.0p-30);
    std::vector<double> scales;
    for (double s = top; s >= floor_scale; s *= 0.5) scales.push_back(s);
    if (scales.size() < 2) throw std::invalid_argument("scale menu: resolution too coarse");
    return scales;
}

namespace {

// Bisect the decreasing function g on [0, s_max] to x_tol; clamps when g has
// no sign change on the bracket.
double bisect_decreasing(const std::function<double(double)>& g, double s_max, double x_tol) {
    double lo = 0.0, hi = s_max;
    if (g(lo) <= 0.0) return 0.0;
    if (g(hi) >= 0.0) return s_max;
    while (hi - lo > x_tol) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

DimEstimate estimate_from_windows(const std::vector<Window>& windows,
                                  const std::function<double(std::size_t, double)>& cost_fn,
                                  double s_max, const EstimateOptions& opt) {
    const std::size_t g_count = windows.size();
    if (g_count == 0) throw std::invalid_argument("estimate: no scales given");
    for (std::size_t i = 1; i < g_count; ++i) {
        if (!(windows[i].inner < windows[i - 1].inner)) {
            throw std::invalid_argument("estimate: scales must strictly decrease");
        }
    }

    DimEstimate est;
    if (opt.mode == EstimatorMode::slope) {
        if (g_count < 2) throw std::invalid_argument("estimate: slope mode needs at least 2 scales");
        std::size_t span = opt.pair_span == 0 ? g_count / 2 : opt.pair_span;
        span = std::clamp<std::size_t>(span, 1, g_count - 1);
        for (std::size_t i = 0; i + span < g_count; ++i) {
            const std::size_t deep = i + span;
            auto gap = [&](double s) { return std::log(cost_fn(deep, s)) - std::log(cost_fn(i, s)); };
            est.scale_roots.emplace_back(windows[deep].inner, bisect_decreasing(gap, s_max, opt.s_tolerance));
        }
    } else {
        for (std::size_t i = 0; i < g_count; ++i) {
            auto excess = [&](double s) { return std::log(cost_fn(i, s)); };
            est.scale_roots.emplace_back(windows[i].inner, bisect_decreasing(excess, s_max, opt.s_tolerance));
        }
    }

    const std::size_t total = est.scale_roots.size();
    const std::size_t tail = (total + 1) / 2;
    double sum = 0.0;
    est.lower = std::numeric_limits<double>::infinity();
    est.upper = -std::numeric_limits<double>::infinity();
    for (std::size_t i = total - tail; i < total; ++i) {
        const double r = est.scale_roots[i].second;
        sum += r;
        est.lower = std::min(est.lower, r);
        est.upper = std::max(est.upper, r);
    }
    est.value = sum / static_cast<double>(tail);
    return est;
}

DimEstimate estimate_intermediate_dim(const PointCloud& cloud, double theta, const EstimateOptions& opt) {
    if (!(theta > 0.0) || !(theta <= 1.0)) throw std::invalid_argument("estimate: theta must be in (0,1]");
    std::vector<double> scales = opt.inner_scales;
    std::sort(scales.begin(), scales.end(), std::greater<>());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    if (scales.empty()) throw std::invalid_argument("estimate: no scales given");

    std::vector<Window> windows;
    windows.reserve(scales.size());
    for (double d : scales) windows.push_back(theta_window(d, theta));

    CoverCostModel model(cloud, scales.back());
    auto cost_fn = [&](std::size_t w, double s) { return model.cost(windows[w], s); };
    return estimate_from_windows(windows, cost_fn, cloud.ambient_dim, opt);
}

DimEstimate estimate_dim_phi(const PointCloud& cloud, const std::function<double(double)>& phi,
                             const EstimateOptions& opt) {
    if (!phi) throw std::invalid_argument("estimate: no gauge given");
    std::vector<double> scales = opt.inner_scales;
    std::sort(scales.begin(), scales.end(), std::greater<>());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    if (scales.empty()) throw std::invalid_argument("estimate: no scales given");

    std::vector<Window> windows;
    windows.reserve(scales.size());
    double prev_inner = std::numeric_limits<double>::infinity();
    for (double delta : scales) {
        const double inner = phi(delta);
        if (!(inner > 0.0) || !(inner <= delta)) {
            throw std::invalid_argument("estimate: gauge must satisfy 0 < phi(delta) <= delta");
        }
        if (!(inner < prev_inner)) throw std::invalid_argument("estimate: gauge must be increasing");
        prev_inner = inner;
        windows.push_back(Window{inner, delta});
    }

    CoverCostModel model(cloud, windows.back().inner);
    auto cost_fn = [&](std::size_t w, double s) { return model.cost(windows[w], s); };
    return estimate_from_windows(windows, cost_fn, cloud.ambient_dim, opt);
}

}  // namespace idim::covers
