#include "idim/capacity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace idim::capacity {

void KernelParams::validate() const {
    if (!(r > 0.0) || !(r < 1.0)) throw std::invalid_argument("kernel: r must be in (0,1)");
    if (!(theta > 0.0) || !(theta <= 1.0)) throw std::invalid_argument("kernel: theta must be in (0,1]");
    if (!(s >= 0.0)) throw std::invalid_argument("kernel: s must be >= 0");
    if (!(m > 0.0)) throw std::invalid_argument("kernel: m must be > 0");
}

double kernel_value(const KernelParams& k, double dist) {
    if (dist < k.r) return 1.0;
    const double r_theta = std::pow(k.r, k.theta);
    if (dist < r_theta) return std::pow(k.r / dist, k.s);
    return std::pow(k.r, k.theta * (k.m - k.s) + k.s) / std::pow(dist, k.m);
}

double energy(const PointCloud& cloud, const std::vector<double>& weights,
              const KernelParams& params) {
    cloud.validate();
    params.validate();
    if (weights.size() != cloud.size()) throw std::invalid_argument("energy: weights misaligned with cloud");
    const int dim = cloud.ambient_dim;
    double total = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const double* pi = cloud.point(i);
        for (std::size_t j = 0; j < cloud.size(); ++j) {
            if (weights[j] == 0.0) continue;
            const double* pj = cloud.point(j);
            double q = 0.0;
            for (int d = 0; d < dim; ++d) q += (pi[d] - pj[d]) * (pi[d] - pj[d]);
            total += weights[i] * weights[j] * kernel_value(params, std::sqrt(q));
        }
    }
    return total;
}

double potential(const PointCloud& cloud, const std::vector<double>& weights,
                 const KernelParams& params, const std::vector<double>& x) {
    cloud.validate();
    params.validate();
    if (weights.size() != cloud.size()) throw std::invalid_argument("potential: weights misaligned with cloud");
    if (x.size() != static_cast<std::size_t>(cloud.ambient_dim)) {
        throw std::invalid_argument("potential: point dimension mismatch");
    }
    const int dim = cloud.ambient_dim;
    double total = 0.0;
    for (std::size_t j = 0; j < cloud.size(); ++j) {
        if (weights[j] == 0.0) continue;
        const double* pj = cloud.point(j);
        double q = 0.0;
        for (int d = 0; d < dim; ++d) q += (x[d] - pj[d]) * (x[d] - pj[d]);
        total += weights[j] * kernel_value(params, std::sqrt(q));
    }
    return total;
}

double EquilibriumResult::support_deviation() const {
    double dev = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 1e-9) dev = std::max(dev, std::abs(potentials[i] - energy));
    }
    return dev;
}

std::size_t EquilibriumResult::support_size(double w_tol) const {
    std::size_t n = 0;
    for (double w : weights) n += w > w_tol;
    return n;
}

KktReport kkt_report(const EquilibriumResult& eq) {
    KktReport rep;
    rep.relative_gap = eq.gap / eq.energy;
    rep.relative_support_deviation = eq.support_deviation() / eq.energy;
    rep.support = eq.support_size();
    return rep;
}

void SolveAudit::record(const EquilibriumResult& eq) {
    ++solves;
    if (!eq.converged) ++failures;
    const KktReport rep = kkt_report(eq);
    worst_relative_gap = std::max(worst_relative_gap, rep.relative_gap);
    worst_relative_deviation = std::max(worst_relative_deviation, rep.relative_support_deviation);
}

namespace {

constexpr std::size_t kMaxCloud = 20000;

// Log-distance columns computed on demand and kept for the lifetime of one
// solver, so repeated solves on a cloud (profile roots, slope pairs) reuse
// them across every s and r.  Logs turn each kernel entry into one exp.
class LogDistanceCache {
  public:
    explicit LogDistanceCache(const PointCloud& cloud) : cloud_(cloud) {}

    const std::vector<double>& column(std::size_t j) {
        auto it = cols_.find(j);
        if (it != cols_.end()) return it->second;
        const std::size_t n = cloud_.size();
        std::vector<double> col(n);
        const int dim = cloud_.ambient_dim;
        const double* pj = cloud_.point(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double* pi = cloud_.point(i);
            double q = 0.0;
            for (int d = 0; d < dim; ++d) q += (pi[d] - pj[d]) * (pi[d] - pj[d]);
            col[i] = 0.5 * std::log(q);  // log 0 = -inf lands in the plateau branch
        }
        return cols_.emplace(j, std::move(col)).first->second;
    }

  private:
    const PointCloud& cloud_;
    std::unordered_map<std::size_t, std::vector<double>> cols_;
};

// Kernel on log-distances with the breakpoints precomputed.
struct KernelEval {
    double log_r, log_break, s, m, log_tail;

    explicit KernelEval(const KernelParams& k)
        : log_r(std::log(k.r)),
          log_break(k.theta * std::log(k.r)),
          s(k.s),
          m(k.m),
          log_tail((k.theta * (k.m - k.s) + k.s) * std::log(k.r)) {}

    double operator()(double logd) const {
        if (logd < log_r) return 1.0;
        if (logd < log_break) return std::exp(s * (log_r - logd));
        return std::exp(log_tail - m * logd);
    }
};

class Solver {
  public:
    explicit Solver(const PointCloud& cloud) : cloud_(cloud), cache_(cloud) {
        cloud.validate();
        if (cloud.size() > kMaxCloud) throw std::invalid_argument("equilibrium: cloud larger than 20000 points");
    }

    // Lawson-Hanson style active set on f(z) = z'Kz - 2*sum(z) over z >= 0,
    // whose optimum rescales to the equilibrium measure (gamma = 1/sum z).
    EquilibriumResult solve(const KernelParams& params, const SolveOptions& opt) {
        params.validate();
        const std::size_t n = cloud_.size();
        const KernelEval kernel(params);

        std::vector<std::size_t> support;
        std::vector<double> zs;
        initial_support(opt, support, zs);
        seen_.clear();
        bool single_add = false;

        EquilibriumResult best;
        best.gap = std::numeric_limits<double>::infinity();

        EquilibriumResult res;
        double prev_energy = std::numeric_limits<double>::infinity();
        bool restarted = false;
        bool densified = false;
        int weak = 0;
        for (int round = 1; round <= opt.max_rounds; ++round) {
            if (!nnls_on_support(kernel, support, zs)) {
                thin_support(support, zs);
                continue;
            }
            double zsum = 0.0;
            for (double v : zs) zsum += v;
            const double gamma = 1.0 / zsum;

            res = EquilibriumResult{};
            res.weights.assign(n, 0.0);
            for (std::size_t a = 0; a < support.size(); ++a) res.weights[support[a]] = zs[a] * gamma;
            res.potentials.assign(n, 0.0);
            for (std::size_t a = 0; a < support.size(); ++a) {
                const double w = zs[a] * gamma;
                if (w == 0.0) continue;
                const std::vector<double>& logd = cache_.column(support[a]);
                for (std::size_t i = 0; i < n; ++i) res.potentials[i] += w * kernel(logd[i]);
            }
            // True quadratic form; equals gamma only when the restricted
            // solve finished exactly, and the saddle guard can hand back a
            // feasible point that did not.
            res.energy = 0.0;
            for (std::size_t a = 0; a < support.size(); ++a) {
                res.energy += res.weights[support[a]] * res.potentials[support[a]];
            }
            res.capacity = 1.0 / res.energy;
            res.rounds = round;

            double min_pot = std::numeric_limits<double>::infinity();
            for (double p : res.potentials) min_pot = std::min(min_pot, p);
            res.gap = res.energy - min_pot;
            if (opt.verbose) {
                std::fprintf(stderr, "round %d support=%zu E=%.12g gap/E=%.3e\n", round,
                             support.size(), res.energy, res.gap / res.energy);
            }

            if (res.gap < best.gap) best = res;
            if (res.gap <= opt.gap_tol * res.energy) {
                best.converged = true;
                return best;
            }

            // A repeated support signature means numerical ties are causing
            // churn; fall back to one careful addition at a time.
            if (!seen_.insert(signature(support)).second) single_add = true;

            const bool stagnant = res.energy >= prev_energy * (1.0 - 1e-14);
            const bool crawling = res.energy >= prev_energy * (1.0 - 3e-3);
            prev_energy = res.energy;
            if (!stagnant) single_add = false;
            weak = crawling ? weak + 1 : 0;

            // Instances whose equilibrium spreads over most of the cloud make
            // the active set grind: each round pays a dense factorization yet
            // moves the support by a handful of points.  Hand those to a
            // full-matrix projected gradient pass and keep the active set for
            // the exact finish on the support it finds.
            if (!densified && weak >= 6 && res.gap > 1e3 * opt.gap_tol * res.energy &&
                n >= 1024 && n <= 4096) {
                densified = true;
                if (dense_descent(kernel, support, zs, res)) {
                    seen_.clear();
                    single_add = false;
                    weak = 0;
                    prev_energy = std::numeric_limits<double>::infinity();
                    continue;
                }
            }

            // The plateau makes the kernel matrix indefinite across point
            // pairs closer than r, and the active set can then park mass on
            // the wrong member of such a pair.  The energy is linear in a
            // fixed-sum transfer between the pair, so move mass directly to
            // the worst violator when normal progress has stopped.
            bool moved = false;
            if (stagnant) moved = transfer_to_violator(kernel, support, zs, res, opt);

            if (!moved) {
                // Pull in the strongest KKT violators; the batch scales with
                // the support so dense-support instances grow geometrically.
                std::size_t batch = std::clamp<std::size_t>(support.size(), 64,
                                                            static_cast<std::size_t>(opt.max_added_per_round));
                if (single_add) batch = 1;
                std::vector<std::size_t> order(n);
                for (std::size_t i = 0; i < n; ++i) order[i] = i;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    if (res.potentials[a] != res.potentials[b]) return res.potentials[a] < res.potentials[b];
                    return a < b;
                });
                const double bar = res.energy * (1.0 - 0.25 * opt.gap_tol);
                std::size_t added = 0;
                for (std::size_t i = 0; i < n && added < batch; ++i) {
                    const std::size_t cand = order[i];
                    if (res.potentials[cand] >= bar) break;
                    if (std::binary_search(support.begin(), support.end(), cand)) continue;
                    const auto pos = std::lower_bound(support.begin(), support.end(), cand);
                    zs.insert(zs.begin() + (pos - support.begin()), 0.0);
                    support.insert(pos, cand);
                    ++added;
                }
                moved = added > 0;
            }
            // Nothing left to add: the gap lives inside the support, which
            // happens when the saddle guard hands back an unpolished point.
            if (!moved) moved = transfer_to_violator(kernel, support, zs, res, opt);
            if (!moved) {
                if (!restarted) {
                    restarted = true;
                    SolveOptions cold = opt;
                    cold.warm_start = nullptr;
                    initial_support(cold, support, zs);
                    seen_.clear();
                    single_add = false;
                    prev_energy = std::numeric_limits<double>::infinity();
                    continue;
                }
                break;  // stalled: no move improves the certificate
            }
        }
        return best;
    }

  private:
    void initial_support(const SolveOptions& opt, std::vector<std::size_t>& support,
                         std::vector<double>& zs) const {
        const std::size_t n = cloud_.size();
        support.clear();
        zs.clear();
        if (opt.warm_start && opt.warm_start->size() == n) {
            for (std::size_t i = 0; i < n; ++i) {
                if ((*opt.warm_start)[i] > 1e-12) {
                    support.push_back(i);
                    zs.push_back((*opt.warm_start)[i]);
                }
            }
        }
        if (support.empty()) {
            const std::size_t stride = std::max<std::size_t>(1, n / 256);
            for (std::size_t i = 0; i < n; i += stride) support.push_back(i);
            if (support.back() != n - 1) support.push_back(n - 1);
            zs.assign(support.size(), 1.0 / static_cast<double>(support.size()));
        }
    }

    void thin_support(std::vector<std::size_t>& support, std::vector<double>& zs) const {
        std::vector<std::size_t> ts;
        std::vector<double> tz;
        for (std::size_t a = 0; a < support.size(); a += 2) {
            ts.push_back(support[a]);
            tz.push_back(zs[a]);
        }
        if (ts.size() >= 2) {
            support = std::move(ts);
            zs = std::move(tz);
        }
    }

    static unsigned long long signature(const std::vector<std::size_t>& support) {
        unsigned long long h = 1469598103934665603ull;
        for (std::size_t i : support) {
            h ^= static_cast<unsigned long long>(i) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h ^ support.size();
    }


    // Full-matrix projected gradient pass for dense-support instances; leaves
    // support and zs at the (approximate) measure it reaches.  The caller's
    // active set turns that into an exact KKT point.
    bool dense_descent(const KernelEval& kernel, std::vector<std::size_t>& support,
                       std::vector<double>& zs, const EquilibriumResult& res) {
        const std::size_t n = cloud_.size();
        const Eigen::Index ni = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd K(ni, ni);
        for (std::size_t j = 0; j < n; ++j) {
            const std::vector<double>& logd = cache_.column(j);
            for (std::size_t i = 0; i < n; ++i) {
                K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel(logd[i]);
            }
        }
        Eigen::VectorXd z(ni);
        for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = res.weights[i] / res.energy;

        Eigen::VectorXd v = Eigen::VectorXd::Ones(ni).normalized();
        for (int it = 0; it < 30; ++it) v = (K.selfadjointView<Eigen::Lower>() * v).normalized();
        const double lmax = v.dot(K.selfadjointView<Eigen::Lower>() * v);
        if (!(lmax > 0.0)) return false;
        const double step = 0.9 / lmax;

        double prev = std::numeric_limits<double>::infinity();
        for (int it = 1; it <= 4000; ++it) {
            Eigen::VectorXd pot = K.selfadjointView<Eigen::Lower>() * z;
            if (it % 250 == 0) {
                const double zsum = z.sum();
                const double energy = (z.dot(pot)) / (zsum * zsum);
                const double min_pot = pot.minCoeff() / zsum;
                if (energy - min_pot <= 5e-4 * energy) break;
                if (energy >= prev * (1.0 - 1e-9)) break;
                prev = energy;
            }
            pot.array() -= 1.0;
            z = (z - step * pot).cwiseMax(0.0);
        }

        const double zmax = z.maxCoeff();
        if (!(zmax > 0.0)) return false;
        support.clear();
        zs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = z[static_cast<Eigen::Index>(i)];
            if (zi > 1e-12 * zmax) {
                support.push_back(i);
                zs.push_back(zi);
            }
        }
        return support.size() >= 2;
    }

    // Exact line-search mass transfers from the best donor atom to the
    // minimum-potential point, repeated until the moves stop paying.  The
    // energy is quadratic in each fixed-sum transfer, so every step is
    // globally optimal for its pair, and a run of them walks the measure off
    // plateau-tied saddles that defeat the restricted solves.  Returns false
    // when no transfer improves the energy.
    bool transfer_to_violator(const KernelEval& kernel, std::vector<std::size_t>& support,
                              std::vector<double>& zs, EquilibriumResult& res,
                              const SolveOptions& opt) {
        const std::size_t n = res.potentials.size();
        std::vector<double> w(n, 0.0);
        for (std::size_t a = 0; a < support.size(); ++a) w[support[a]] = res.weights[support[a]];
        double energy = res.energy;
        bool any = false;

        const int max_steps = 20000;
        for (int step = 0; step < max_steps; ++step) {
            std::size_t c = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (res.potentials[i] < res.potentials[c]) c = i;
            }
            if (energy - res.potentials[c] <= 0.5 * opt.gap_tol * energy) break;

            const std::vector<double>& logd = cache_.column(c);
            const double pc = res.potentials[c];
            double best_delta = -1e-13 * energy;
            std::size_t best_a = support.size();
            double best_t = 0.0;
            for (std::size_t a = 0; a < support.size(); ++a) {
                const double wa = w[support[a]];
                if (wa <= 0.0 || support[a] == c) continue;
                const double curv = 2.0 * (1.0 - kernel(logd[support[a]]));
                const double slope = 2.0 * (pc - res.potentials[support[a]]);
                double t = wa;
                if (curv > 1e-18) t = std::min(wa, -slope / (2.0 * curv));
                if (t <= 0.0) continue;
                const double delta = slope * t + curv * t * t;
                if (delta < best_delta) {
                    best_delta = delta;
                    best_a = a;
                    best_t = t;
                }
            }
            if (best_a == support.size()) break;

            const std::size_t donor = support[best_a];
            const double t = best_t;
            const std::vector<double>& logd_donor = cache_.column(donor);
            for (std::size_t i = 0; i < n; ++i) {
                res.potentials[i] += t * (kernel(logd[i]) - kernel(logd_donor[i]));
            }
            energy += best_delta;
            w[c] += t;
            if (t >= w[donor] * (1.0 - 1e-12)) {
                w[donor] = 0.0;
                support.erase(support.begin() + static_cast<std::ptrdiff_t>(best_a));
            } else {
                w[donor] -= t;
            }
            if (!std::binary_search(support.begin(), support.end(), c)) {
                support.insert(std::lower_bound(support.begin(), support.end(), c), c);
            }
            any = true;
        }
        if (!any) return false;

        zs.resize(support.size());
        for (std::size_t a = 0; a < support.size(); ++a) zs[a] = w[support[a]] / energy;
        return true;
    }

    // Restricted NNLS pass: repeatedly solve K_SS t = 1, then move the
    // feasible point zs toward t, removing the coordinates that hit zero.
    // On success zs solves the support system with zs >= 0.
    bool nnls_on_support(const KernelEval& kernel, std::vector<std::size_t>& support,
                         std::vector<double>& zs) {
        // Kernel matrix for the entry support; removal rounds only compact it.
        const std::size_t k0 = support.size();
        Eigen::MatrixXd base(static_cast<Eigen::Index>(k0), static_cast<Eigen::Index>(k0));
        for (std::size_t b = 0; b < k0; ++b) {
            const std::vector<double>& logd = cache_.column(support[b]);
            for (std::size_t a = 0; a < k0; ++a) {
                base(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = kernel(logd[support[a]]);
            }
        }
        std::vector<Eigen::Index> pos(k0);
        for (std::size_t a = 0; a < k0; ++a) pos[a] = static_cast<Eigen::Index>(a);

        for (int inner = 0; inner < 400 && !support.empty(); ++inner) {
            const std::size_t k = support.size();
            Eigen::MatrixXd kss(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
            for (std::size_t b = 0; b < k; ++b) {
                for (std::size_t a = 0; a < k; ++a) {
                    kss(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = base(pos[a], pos[b]);
                }
            }
            const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k));

            Eigen::VectorXd t;
            bool solved = false;
            for (double eps : {0.0, 1e-12, 1e-10, 1e-8}) {
                Eigen::MatrixXd damped = kss;
                if (eps > 0.0) damped.diagonal().array() += eps;
                t = damped.ldlt().solve(rhs);
                if (!t.allFinite()) continue;
                const double resid = (kss * t - rhs).lpNorm<Eigen::Infinity>();
                if (resid > 1e-7 && eps == 0.0) continue;
                if (resid > 1e-5) continue;
                if (!(t.sum() > 0.0)) continue;
                solved = true;
                break;
            }
            if (!solved) {
                // The plateau block structure can leave K_SS indefinite, where
                // LDLT pivoting breaks down; plain LU still solves it.
                t = Eigen::PartialPivLU<Eigen::MatrixXd>(kss).solve(rhs);
                if (t.allFinite() && (kss * t - rhs).lpNorm<Eigen::Infinity>() <= 1e-5 &&
                    t.sum() > 0.0) {
                    solved = true;
                } else {
                    Eigen::MatrixXd damped = kss;
                    damped.diagonal().array() += 1e-10;
                    t = Eigen::PartialPivLU<Eigen::MatrixXd>(damped).solve(rhs);
                    solved = t.allFinite() &&
                             (kss * t - rhs).lpNorm<Eigen::Infinity>() <= 1e-5 && t.sum() > 0.0;
                }
            }
            if (!solved) return false;

            const double floor = -1e-12 * t.cwiseAbs().maxCoeff();
            bool feasible = true;
            for (Eigen::Index a = 0; a < t.size(); ++a) {
                if (t[a] < floor) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                for (std::size_t a = 0; a < k; ++a) zs[a] = std::max(t[static_cast<Eigen::Index>(a)], 0.0);
                return true;
            }

            // Step from zs toward t until the first coordinate hits zero.
            double alpha = 1.0;
            for (std::size_t a = 0; a < k; ++a) {
                const double ta = t[static_cast<Eigen::Index>(a)];
                if (ta < floor) {
                    const double denom = zs[a] - ta;
                    const double step = denom > 0.0 ? zs[a] / denom : 0.0;
                    alpha = std::min(alpha, step);
                }
            }
            // On an indefinite face the solve lands on a saddle and stepping
            // toward it raises the objective; keep the feasible point instead
            // and let the caller price it.
            {
                Eigen::VectorXd z0(static_cast<Eigen::Index>(k));
                for (std::size_t a = 0; a < k; ++a) z0[static_cast<Eigen::Index>(a)] = zs[a];
                const Eigen::VectorXd z1 = z0 + alpha * (t - z0);
                const double f0 = z0.dot(kss * z0) - 2.0 * z0.sum();
                const double f1 = z1.dot(kss * z1) - 2.0 * z1.sum();
                if (f1 > f0) return true;
            }
            double zmax = 0.0;
            for (std::size_t a = 0; a < k; ++a) {
                zs[a] += alpha * (t[static_cast<Eigen::Index>(a)] - zs[a]);
                zmax = std::max(zmax, zs[a]);
            }
            std::vector<std::size_t> ns;
            std::vector<double> nz;
            std::vector<Eigen::Index> np;
            ns.reserve(k);
            nz.reserve(k);
            np.reserve(k);
            for (std::size_t a = 0; a < k; ++a) {
                const bool blocked = t[static_cast<Eigen::Index>(a)] < floor && zs[a] <= 1e-14 * zmax;
                if (!blocked && zs[a] > 0.0) {
                    ns.push_back(support[a]);
                    nz.push_back(zs[a]);
                    np.push_back(pos[a]);
                }
            }
            if (ns.empty()) {
                Eigen::Index top = 0;
                t.maxCoeff(&top);
                ns.push_back(support[static_cast<std::size_t>(top)]);
                nz.push_back(std::max(t[top], 1e-12));
                np.push_back(pos[static_cast<std::size_t>(top)]);
            }
            support = std::move(ns);
            zs = std::move(nz);
            pos = std::move(np);
        }
        // Iteration cap: zs stayed feasible through every line search, so let
        // the caller price this point rather than discarding the progress.
        return true;
    }

    const PointCloud& cloud_;
    LogDistanceCache cache_;
    std::unordered_set<unsigned long long> seen_;
};

// Bracketed root of a decreasing function: Illinois regula falsi with a
// periodic bisection step, clamped to an endpoint when there is no sign
// change.
double root_decreasing(const std::function<double(double)>& g, double lo, double hi, double x_tol) {
    double flo = g(lo);
    if (flo <= 0.0) return lo;
    double fhi = g(hi);
    if (fhi >= 0.0) return hi;
    int side = 0;
    for (int it = 0; it < 60 && hi - lo > x_tol; ++it) {
        double x;
        if (it % 4 == 3) {
            x = 0.5 * (lo + hi);
        } else {
            x = (lo * fhi - hi * flo) / (fhi - flo);
            const double margin = 0.01 * (hi - lo);
            x = std::clamp(x, lo + margin, hi - margin);
        }
        const double fx = g(x);
        if (fx > 0.0) {
            lo = x;
            flo = fx;
            if (side == 1) fhi *= 0.5;
            side = 1;
        } else {
            hi = x;
            fhi = fx;
            if (side == -1) flo *= 0.5;
            side = -1;
        }
    }
    return 0.5 * (lo + hi);
}

double profile_root_impl(Solver& solver, double theta, double r, double m, const SolveOptions& opt,
                         double s_tol, SolveAudit* audit = nullptr) {
    std::vector<double> warm;
    auto log_capacity = [&](double s) {
        SolveOptions local = opt;
        if (!warm.empty()) local.warm_start = &warm;
        const EquilibriumResult eq = solver.solve(KernelParams{r, theta, s, m}, local);
        if (audit) audit->record(eq);
        warm = eq.weights;
        return std::log(eq.capacity);
    };
    const double log_inv_r = std::log(1.0 / r);
    // theta = 1 collapses the window, the kernel sheds its s dependence, and
    // the defining equation solves in closed form from one capacity value.
    if (theta == 1.0) return std::clamp(log_capacity(m) / log_inv_r, 0.0, m);
    auto g = [&](double s) { return log_capacity(s) / log_inv_r - s; };
    return root_decreasing(g, 0.0, m, s_tol);
}

}  // namespace


EquilibriumResult equilibrium_measure(const PointCloud& cloud, const KernelParams& params,
                                      const SolveOptions& opt) {
    Solver solver(cloud);
    return solver.solve(params, opt);
}

double capacity_profile_root(const PointCloud& cloud, double theta, double r, double m,
                             const SolveOptions& opt, double s_tol) {
    Solver solver(cloud);
    return profile_root_impl(solver, theta, r, m, opt, s_tol);
}

covers::DimEstimate capacity_dim(const PointCloud& cloud, double theta, const ProfileOptions& opt) {
    if (!(theta > 0.0) || !(theta <= 1.0)) throw std::invalid_argument("capacity: theta must be in (0,1]");
    std::vector<double> radii = opt.radii;
    std::sort(radii.begin(), radii.end(), std::greater<>());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    if (radii.empty()) throw std::invalid_argument("capacity: no radii given");
    const double m = opt.m > 0.0 ? opt.m : cloud.ambient_dim;

    const bool thin = opt.max_points > 0 && cloud.size() > opt.max_points;
    std::unique_ptr<Solver> shared;
    if (!thin) shared = std::make_unique<Solver>(cloud);
    std::vector<PointCloud> thin_clouds(radii.size());
    std::vector<std::unique_ptr<Solver>> thin_solvers(radii.size());
    auto solver_for = [&](std::size_t idx) -> Solver& {
        if (!thin) return *shared;
        if (!thin_solvers[idx]) {
            double spacing = radii[idx] / 8.0;
            PointCloud sc = subsample_to_spacing(cloud, spacing);
            while (sc.size() > opt.max_points) {
                spacing *= std::sqrt(2.0);
                sc = subsample_to_spacing(cloud, spacing);
            }
            thin_clouds[idx] = std::move(sc);
            thin_solvers[idx] = std::make_unique<Solver>(thin_clouds[idx]);
        }
        return *thin_solvers[idx];
    };

    covers::DimEstimate est;
    std::vector<double> depths;  // mean log window depth per slot

    if (opt.slope) {
        if (radii.size() < 2) throw std::invalid_argument("capacity: slope pairing needs at least 2 radii");
        std::size_t span = opt.pair_span == 0 ? radii.size() / 2 : opt.pair_span;
        span = std::clamp<std::size_t>(span, 1, radii.size() - 1);

        // One warm-start chain per grid slot, reused across the bisection.
        std::vector<std::vector<double>> warms(radii.size());
        auto log_capacity = [&](std::size_t idx, double s) {
            SolveOptions local = opt.solve;
            if (!warms[idx].empty()) local.warm_start = &warms[idx];
            const EquilibriumResult eq =
                solver_for(idx).solve(KernelParams{radii[idx], theta, s, m}, local);
            if (opt.audit) opt.audit->record(eq);
            warms[idx] = eq.weights;
            return std::log(eq.capacity);
        };
        // At theta = 1 the kernel has no s dependence: one capacity per radius
        // and the slope of its logs is the root.
        std::vector<double> logc_at_m;
        if (theta == 1.0) {
            logc_at_m.reserve(radii.size());
            for (std::size_t i = 0; i < radii.size(); ++i) logc_at_m.push_back(log_capacity(i, m));
        }
        for (std::size_t i = 0; i + span < radii.size(); ++i) {
            const std::size_t deep = i + span;
            const double denom = std::log(1.0 / radii[deep]) - std::log(1.0 / radii[i]);
            double root;
            if (theta == 1.0) {
                root = std::clamp((logc_at_m[deep] - logc_at_m[i]) / denom, 0.0, m);
            } else {
                auto g = [&](double s) { return (log_capacity(deep, s) - log_capacity(i, s)) / denom - s; };
                root = root_decreasing(g, 0.0, m, opt.s_tolerance);
            }
            est.scale_roots.emplace_back(radii[deep], root);
            depths.push_back(0.5 * (std::log(1.0 / radii[deep]) + std::log(1.0 / radii[i])));
        }
    } else {
        for (std::size_t i = 0; i < radii.size(); ++i) {
            est.scale_roots.emplace_back(
                radii[i], profile_root_impl(solver_for(i), theta, radii[i], m, opt.solve,
                                            opt.s_tolerance, opt.audit));
            depths.push_back(std::log(1.0 / radii[i]));
        }
    }

    const std::size_t total = est.scale_roots.size();
    const std::size_t tail = (total + 1) / 2;
    double sum = 0.0;
    est.lower = std::numeric_limits<double>::infinity();
    est.upper = -std::numeric_limits<double>::infinity();
    for (std::size_t i = total - tail; i < total; ++i) {
        const double root = est.scale_roots[i].second;
        sum += root;
        est.lower = std::min(est.lower, root);
        est.upper = std::max(est.upper, root);
    }
    est.value = sum / static_cast<double>(tail);

    if (opt.slope && opt.extrapolate && tail >= 2) {
        // Least squares of root against 1/depth over the tail; the intercept
        // is the depth -> infinity limit.  Roots climb toward that limit, so
        // a fit that bends the other way, or lands more than 0.3 above the
        // best measured root, means the deepest window hit the sampling
        // floor; keep the best root in that case.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = total - tail; i < total; ++i) {
            const double x = 1.0 / depths[i];
            const double y = est.scale_roots[i].second;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double nf = static_cast<double>(tail);
        const double denom = nf * sxx - sx * sx;
        if (std::abs(denom) > 1e-18) {
            const double slope = (nf * sxy - sx * sy) / denom;
            const double intercept = (sy - slope * sx) / nf;
            const double peak = est.upper;
            const double limit =
                (slope > 0.0 || intercept < peak || intercept > peak + 0.3) ? peak : intercept;
            est.value = std::clamp(limit, 0.0, m);
            est.lower = std::min(est.lower, est.value);
            est.upper = std::max(est.upper, est.value);
        }
    }
    return est;
}

}  // namespace idim::capacity
