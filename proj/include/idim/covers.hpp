#pragma once

#include "idim/cloud.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace idim::covers {

// Diameter window for a two-scale cover: every covering set has diameter in
// [inner, outer].
struct Window {
    double inner = 0.0;
    double outer = 0.0;
    void validate() const;
};

// Window whose finest diameter is `inner_scale` and whose coarsest is
// inner_scale^theta.  theta = 1 collapses to single-scale box covers.
Window theta_window(double inner_scale, double theta);

// Geometric diameter menu spanning the window with ratio <= 2 between
// consecutive entries; both endpoints appear exactly.
std::vector<double> diameter_menu(const Window&);

struct Cover {
    int ambient_dim = 1;
    std::vector<double> centers;
    std::vector<double> diameters;

    std::size_t size() const { return diameters.size(); }
    const double* center(std::size_t i) const { return centers.data() + i * static_cast<std::size_t>(ambient_dim); }
    double cost(double s) const;
    // Every cloud point lies in some ball of the cover.
    bool covers(const PointCloud&) const;
};

// Minimal sum of diameter^s over covers of the cloud with diameters drawn
// from a geometric menu (ratio <= 2) spanning the window.  Exact for the menu
// in dimension 1; dyadic-cell relaxation otherwise.
double min_cover_cost(const PointCloud&, const Window&, double s);

// A cover achieving min_cover_cost.
Cover two_scale_cover(const PointCloud&, const Window&, double s);

// Occupied boxes of side epsilon on the grid anchored at the cloud min corner.
std::size_t box_count(const PointCloud&, double epsilon);

// Halving scale menu from `top` down to 4x the resolution (never deeper than
// top * 2^-30), shallow to deep.  Throws if fewer than two scales fit.
std::vector<double> scale_menu(double resolution, double top = 0.25);

// Reusable cover-cost oracle for one cloud: the point data is indexed once
// and per-window structures are cached, so repeated evaluations during a
// root search stay cheap.
class CoverCostModel {
  public:
    // min_inner: the finest window inner scale this model will be asked for.
    CoverCostModel(const PointCloud&, double min_inner);
    ~CoverCostModel();
    CoverCostModel(CoverCostModel&&) noexcept;
    CoverCostModel& operator=(CoverCostModel&&) noexcept;

    double cost(const Window&, double s);
    Cover cover(const Window&, double s);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

enum class EstimatorMode {
    slope,      // s equalizing costs across two window depths
    threshold,  // s where the cost profile crosses 1
};

struct EstimateOptions {
    // Finest diameters of the windows, ordered from shallow to deep.
    std::vector<double> inner_scales;
    EstimatorMode mode = EstimatorMode::slope;
    double s_tolerance = 1e-3;
    // Scale-index gap between the two windows of a slope pair; 0 picks half
    // the grid length.
    std::size_t pair_span = 0;
};

struct DimEstimate {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    // (inner scale, s root) per window (threshold) or per pair keyed by the
    // deep window (slope).
    std::vector<std::pair<double, double>> scale_roots;
};

// Core estimator on an arbitrary ordered window family; cost_fn(w, s) returns
// the minimal cover cost for windows[w].
DimEstimate estimate_from_windows(const std::vector<Window>&,
                                  const std::function<double(std::size_t, double)>& cost_fn,
                                  double s_max, const EstimateOptions&);

// Intermediate dimension of the cloud at the given theta.
DimEstimate estimate_intermediate_dim(const PointCloud&, double theta, const EstimateOptions&);

// Gauge variant: windows are [phi(delta), delta] over the option scales,
// which are read as outer scales here.  phi must be increasing with
// 0 < phi(delta) <= delta on the grid.
DimEstimate estimate_dim_phi(const PointCloud&, const std::function<double(double)>& phi,
                             const EstimateOptions&);

}  // namespace idim::covers
