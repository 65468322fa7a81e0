#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "expmix/dynamics.hpp"
#include "expmix/grid.hpp"
#include "expmix/suspension.hpp"
#include "expmix/transfer.hpp"

namespace expmix {

// f(y,z) = (F y, G(y,z)) with uniformly contracting fibers over an
// expanding base. Fiber space Z is an interval (or circle).
struct SkewMap {
  ExpandingMap base;
  std::function<double(double, double)> G;
  double fiber_lo = 0.0, fiber_hi = 1.0;
  bool circle = false;
  double fiber_lip = 0.5;  // declared sup_z |dG/dz|
  // measured contraction pair, filled by contraction_check
  double C = 0.0, gamma0 = 0.0;
  double fiber_center() const { return 0.5 * (fiber_lo + fiber_hi); }
  double fiber_diam() const { return fiber_hi - fiber_lo; }
};

// Observable on the skew suspension with declared regularity data for the
// graded seminorm in (y,z).
struct SkewObservable {
  std::function<double(double, double, double)> f;  // v(y,z,u)
  double alpha = 1.0;
  double declared_holder = 0.0;  // |v(y,z,u)-v(y',z',u)| / (|y-y'|+|z-z'|)^a
  double z_lip = 0.0;            // Lipschitz constant in z alone
  double eval(double y, double z, double u) const { return f(y, z, u); }
};

struct SkewState {
  double y, z;
};

std::vector<SkewState> skew_iterate(const SkewMap& f, SkewState x, int n);

struct ContractionReport {
  double C = 0.0;
  double gamma0 = 0.0;
  bool degenerate = false;  // fibers collapse after one step
  std::vector<double> ratio_per_n;
  std::vector<int> n_list;
};

// Measures the fiber contraction pair (C, gamma0) from sampled fiber pairs
// via a log-linear fit of the worst ratio against n.
ContractionReport contraction_check(const SkewMap& f, int num_pairs,
                                    const std::vector<int>& n_list,
                                    std::uint64_t seed);

struct EtaAverageResult {
  double value = 0.0;               // eta_y(v) at the requested y
  std::vector<double> increments;   // sup norms of successive differences
  GridFunction vbar;                // fiber average as a base function
  double vbar_holder = 0.0;
  double stalled_fraction = 0.0;    // nodes whose increments did not settle
};

// Disintegration average eta_y(v) = lim L^n v_n with v_n(y) = v(f^n(y,0)):
// computed on the base grid through the normalized transfer operator.
EtaAverageResult eta_average(const SkewMap& f, const RoofFunction& roof,
                             const SpectralData& spectral0,
                             const std::function<double(double, double)>& v,
                             double y, int n, int grid_cells = 1024,
                             double tol = 1e-8);

struct MuXIntegral {
  double lower = 0.0, upper = 0.0, value = 0.0;
  double gap = 0.0;        // upper - lower
  double gap_bound = 0.0;  // |v|_alpha (C gamma0^n diam Z)^alpha
};

// Two-sided approximation of int v dmu_X through fiber envelopes of
// v o f^n, with Lipschitz padding on the fiber grid.
MuXIntegral muX_integral(const SkewMap& f, const RoofFunction& roof,
                         const SpectralData& spectral0,
                         const std::function<double(double, double)>& v,
                         double v_alpha_seminorm, double v_z_lip, int n,
                         int fiber_grid = 257, int base_cells = 1024);

struct I1I2Row {
  double t;
  double I1, I1_se;
  double envelope;  // |v|_inf |w|_alpha int gamma^{psi_t} dmu^R
  double I2;
  double quotient_corr;  // correlation of (vbar, w_t) on the quotient
};

struct FlowCorrelationResult {
  CorrelationCurve curve;  // direct MC correlation on the skew suspension
  std::vector<I1I2Row> table;
};

struct FlowCorrelationOptions {
  std::size_t samples = 100000;
  std::size_t diag_samples = 20000;
  int eta_mc = 32;        // inner samples for the fiber average
  int burn_in = 25;       // skew burn-in steps for mu_X equilibration
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<double> diag_t;  // defaults to t_grid when empty
};

FlowCorrelationResult flow_correlation(const SkewMap& f,
                                       const RoofFunction& roof,
                                       const SpectralData& spectral0,
                                       const SkewObservable& v,
                                       const SkewObservable& w,
                                       const std::vector<double>& t_grid,
                                       const FlowCorrelationOptions& opts);

}  // namespace expmix
