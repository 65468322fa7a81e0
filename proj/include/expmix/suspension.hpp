#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "expmix/dynamics.hpp"
#include "expmix/grid.hpp"

namespace expmix {

// Point of the suspension space {(y,u) : 0 <= u <= R(y)} with the top
// identified to (Fy, 0); normalized eagerly so u < R(y).
struct SuspensionPoint {
  double y = 0.0;
  double u = 0.0;
};

// Observable on the suspension space, with optional flow derivatives and
// declared Hoelder data for the graded norms.
struct Observable {
  std::function<double(double, double)> f;  // v(y,u)
  std::function<double(double, double)> dt;   // optional
  std::function<double(double, double)> dtt;  // optional
  double declared_holder = 0.0;
  double eval(double y, double u) const { return f(y, u); }
};

struct CurveEntry {
  double t;
  double estimate;
  double se;  // 0 for quadrature entries
};

struct DecayFit {
  double C = 0.0;
  double c = 0.0;
  double r2 = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  int points = 0;
};

struct CorrelationCurve {
  std::vector<CurveEntry> entries;
  std::string method;  // "direct" | "series" | "laplace"
  std::optional<DecayFit> fit;
};

struct FlowResult {
  SuspensionPoint point;
  long long visits;
};

// F_t(y,u) with eager identifications; visits = number of roof crossings.
FlowResult flow(const ExpandingMap& map, const RoofFunction& roof,
                SuspensionPoint p, double t);

struct WeightedSample {
  double y;
  double u;
  double weight;  // R(y)/Rbar
};

// y by inverse-CDF of f0 (numeric CDF on the grid), u uniform on [0,R(y)],
// importance weight R(y)/Rbar.
std::vector<WeightedSample> sample_muR(const ExpandingMap& map,
                                       const RoofFunction& roof,
                                       const GridFunction& f0, std::size_t n,
                                       std::uint64_t seed);

CorrelationCurve correlation_direct(const ExpandingMap& map,
                                    const RoofFunction& roof,
                                    const Observable& v, const Observable& w,
                                    const std::vector<double>& t_grid,
                                    const std::vector<WeightedSample>& samples,
                                    int workers = 1);

// Pollicott series value at a single time: quadrature of the crossing-count
// decomposition with both observables centered first.
double correlation_series(const ExpandingMap& map, const RoofFunction& roof,
                          const GridFunction& f0, const Observable& v,
                          const Observable& w, double t, int y_nodes = 2048,
                          int workers = 1);

CorrelationCurve correlation_series_curve(
    const ExpandingMap& map, const RoofFunction& roof, const GridFunction& f0,
    const Observable& v, const Observable& w,
    const std::vector<double>& t_grid, int y_nodes = 2048, int workers = 1);

// v_s(y) = int_0^{R(y)} e^{+su} v(y,u) du  (sign=+1)
// w_s(y) = int_0^{R(y)} e^{-su} w(y,u) du  (sign=-1)
GridFunction observable_transform(const ExpandingMap& map,
                                  const RoofFunction& roof,
                                  const Observable& v, Complex s, int sign,
                                  int grid_cells = 1024);

struct LaplaceValue {
  Complex value;
  Complex j0;
  double last_term = 0.0;  // truncation indicator
  double j0_bound = 0.0;   // moment bound on |J0|
};

// Laplace transform of the correlation: the n=0 triple integral plus the
// transformed crossing series up to N terms.
LaplaceValue laplace_rho(const ExpandingMap& map, const RoofFunction& roof,
                         const GridFunction& f0, const Observable& v,
                         const Observable& w, Complex s, int N,
                         double settle_tol = 1e-10, int y_nodes = 1024);

// Least squares of log|estimate| over the window of entries above the
// 3*SE floor; throws WindowTooShort below 5 usable entries.
DecayFit decay_fit(const CorrelationCurve& curve);

struct VisitMoment {
  CorrelationCurve curve;
  double delta_hat = 0.0;
  double r2 = 0.0;
};

// int gamma^{psi_t} dmu^R per t (exact in u, quadrature in y), plus the
// fitted exponential rate.
VisitMoment visit_moment(const ExpandingMap& map, const RoofFunction& roof,
                         const GridFunction& f0, double gamma,
                         const std::vector<double>& t_grid,
                         int y_nodes = 2048);

// default t-grid [0, 10*Rbar] at spacing Rbar/8
std::vector<double> default_t_grid(double Rbar);

}  // namespace expmix
