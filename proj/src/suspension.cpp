#include "expmix/suspension.hpp"

#include <algorithm>
#include <cmath>

#include "expmix/parallel.hpp"
#include "expmix/rng.hpp"
#include "expmix/transfer.hpp"

namespace expmix {

namespace {

// Offset-midpoint nodes keep quadrature orbits off the dyadic lattice, so
// iterates of the zoo maps never collide with partition endpoints. The
// first-order endpoint term is restored explicitly.
constexpr double kOffset = 0.3819660112501051518;  // 1 - 1/phi

struct YQuad {
  std::vector<double> nodes;
  double h;
};

YQuad orbit_safe_nodes(int n) {
  YQuad q;
  q.h = 1.0 / n;
  q.nodes.resize(n);
  for (int i = 0; i < n; ++i) q.nodes[i] = (i + kOffset) * q.h;
  return q;
}

template <typename F>
double orbit_safe_integral(const YQuad& q, F&& g, double g0, double g1) {
  double acc = 0.0;
  for (double y : q.nodes) acc += g(y);
  return acc * q.h + (0.5 - kOffset) * q.h * (g1 - g0);
}

int u_panels(double len) {
  return std::max(4, 2 * static_cast<int>(std::ceil(len / 0.10)));
}

void guard_boundary(const ExpandingMap& map, double y) {
  for (double e : map.interior_endpoints())
    if (std::abs(y - e) <= map.boundary_tol())
      throw OrbitHitsBoundary("flow orbit lands on partition endpoint " +
                              std::to_string(e));
}

}  // namespace

std::vector<double> default_t_grid(double Rbar) {
  std::vector<double> t;
  for (int i = 0; i <= 80; ++i) t.push_back(i * Rbar / 8.0);
  return t;
}

FlowResult flow(const ExpandingMap& map, const RoofFunction& roof,
                SuspensionPoint p, double t) {
  if (t < 0) throw Error("flow needs t >= 0");
  double y = p.y;
  double u = p.u + t;
  long long visits = 0;
  while (u >= roof.R(y)) {
    u -= roof.R(y);
    guard_boundary(map, y);
    y = map.forward(y);
    ++visits;
  }
  return {{y, u}, visits};
}

std::vector<WeightedSample> sample_muR(const ExpandingMap& map,
                                       const RoofFunction& roof,
                                       const GridFunction& f0, std::size_t n,
                                       std::uint64_t seed) {
  (void)map;
  const int N = f0.cells();
  std::vector<double> cdf(N + 1, 0.0);
  for (int i = 1; i <= N; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (f0[i - 1].real() + f0[i].real()) / N;
  for (int i = 0; i <= N; ++i) cdf[i] /= cdf[N];

  GridFunction Rg = GridFunction::from_fn(N, f0.alpha(), [&](double y) {
    return Complex(roof.R(y), 0.0);
  });
  double Rbar = mu_integral(Rg, f0).real();

  std::vector<WeightedSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SampleRng rng(seed, i);
    double a = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), a);
    int cell = std::clamp(static_cast<int>(it - cdf.begin()) - 1, 0, N - 1);
    double frac = (a - cdf[cell]) / std::max(cdf[cell + 1] - cdf[cell], 1e-300);
    double y = (cell + frac) / N;
    double Ry = roof.R(y);
    out[i] = {y, rng.uniform() * Ry, Ry / Rbar};
  }
  return out;
}

CorrelationCurve correlation_direct(const ExpandingMap& map,
                                    const RoofFunction& roof,
                                    const Observable& v, const Observable& w,
                                    const std::vector<double>& t_grid,
                                    const std::vector<WeightedSample>& samples,
                                    int workers) {
  const int B = 32;  // batch count for the batch-means SE
  const std::size_t n = samples.size();
  const int T = static_cast<int>(t_grid.size());

  struct Acc {
    double sw = 0.0, swv = 0.0;
    std::vector<double> sww, swvw;
  };
  std::vector<Acc> acc(B);
  for (auto& a : acc) {
    a.sww.assign(T, 0.0);
    a.swvw.assign(T, 0.0);
  }

  parallel_for(
      B, workers,
      [&](std::size_t batch) {
        std::size_t lo = batch * n / B, hi = (batch + 1) * n / B;
        Acc& a = acc[batch];
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& smp = samples[i];
          double vi = v.eval(smp.y, smp.u);
          a.sw += smp.weight;
          a.swv += smp.weight * vi;
          SuspensionPoint p{smp.y, smp.u};
          double reached = 0.0;
          for (int k = 0; k < T; ++k) {
            auto fr = flow(map, roof, p, t_grid[k] - reached);
            p = fr.point;
            reached = t_grid[k];
            double wk = w.eval(p.y, p.u);
            a.sww[k] += smp.weight * wk;
            a.swvw[k] += smp.weight * vi * wk;
          }
        }
      },
      1);

  CorrelationCurve curve;
  curve.method = "direct";
  for (int k = 0; k < T; ++k) {
    double sw = 0, swv = 0, sww = 0, swvw = 0;
    std::vector<double> per_batch(B);
    for (int bI = 0; bI < B; ++bI) {
      const Acc& a = acc[bI];
      sw += a.sw;
      swv += a.swv;
      sww += a.sww[k];
      swvw += a.swvw[k];
      per_batch[bI] = a.swvw[k] / a.sw - (a.swv / a.sw) * (a.sww[k] / a.sw);
    }
    double est = swvw / sw - (swv / sw) * (sww / sw);
    double mean_b = 0.0;
    for (double pb : per_batch) mean_b += pb;
    mean_b /= B;
    double var_b = 0.0;
    for (double pb : per_batch) var_b += (pb - mean_b) * (pb - mean_b);
    var_b /= (B - 1);
    curve.entries.push_back({t_grid[k], est, std::sqrt(var_b / B)});
  }
  return curve;
}

namespace {

// mu^R mean of an observable: (1/Rbar) int f0(y) int_0^{R(y)} v du dy
double muR_mean(const RoofFunction& roof, const GridFunction& f0,
                const Observable& v, int y_nodes) {
  auto q = orbit_safe_nodes(y_nodes);
  auto cell = [&](double y) {
    double R = roof.R(y);
    return f0.eval(y).real() *
           simpson([&](double u) { return v.eval(y, u); }, 0.0, R,
                   u_panels(R));
  };
  double num = orbit_safe_integral(q, cell, cell(0.0), cell(1.0));
  auto rmass = [&](double y) { return f0.eval(y).real() * roof.R(y); };
  double den = orbit_safe_integral(q, rmass, rmass(0.0), rmass(1.0));
  return num / den;
}

}  // namespace

double correlation_series(const ExpandingMap& map, const RoofFunction& roof,
                          const GridFunction& f0, const Observable& v,
                          const Observable& w, double t, int y_nodes,
                          int workers) {
  const double mv = muR_mean(roof, f0, v, y_nodes);
  const double mw = muR_mean(roof, f0, w, y_nodes);

  double sup_R = 0.0;
  for (int i = 0; i <= 64; ++i)
    sup_R = std::max(sup_R, roof.R(i / 64.0));
  const int Nt = static_cast<int>(std::ceil((t + sup_R) / roof.inf_R)) + 2;

  auto q = orbit_safe_nodes(y_nodes);
  auto integrand = [&](double y) {
    // orbit and roof cumsums up to the crossing horizon
    std::vector<double> ys(Nt + 2), Rn(Nt + 3);
    ys[0] = y;
    Rn[0] = 0.0;
    for (int k = 0; k <= Nt; ++k) {
      Rn[k + 1] = Rn[k] + roof.R(ys[k]);
      if (k < Nt + 1) ys[k + 1] = map.forward(ys[k]);
    }
    double R0 = roof.R(y);
    double acc = 0.0;
    for (int n = 0; n <= Nt; ++n) {
      double lo = std::max(0.0, Rn[n] - t);
      double hi = std::min(R0, Rn[n + 1] - t);
      if (hi <= lo) continue;
      double zn = ys[n];
      acc += simpson(
          [&](double u) {
            return (v.eval(y, u) - mv) * (w.eval(zn, t + u - Rn[n]) - mw);
          },
          lo, hi, u_panels(hi - lo));
    }
    return f0.eval(y).real() * acc;
  };

  std::vector<double> vals(q.nodes.size());
  parallel_for(
      q.nodes.size(), workers,
      [&](std::size_t i) { vals[i] = integrand(q.nodes[i]); }, 64);
  double acc = 0.0;
  for (double x : vals) acc += x;
  double num =
      acc * q.h + (0.5 - kOffset) * q.h * (integrand(1.0) - integrand(0.0));

  auto rmass = [&](double y) { return f0.eval(y).real() * roof.R(y); };
  double Rbar = orbit_safe_integral(q, rmass, rmass(0.0), rmass(1.0));
  return num / Rbar;
}

CorrelationCurve correlation_series_curve(
    const ExpandingMap& map, const RoofFunction& roof, const GridFunction& f0,
    const Observable& v, const Observable& w,
    const std::vector<double>& t_grid, int y_nodes, int workers) {
  CorrelationCurve curve;
  curve.method = "series";
  for (double t : t_grid)
    curve.entries.push_back(
        {t, correlation_series(map, roof, f0, v, w, t, y_nodes, workers),
         0.0});
  return curve;
}

GridFunction observable_transform(const ExpandingMap& map,
                                  const RoofFunction& roof,
                                  const Observable& v, Complex s, int sign,
                                  int grid_cells) {
  (void)map;
  if (sign != 1 && sign != -1) throw Error("sign must be +1 or -1");
  Complex se = static_cast<double>(sign) * s;
  GridFunction out(grid_cells, 1.0);
  double sup_v = 0.0;
  for (int i = 0; i <= grid_cells; ++i) {
    double y = out.node_x(i);
    double R = roof.R(y);
    out[i] = simpson_c(
        [&](double u) {
          double val = v.eval(y, u);
          return std::exp(se * u) * val;
        },
        0.0, R, u_panels(R));
    for (int k = 0; k <= 4; ++k)
      sup_v = std::max(sup_v, std::abs(v.eval(y, R * k / 4.0)));
  }
  // sup bound |v_s(y)| <= R(y) e^{max(0, sign*Re s) R(y)} |v|_inf
  for (int i = 0; i <= grid_cells; ++i) {
    double y = out.node_x(i);
    double R = roof.R(y);
    double growth = std::exp(std::max(0.0, sign * s.real()) * R);
    if (std::abs(out[i]) > R * growth * sup_v * (1.0 + 1e-9) + 1e-12)
      throw Error("transform exceeds its sup bound (quadrature bug)");
  }
  return out;
}

LaplaceValue laplace_rho(const ExpandingMap& map, const RoofFunction& roof,
                         const GridFunction& f0, const Observable& v,
                         const Observable& w, Complex s, int N,
                         double settle_tol, int y_nodes) {
  const double eps = default_twist_halfwidth(roof);
  if (s.real() <= -0.5 * eps)
    throw Error("laplace_rho needs Re s > -eps/2");
  if (N < 1) throw Error("laplace_rho needs N >= 1");

  const double mv = muR_mean(roof, f0, v, y_nodes);
  const double mw = muR_mean(roof, f0, w, y_nodes);
  auto vc = [&](double y, double u) { return v.eval(y, u) - mv; };
  auto wc = [&](double y, double u) { return w.eval(y, u) - mw; };

  auto q = orbit_safe_nodes(y_nodes);
  auto rmass = [&](double y) { return f0.eval(y).real() * roof.R(y); };
  double Rbar = orbit_safe_integral(q, rmass, rmass(0.0), rmass(1.0));

  double sup_vc = 0.0, sup_wc = 0.0;

  // n = 0 term: triple integral over the cell under the roof
  auto j0_cell = [&](double y) {
    double R = roof.R(y);
    Complex inner = simpson_c(
        [&](double u) {
          sup_vc = std::max(sup_vc, std::abs(vc(y, u)));
          sup_wc = std::max(sup_wc, std::abs(wc(y, u)));
          return Complex(vc(y, u), 0.0) *
                 simpson_c(
                     [&](double t) {
                       return std::exp(-s * t) * wc(y, t + u);
                     },
                     0.0, R - u, u_panels(R - u));
        },
        0.0, R, u_panels(R));
    return f0.eval(y).real() * inner;
  };
  Complex j0 = 0.0;
  for (double y : q.nodes) j0 += j0_cell(y);
  j0 *= q.h;
  j0 += (0.5 - kOffset) * q.h * (j0_cell(1.0) - j0_cell(0.0));
  j0 /= Rbar;

  // transformed crossing series
  Complex series = 0.0;
  double last_term = 0.0;
  for (int n = 1; n <= N; ++n) {
    auto jn_cell = [&](double y) {
      // R_n and F^n y
      double z = y, Rn = 0.0;
      for (int k = 0; k < n; ++k) {
        Rn += roof.R(z);
        z = map.forward(z);
      }
      double Ry = roof.R(y), Rz = roof.R(z);
      Complex vs = simpson_c(
          [&](double u) { return std::exp(s * u) * vc(y, u); }, 0.0, Ry,
          u_panels(Ry));
      Complex ws = simpson_c(
          [&](double u) { return std::exp(-s * u) * wc(z, u); }, 0.0, Rz,
          u_panels(Rz));
      return f0.eval(y).real() * std::exp(-s * Rn) * vs * ws;
    };
    Complex jn = 0.0;
    for (double y : q.nodes) jn += jn_cell(y);
    jn *= q.h;
    jn += (0.5 - kOffset) * q.h * (jn_cell(1.0) - jn_cell(0.0));
    jn /= Rbar;
    series += jn;
    last_term = std::abs(jn);
  }
  if (last_term > settle_tol)
    throw SeriesNotSettled("last crossing term " + std::to_string(last_term) +
                           " above tolerance " + std::to_string(settle_tol));

  LaplaceValue out;
  out.j0 = j0;
  out.value = j0 + series;
  out.last_term = last_term;

  // moment bound on the n=0 term
  double a = std::max(0.0, -s.real());
  double C;
  if (a == 0.0) {
    auto r2 = [&](double y) {
      double R = roof.R(y);
      return f0.eval(y).real() * R * R * 0.5;
    };
    C = orbit_safe_integral(q, r2, r2(0.0), r2(1.0)) / Rbar;
  } else {
    auto em = [&](double y) {
      return f0.eval(y).real() * std::exp(a * roof.R(y));
    };
    C = orbit_safe_integral(q, em, em(0.0), em(1.0)) / (a * a * Rbar);
  }
  out.j0_bound = C * sup_vc * sup_wc;
  if (std::abs(j0) > out.j0_bound * (1.0 + 1e-9) + 1e-12)
    throw Error("n=0 term exceeds its moment bound (quadrature bug)");
  return out;
}

DecayFit decay_fit(const CorrelationCurve& curve) {
  std::vector<std::pair<double, double>> pts;  // (t, log|est|)
  for (const auto& e : curve.entries) {
    if (std::abs(e.estimate) > 3.0 * e.se && std::abs(e.estimate) > 0.0)
      pts.emplace_back(e.t, std::log(std::abs(e.estimate)));
    else
      break;  // the fit window is the prefix above the noise floor
  }
  if (pts.size() < 5)
    throw WindowTooShort("only " + std::to_string(pts.size()) +
                         " entries above the 3*SE floor");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0, mean_y = sy / n;
  for (auto [x, y] : pts) {
    double fit = intercept + slope * x;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  DecayFit fit;
  fit.C = std::exp(intercept);
  fit.c = -slope;
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.window_lo = pts.front().first;
  fit.window_hi = pts.back().first;
  fit.points = static_cast<int>(pts.size());
  return fit;
}

VisitMoment visit_moment(const ExpandingMap& map, const RoofFunction& roof,
                         const GridFunction& f0, double gamma,
                         const std::vector<double>& t_grid, int y_nodes) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw Error("visit_moment needs gamma in (0,1)");
  auto q = orbit_safe_nodes(y_nodes);
  auto rmass = [&](double y) { return f0.eval(y).real() * roof.R(y); };
  double Rbar = orbit_safe_integral(q, rmass, rmass(0.0), rmass(1.0));

  double sup_R = 0.0;
  for (int i = 0; i <= 64; ++i) sup_R = std::max(sup_R, roof.R(i / 64.0));

  VisitMoment out;
  out.curve.method = "series";
  for (double t : t_grid) {
    int Nt = static_cast<int>(std::ceil((t + sup_R) / roof.inf_R)) + 2;
    auto cell = [&](double y) {
      // integrate gamma^{psi_t(y,u)} exactly in u: psi is piecewise
      // constant with breakpoints at u = R_n(y) - t
      double R0 = roof.R(y);
      double z = y, Rn = 0.0, acc = 0.0;
      double g = 1.0;
      for (int n = 0; n <= Nt; ++n) {
        double Rnext = Rn + roof.R(z);
        double lo = std::max(0.0, Rn - t);
        double hi = std::min(R0, Rnext - t);
        if (hi > lo) acc += g * (hi - lo);
        Rn = Rnext;
        z = map.forward(z);
        g *= gamma;
        if (Rn - t > R0) break;
      }
      return f0.eval(y).real() * acc;
    };
    double val =
        orbit_safe_integral(q, cell, cell(0.0), cell(1.0)) / Rbar;
    out.curve.entries.push_back({t, val, 0.0});
  }

  // log-linear rate over the full curve
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& e : out.curve.entries) {
    if (e.estimate <= 0) continue;
    double y = std::log(e.estimate);
    sx += e.t;
    sy += y;
    sxx += e.t * e.t;
    sxy += e.t * y;
    ++n;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0, mean_y = sy / n;
  for (const auto& e : out.curve.entries) {
    if (e.estimate <= 0) continue;
    double y = std::log(e.estimate);
    double fit = intercept + slope * e.t;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  out.delta_hat = -slope;
  out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

}  // namespace expmix
