#include "expmix/skew.hpp"

#include <algorithm>
#include <cmath>

#include "expmix/parallel.hpp"
#include "expmix/rng.hpp"

namespace expmix {

namespace {

void guard_boundary(const ExpandingMap& map, double y) {
  for (double e : map.interior_endpoints())
    if (std::abs(y - e) <= map.boundary_tol())
      throw OrbitHitsBoundary("skew orbit lands on partition endpoint " +
                              std::to_string(e));
}

SkewState skew_step(const SkewMap& f, SkewState x) {
  guard_boundary(f.base, x.y);
  double z = f.G(x.y, x.z);
  if (f.circle) z -= std::floor(z);
  return {f.base.forward(x.y), z};
}

// Unguarded step with the closed-form forward convention at branch
// interfaces. Grid-based quadrature (disintegration, fiber envelopes)
// samples measure-zero interface nodes; the one-sided convention there is
// absorbed by the stall-fraction flagging.
SkewState skew_step_raw(const SkewMap& f, SkewState x) {
  double z = f.G(x.y, x.z);
  if (f.circle) z -= std::floor(z);
  return {f.base.forward(x.y), z};
}

}  // namespace

std::vector<SkewState> skew_iterate(const SkewMap& f, SkewState x, int n) {
  std::vector<SkewState> orbit;
  orbit.reserve(n + 1);
  orbit.push_back(x);
  for (int k = 0; k < n; ++k) orbit.push_back(skew_step(f, orbit.back()));
  return orbit;
}

ContractionReport contraction_check(const SkewMap& f, int num_pairs,
                                    const std::vector<int>& n_list,
                                    std::uint64_t seed) {
  ContractionReport rep;
  rep.n_list = n_list;
  int nmax = *std::max_element(n_list.begin(), n_list.end());

  std::vector<double> worst(nmax + 1, 0.0);
  for (int p = 0; p < num_pairs; ++p) {
    SampleRng rng(seed, 40000 + p);
    double y = rng.uniform();
    double z1 = rng.uniform(f.fiber_lo, f.fiber_hi);
    double z2 = rng.uniform(f.fiber_lo, f.fiber_hi);
    if (std::abs(z1 - z2) < 1e-6) z2 = f.fiber_lo + 0.5 * f.fiber_diam();
    double d0 = std::abs(z1 - z2);
    SkewState a{y, z1}, b{y, z2};
    for (int k = 1; k <= nmax; ++k) {
      a = skew_step(f, a);
      b = skew_step(f, b);
      worst[k] = std::max(worst[k], std::abs(a.z - b.z) / d0);
    }
  }

  for (int n : n_list) rep.ratio_per_n.push_back(worst[n]);
  bool all_zero = true;
  for (double r : rep.ratio_per_n)
    if (r > 0) all_zero = false;
  if (all_zero) {
    rep.degenerate = true;
    rep.C = 0.0;
    rep.gamma0 = 0.0;
    return rep;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (rep.ratio_per_n[i] <= 0) continue;
    double x = n_list[i], yv = std::log(rep.ratio_per_n[i]);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
    ++cnt;
  }
  double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  double intercept = (sy - slope * sx) / cnt;
  rep.gamma0 = std::exp(slope);
  rep.C = std::exp(intercept);
  return rep;
}

EtaAverageResult eta_average(const SkewMap& f, const RoofFunction& roof,
                             const SpectralData& spectral0,
                             const std::function<double(double, double)>& v,
                             double y, int n, int grid_cells, double tol) {
  if (n < 1) throw Error("eta_average needs n >= 1");
  EtaAverageResult out;

  auto level = [&](int k) {
    // v_k on the grid: v o f^k(., 0), then k applications of L
    GridFunction vk =
        GridFunction::from_fn(grid_cells, f.base.alpha(), [&](double x) {
          SkewState st{x, 0.0};
          for (int j = 0; j < k; ++j) st = skew_step_raw(f, st);
          return Complex(v(st.y, st.z), 0.0);
        });
    for (int j = 0; j < k; ++j)
      vk = apply_L(f.base, roof, spectral0, Complex(0.0, 0.0), vk);
    return vk;
  };

  GridFunction prev = level(0);
  GridFunction last = prev;
  GridFunction tail_prev(grid_cells, f.base.alpha());
  GridFunction tail_last(grid_cells, f.base.alpha());
  for (int k = 1; k <= n; ++k) {
    last = level(k);
    GridFunction diff = last - prev;
    out.increments.push_back(diff.sup_norm());
    tail_prev = tail_last;
    tail_last = diff;
    prev = last;
  }

  // global stall: the sup increments sit above tolerance and have stopped
  // shrinking
  if (out.increments.size() >= 2) {
    double cur = out.increments.back();
    double before = out.increments[out.increments.size() - 2];
    if (cur > tol && cur > 0.8 * before)
      throw NotConverged("fiber averages stalled at increment " +
                         std::to_string(cur));
    // isolated non-Cauchy nodes: far above the bulk at the last level;
    // tolerated up to a 1% fraction
    std::vector<double> mags(grid_cells + 1);
    for (int i = 0; i <= grid_cells; ++i) mags[i] = std::abs(tail_last[i]);
    std::vector<double> sorted = mags;
    std::nth_element(sorted.begin(), sorted.begin() + grid_cells / 2,
                     sorted.end());
    double median = sorted[grid_cells / 2];
    int stalled = 0;
    for (double m : mags)
      if (m > std::max(tol, 20.0 * median)) ++stalled;
    out.stalled_fraction = static_cast<double>(stalled) / (grid_cells + 1);
    if (out.stalled_fraction > 0.01)
      throw NotConverged("fiber averages non-Cauchy on " +
                         std::to_string(out.stalled_fraction * 100) +
                         "% of nodes");
  }

  out.vbar = last;
  out.vbar_holder = last.holder_seminorm();
  out.value = last.eval(y).real();
  return out;
}

MuXIntegral muX_integral(const SkewMap& f, const RoofFunction& roof,
                         const SpectralData& spectral0,
                         const std::function<double(double, double)>& v,
                         double v_alpha_seminorm, double v_z_lip, int n,
                         int fiber_grid, int base_cells) {
  MuXIntegral out;
  const double dz = f.fiber_diam() / (fiber_grid - 1);
  // fiber Lipschitz constant of v o f^n(y, .)
  double lip_n = v_z_lip * (f.C > 0 ? f.C : 1.0) *
                 std::pow(f.gamma0 > 0 ? f.gamma0 : f.fiber_lip, n);
  double pad = lip_n * dz;

  GridFunction upper(base_cells, f.base.alpha());
  GridFunction lower(base_cells, f.base.alpha());
  for (int i = 0; i <= base_cells; ++i) {
    double y = upper.node_x(i);
    double vmax = -std::numeric_limits<double>::infinity();
    double vmin = std::numeric_limits<double>::infinity();
    for (int g = 0; g < fiber_grid; ++g) {
      SkewState st{y, f.fiber_lo + g * dz};
      for (int k = 0; k < n; ++k) st = skew_step_raw(f, st);
      double val = v(st.y, st.z);
      vmax = std::max(vmax, val);
      vmin = std::min(vmin, val);
    }
    upper[i] = vmax + pad;
    lower[i] = vmin - pad;
  }
  out.upper = mu_integral(upper, spectral0.f).real();
  out.lower = mu_integral(lower, spectral0.f).real();
  out.value = 0.5 * (out.upper + out.lower);
  out.gap = out.upper - out.lower;
  out.gap_bound =
      v_alpha_seminorm *
      std::pow((f.C > 0 ? f.C : 1.0) *
                   std::pow(f.gamma0 > 0 ? f.gamma0 : f.fiber_lip, n) *
                   f.fiber_diam(),
               f.base.alpha());
  return out;
}

namespace {

struct SkewSample {
  double y, z, u, weight;
};

std::vector<SkewSample> sample_muXR(const SkewMap& f, const RoofFunction& roof,
                                    const GridFunction& f0, std::size_t n,
                                    int burn_in, std::uint64_t seed) {
  const int N = f0.cells();
  std::vector<double> cdf(N + 1, 0.0);
  for (int i = 1; i <= N; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (f0[i - 1].real() + f0[i].real()) / N;
  for (int i = 0; i <= N; ++i) cdf[i] /= cdf[N];

  GridFunction Rg = GridFunction::from_fn(
      N, f0.alpha(), [&](double y) { return Complex(roof.R(y), 0.0); });
  double Rbar = mu_integral(Rg, f0).real();

  std::vector<SkewSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SampleRng rng(seed, 90000 + i);
    double a = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), a);
    int cell = std::clamp(static_cast<int>(it - cdf.begin()) - 1, 0, N - 1);
    double frac =
        (a - cdf[cell]) / std::max(cdf[cell + 1] - cdf[cell], 1e-300);
    SkewState st{(cell + frac) / N, f.fiber_center()};
    for (int k = 0; k < burn_in; ++k) st = skew_step(f, st);
    double Ry = roof.R(st.y);
    out[i] = {st.y, st.z, rng.uniform() * Ry, Ry / Rbar};
  }
  return out;
}

struct SkewFlowResult {
  SkewState x;
  double u;
  long long visits;
};

SkewFlowResult skew_flow(const SkewMap& f, const RoofFunction& roof,
                         SkewState x, double u, double t) {
  double uu = u + t;
  long long visits = 0;
  while (uu >= roof.R(x.y)) {
    uu -= roof.R(x.y);
    x = skew_step(f, x);
    ++visits;
  }
  return {x, uu, visits};
}

// one draw from eta_y: pull a random past of y backward through the
// weighted branch chain, then push a fiber point forward along it
double eta_draw_z(const SkewMap& f, const GridFunction& f0, double y,
                  int burn_in, SampleRng& rng) {
  const ExpandingMap& map = f.base;
  const int B = map.usable_branches(map.countable() ? 16 : -1);
  std::vector<double> past(burn_in + 1);
  past[0] = y;
  for (int k = 0; k < burn_in; ++k) {
    // transition weights |h'(y)| f0(h(y)) over the branches
    double cur = past[k];
    double wsum = 0.0;
    double wts[64];
    for (int m = 0; m < B && m < 64; ++m) {
      const Branch& br = map.branch(m);
      wts[m] = std::abs(br.hp(cur)) * f0.eval(br.h(cur)).real();
      wsum += wts[m];
    }
    double a = rng.uniform() * wsum;
    int pick = 0;
    for (int m = 0; m < B && m < 64; ++m) {
      a -= wts[m];
      if (a <= 0) {
        pick = m;
        break;
      }
      pick = m;
    }
    past[k + 1] = map.branch(pick).h(cur);
  }
  double z = f.fiber_center();
  for (int k = burn_in; k >= 1; --k) z = f.G(past[k], z);
  if (f.circle) z -= std::floor(z);
  return z;
}

}  // namespace

FlowCorrelationResult flow_correlation(const SkewMap& f,
                                       const RoofFunction& roof,
                                       const SpectralData& spectral0,
                                       const SkewObservable& v,
                                       const SkewObservable& w,
                                       const std::vector<double>& t_grid,
                                       const FlowCorrelationOptions& opts) {
  FlowCorrelationResult out;
  const int B = 32;
  const int T = static_cast<int>(t_grid.size());

  auto samples =
      sample_muXR(f, roof, spectral0.f, opts.samples, opts.burn_in, opts.seed);

  // ---- direct correlation on the skew suspension ----
  struct Acc {
    double sw = 0, swv = 0;
    std::vector<double> sww, swvw;
  };
  std::vector<Acc> acc(B);
  for (auto& a : acc) {
    a.sww.assign(T, 0.0);
    a.swvw.assign(T, 0.0);
  }
  parallel_for(
      B, opts.workers,
      [&](std::size_t batch) {
        std::size_t lo = batch * samples.size() / B;
        std::size_t hi = (batch + 1) * samples.size() / B;
        Acc& a = acc[batch];
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& smp = samples[i];
          double vi = v.eval(smp.y, smp.z, smp.u);
          a.sw += smp.weight;
          a.swv += smp.weight * vi;
          SkewState x{smp.y, smp.z};
          double u = smp.u, reached = 0.0;
          for (int k = 0; k < T; ++k) {
            auto fr = skew_flow(f, roof, x, u, t_grid[k] - reached);
            x = fr.x;
            u = fr.u;
            reached = t_grid[k];
            double wk = w.eval(x.y, x.z, u);
            a.sww[k] += smp.weight * wk;
            a.swvw[k] += smp.weight * vi * wk;
          }
        }
      },
      1);
  out.curve.method = "direct";
  for (int k = 0; k < T; ++k) {
    double sw = 0, swv = 0, sww = 0, swvw = 0;
    std::vector<double> pb(B);
    for (int i = 0; i < B; ++i) {
      sw += acc[i].sw;
      swv += acc[i].swv;
      sww += acc[i].sww[k];
      swvw += acc[i].swvw[k];
      pb[i] = acc[i].swvw[k] / acc[i].sw -
              (acc[i].swv / acc[i].sw) * (acc[i].sww[k] / acc[i].sw);
    }
    double est = swvw / sw - (swv / sw) * (sww / sw);
    double mean = 0;
    for (double x : pb) mean += x;
    mean /= B;
    double var = 0;
    for (double x : pb) var += (x - mean) * (x - mean);
    var /= (B - 1);
    out.curve.entries.push_back({t_grid[k], est, std::sqrt(var / B)});
  }

  // ---- I1 + I2 split against the quotient ----
  const std::vector<double>& diag_t =
      opts.diag_t.empty() ? t_grid : opts.diag_t;
  std::size_t nd = std::min(opts.diag_samples, samples.size());

  // center v by its weighted mean over the diagnostic samples
  double sw = 0, swv = 0;
  for (std::size_t i = 0; i < nd; ++i) {
    sw += samples[i].weight;
    swv += samples[i].weight * v.eval(samples[i].y, samples[i].z,
                                      samples[i].u);
  }
  const double v_mean = swv / sw;

  // envelope scale: |v|_inf |w|_alpha with gamma = gamma0^alpha
  double v_inf = 0.0;
  for (std::size_t i = 0; i < nd; ++i)
    v_inf = std::max(v_inf, std::abs(v.eval(samples[i].y, samples[i].z,
                                            samples[i].u) -
                                     v_mean));
  const double gamma_env =
      std::pow(f.gamma0 > 0 ? f.gamma0 : f.fiber_lip, f.base.alpha());

  VisitMoment vm =
      visit_moment(f.base, roof, spectral0.f, gamma_env, diag_t, 1024);

  for (int kt = 0; kt < static_cast<int>(diag_t.size()); ++kt) {
    double t = diag_t[kt];
    std::vector<double> i1_batch(B, 0.0), i2_batch(B, 0.0),
        qc_batch(B, 0.0), w_batch(B, 0.0);
    parallel_for(
        B, opts.workers,
        [&](std::size_t batch) {
          std::size_t lo = batch * nd / B, hi = (batch + 1) * nd / B;
          double s_i1 = 0, s_i2 = 0, s_qc = 0, s_w = 0;
          for (std::size_t i = lo; i < hi; ++i) {
            const auto& smp = samples[i];
            double vi = v.eval(smp.y, smp.z, smp.u) - v_mean;

            // full flow by 2t
            auto full = skew_flow(f, roof, {smp.y, smp.z}, smp.u, 2.0 * t);
            double w_full = w.eval(full.x.y, full.x.z, full.u);

            // base flow by t, then the fiber average of w o f_t
            auto half =
                skew_flow(f, roof, {smp.y, smp.z}, smp.u, t);
            double wt = 0.0;
            SampleRng rng(opts.seed ^ 0xabcdef12u,
                          (i + 1) * 1000003ULL + kt);
            for (int rep = 0; rep < opts.eta_mc; ++rep) {
              double zdraw =
                  eta_draw_z(f, spectral0.f, half.x.y, opts.burn_in, rng);
              auto fin =
                  skew_flow(f, roof, {half.x.y, zdraw}, half.u, t);
              wt += w.eval(fin.x.y, fin.x.z, fin.u);
            }
            wt /= opts.eta_mc;

            // fiber average of v at the sample base point
            double vbar = 0.0;
            for (int rep = 0; rep < opts.eta_mc; ++rep) {
              double zdraw =
                  eta_draw_z(f, spectral0.f, smp.y, opts.burn_in, rng);
              vbar += v.eval(smp.y, zdraw, smp.u);
            }
            vbar = vbar / opts.eta_mc - v_mean;

            s_i1 += smp.weight * vi * (w_full - wt);
            s_i2 += smp.weight * vi * wt;
            s_qc += smp.weight * vbar * wt;
            s_w += smp.weight;
          }
          i1_batch[batch] = s_i1;
          i2_batch[batch] = s_i2;
          qc_batch[batch] = s_qc;
          w_batch[batch] = s_w;
        },
        1);

    double swt = 0, si1 = 0, si2 = 0, sqc = 0;
    std::vector<double> pb(B);
    for (int i = 0; i < B; ++i) {
      swt += w_batch[i];
      si1 += i1_batch[i];
      si2 += i2_batch[i];
      sqc += qc_batch[i];
      pb[i] = i1_batch[i] / w_batch[i];
    }
    double mean = 0;
    for (double x : pb) mean += x;
    mean /= B;
    double var = 0;
    for (double x : pb) var += (x - mean) * (x - mean);
    var /= (B - 1);

    I1I2Row row;
    row.t = t;
    row.I1 = si1 / swt;
    row.I1_se = std::sqrt(var / B);
    row.envelope = v_inf * w.declared_holder * vm.curve.entries[kt].estimate;
    row.I2 = si2 / swt;
    row.quotient_corr = sqc / swt;
    out.table.push_back(row);
  }
  return out;
}

}  // namespace expmix
