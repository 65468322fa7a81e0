#include "expmix/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "expmix/parallel.hpp"
#include "expmix/rng.hpp"
#include "expmix/uni.hpp"

namespace expmix {

double default_twist_halfwidth(const RoofFunction& roof) {
  double eps = 0.5 * roof.inf_R * roof.eps_iv;
  return std::clamp(eps, 1e-6, 0.999);
}

GridFunction apply_A(const BranchWord& word, Complex s,
                     const RoofFunction& roof, const GridFunction& v) {
  GridFunction out(v.cells(), v.alpha());
  for (int i = 0; i < v.nodes(); ++i) {
    double y = out.node_x(i);
    auto he = word.eval(y);
    auto rb = birkhoff_roof(roof, word, y);
    out[i] = std::exp(-s * rb.value) * std::abs(he.deriv) * v.eval(he.value);
  }
  return out;
}

GridFunction apply_P(const ExpandingMap& map, const RoofFunction& roof,
                     Complex s, const GridFunction& v, int M,
                     double tail_bound) {
  const int B = map.usable_branches(M < 0 && map.countable() ? 64 : M);
  if (map.countable()) {
    // surface the truncation tail through the same path as enumerate_words
    enumerate_words(map, 1, B, &roof, tail_bound);
  }
  GridFunction out(v.cells(), v.alpha());
  for (int i = 0; i < v.nodes(); ++i) {
    double y = out.node_x(i);
    Complex acc = 0.0;
    for (int m = 0; m < B; ++m) {
      const Branch& br = map.branch(m);
      double x = br.h(y);
      acc += std::exp(-s * roof.R(x)) * std::abs(br.hp(y)) * v.eval(x);
    }
    out[i] = acc;
  }
  return out;
}

SpectralData leading_spectrum(const ExpandingMap& map,
                              const RoofFunction& roof, double sigma,
                              int grid_cells, PowerIterationOptions opts,
                              double eps_override) {
  const double eps =
      eps_override > 0.0 ? eps_override : default_twist_halfwidth(roof);
  if (std::abs(sigma) >= eps + 1e-15)
    throw Error("twist " + std::to_string(sigma) +
                " outside the admissible half width " + std::to_string(eps));

  auto iterate = [&](double sg) {
    GridFunction f(grid_cells, map.alpha(), 1.0);
    double lambda = 1.0;
    double prev = 0.0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      GridFunction pf = apply_P(map, roof, Complex(sg, 0.0), f);
      double mass = trapezoid(pf).real();
      lambda = mass;  // since int f dLeb = 1
      pf *= Complex(1.0 / mass, 0.0);
      f = pf;
      if (it > 0 && std::abs(lambda - prev) < opts.eigenvalue_tol) break;
      prev = lambda;
    }
    if (it >= opts.max_iterations)
      throw NoConvergence("power iteration did not settle at sigma=" +
                          std::to_string(sg));
    GridFunction res = apply_P(map, roof, Complex(sg, 0.0), f);
    res -= Complex(lambda, 0.0) * f;
    double resid = res.sup_norm();
    if (resid > opts.residual_tol)
      throw NoConvergence("power iteration residual " +
                          std::to_string(resid) + " too large at sigma=" +
                          std::to_string(sg));
    SpectralData sd;
    sd.sigma = sg;
    sd.lambda = lambda;
    sd.f = f;
    sd.residual = resid;
    return sd;
  };

  SpectralData sd = iterate(sigma);
  if (sd.lambda <= 0.0 || sd.f.min_real() <= 0.0)
    throw NoConvergence("leading eigendata not positive");

  // perturbation sanity band relative to the untwisted eigendata
  if (sigma != 0.0) {
    SpectralData base = iterate(0.0);
    if (!(0.5 <= sd.lambda && sd.lambda <= 2.0))
      throw Error("eigenvalue escapes the [1/2,2] sanity band");
    for (int i = 0; i < sd.f.nodes(); ++i) {
      double fs = sd.f[i].real(), f0 = base.f[i].real();
      if (!(0.5 * f0 <= fs + 1e-12 && fs <= 2.0 * f0 + 1e-12))
        throw Error("eigenfunction escapes the [f0/2, 2 f0] sanity band");
    }
  }
  return sd;
}

GridFunction apply_L(const ExpandingMap& map, const RoofFunction& roof,
                     const SpectralData& spectral, Complex s,
                     const GridFunction& v, int M) {
  if (std::abs(spectral.sigma - s.real()) > 1e-12)
    throw SpectralMismatch("spectral data at sigma=" +
                           std::to_string(spectral.sigma) +
                           " used with Re s=" + std::to_string(s.real()));
  GridFunction fv = hadamard(spectral.f, v);
  GridFunction out = apply_P(map, roof, s, fv, M);
  for (int i = 0; i < out.nodes(); ++i)
    out[i] /= spectral.lambda * spectral.f[i];
  return out;
}

GridFunction apply_L_pow(const ExpandingMap& map, const RoofFunction& roof,
                         const SpectralData& spectral, Complex s,
                         const GridFunction& v, int n, int M) {
  GridFunction w = v;
  for (int k = 0; k < n; ++k) w = apply_L(map, roof, spectral, s, w, M);
  return w;
}

GridFunction apply_L_words(const ExpandingMap& map, const RoofFunction& roof,
                           const SpectralData& spectral, Complex s,
                           const std::vector<BranchWord>& words,
                           const std::function<Complex(double)>& g,
                           int grid_cells) {
  if (words.empty()) throw Error("empty word family");
  const int n = words.front().length();
  const double lam_n = std::pow(spectral.lambda, n);
  GridFunction out(grid_cells, map.alpha());
  for (int i = 0; i <= grid_cells; ++i) {
    double y = out.node_x(i);
    Complex acc = 0.0;
    for (const auto& w : words) {
      auto he = w.eval(y);
      auto rb = birkhoff_roof(roof, w, y);
      acc += std::exp(-s * rb.value) * std::abs(he.deriv) *
             spectral.f.eval(he.value).real() * g(he.value);
    }
    out[i] = acc / (lam_n * spectral.f.eval(y).real());
  }
  return out;
}

Complex mu_integral(const GridFunction& v, const GridFunction& f0) {
  return trapezoid_weighted(v, f0);
}

LyReport ly_report(const ExpandingMap& map, const RoofFunction& roof,
                   const std::vector<Complex>& s_list,
                   const std::vector<int>& n_list,
                   const std::vector<GridFunction>& samples, double rho,
                   int workers) {
  LyReport rep;
  const double alpha = map.alpha();
  struct Job {
    int si, ni, vi;
  };
  std::vector<Job> jobs;
  for (int si = 0; si < static_cast<int>(s_list.size()); ++si)
    for (int vi = 0; vi < static_cast<int>(samples.size()); ++vi)
      jobs.push_back({si, 0, vi});

  std::vector<std::vector<LyEntry>> per_job(jobs.size());
  int nmax = *std::max_element(n_list.begin(), n_list.end());

  parallel_for(
      jobs.size(), workers,
      [&](std::size_t j) {
        const auto& job = jobs[j];
        Complex s = s_list[job.si];
        const GridFunction& v = samples[job.vi];
        SpectralData sd = leading_spectrum(map, roof, s.real(), v.cells());
        double v_inf = v.sup_norm();
        double v_a = v.holder_seminorm();
        double v_b = v.b_norm(s.imag());
        double bfac = 1.0 + std::pow(std::abs(s.imag()), alpha);
        GridFunction w = v;
        for (int n = 1; n <= nmax; ++n) {
          w = apply_L(map, roof, sd, s, w);
          if (std::find(n_list.begin(), n_list.end(), n) == n_list.end())
            continue;
          double sem = w.holder_seminorm();
          double denom = bfac * v_inf + std::pow(rho, n) * v_a;
          double ratio = denom > 0 ? sem / denom : 0.0;
          double bn = v_b > 0 ? w.b_norm(s.imag()) / v_b : 0.0;
          per_job[j].push_back({s, n, job.vi, sem, ratio, bn});
        }
      },
      1);

  for (const auto& block : per_job)
    for (const auto& e : block) {
      rep.entries.push_back(e);
      rep.C3 = std::max(rep.C3, e.ratio);
      rep.max_bnorm_ratio = std::max(rep.max_bnorm_ratio, e.bnorm_ratio);
    }
  return rep;
}

std::vector<GridFunction> ly_sample_suite(int grid_cells, double alpha,
                                          std::uint64_t seed) {
  std::vector<GridFunction> suite;
  suite.push_back(GridFunction(grid_cells, alpha, 1.0));
  for (double freq : {1.0, 10.0, 100.0})
    suite.push_back(GridFunction::from_fn(grid_cells, alpha, [freq](double y) {
      return std::exp(Complex(0.0, freq * y));
    }));
  for (int k = 0; k < 3; ++k) {
    SampleRng rng(seed, 1000 + k);
    std::vector<double> a(8), ph(8);
    for (int m = 0; m < 8; ++m) {
      a[m] = rng.uniform(-1.0, 1.0) / (m + 1);
      ph[m] = rng.uniform(0.0, 6.283185307179586);
    }
    suite.push_back(
        GridFunction::from_fn(grid_cells, alpha, [&a, &ph](double y) {
          double re = 0.0, im = 0.0;
          for (int m = 0; m < 8; ++m) {
            re += a[m] * std::cos(6.283185307179586 * (m + 1) * y + ph[m]);
            im += a[m] * std::sin(6.283185307179586 * (m + 1) * y + ph[m]);
          }
          return Complex(re, im);
        }));
  }
  return suite;
}

namespace {

// least squares slope of log(norm) against n over [start, end)
double fit_log_slope(const std::vector<int>& n, const std::vector<double>& y,
                     int start, int end) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = start; i < end; ++i) {
    double lx = n[i], ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  double denom = cnt * sxx - sx * sx;
  return (cnt * sxy - sx * sy) / denom;
}

}  // namespace

DolgopyatResult dolgopyat_probe(const ExpandingMap& map,
                                const RoofFunction& roof,
                                const ConstantsLedger& ledger,
                                const std::vector<double>& b_list,
                                int num_samples, std::uint64_t seed,
                                int grid_cells, int max_blocks, int workers) {
  DolgopyatResult result;
  const int n0 = std::max(1, ledger.n0);
  const double alpha = map.alpha();
  SpectralData sd = leading_spectrum(map, roof, 0.0, grid_cells);

  for (double b : b_list) {
    DolgopyatCurve curve;
    curve.b = b;
    curve.in_theorem_range = std::abs(b) >= ledger.Dprime;

    // cone-compatible start functions: |v|_alpha <= C4 |b|^alpha |v|_inf
    std::vector<GridFunction> starts;
    starts.push_back(GridFunction::from_fn(
        grid_cells, alpha,
        [b](double y) { return std::exp(Complex(0.0, b * y)); }));
    for (int k = 0; k < num_samples; ++k) {
      SampleRng rng(seed, 7000 + k);
      double f1 = rng.uniform(0.2, 1.0) * b;
      double f2 = rng.uniform(0.05, 0.4) * b;
      double ph = rng.uniform(0.0, 6.283185307179586);
      double cap = 0.4 * ledger.C4 * std::pow(std::abs(b), alpha);
      double amp2 = std::min(0.5, cap / std::max(f2, 1.0)) * 0.5;
      starts.push_back(GridFunction::from_fn(
          grid_cells, alpha, [f1, f2, ph, amp2](double y) {
            return std::exp(Complex(0.0, f1 * y + ph)) *
                   (1.0 + amp2 * std::sin(f2 * y));
          }));
    }

    double worst_gamma = 0.0;
    std::vector<int> best_n;
    std::vector<double> best_norms;
    int best_start = 0;
    bool have_curve = false;

    for (std::size_t sidx = 0; sidx < starts.size(); ++sidx) {
      GridFunction v = starts[sidx];
      double v0 = v.b_norm(b);
      if (v0 == 0.0) continue;  // degenerate sample, skip
      std::vector<int> ns;
      std::vector<double> norms;
      GridFunction w = v;
      for (int blk = 1; blk <= max_blocks; ++blk) {
        for (int k = 0; k < n0; ++k)
          w = apply_L(map, roof, sd, Complex(0.0, b), w);
        double nb = w.b_norm(b);
        ns.push_back(blk * n0);
        norms.push_back(nb);
        if (nb < 1e-11 * v0 || nb < 1e-14) break;
      }
      if (ns.size() < 4)
        throw InsufficientDecayWindow(
            "norm curve hit the floor before a fit was possible at b=" +
            std::to_string(b));

      // entry into monotone decay: smallest k with norms non-increasing
      // from k to the end; fall back to the tail half when absent
      int K = static_cast<int>(ns.size());
      int start = K - 1;
      for (int k = K - 2; k >= 0; --k) {
        if (norms[k + 1] <= norms[k] * (1.0 + 1e-12))
          start = k;
        else
          break;
      }
      if (K - start < 3) start = K / 2;
      if (K - start < 3) start = std::max(0, K - 3);

      double slope = fit_log_slope(ns, norms, start, K);
      double gamma = std::exp(slope);
      if (gamma > worst_gamma) {
        worst_gamma = gamma;
        best_n = ns;
        best_norms = norms;
        best_start = start;
        have_curve = true;
      }
    }
    if (!have_curve)
      throw InsufficientDecayWindow("all start samples degenerate at b=" +
                                    std::to_string(b));
    curve.n = best_n;
    curve.norm_b = best_norms;
    curve.ratio.resize(best_norms.size(), 0.0);
    for (std::size_t i = 1; i < best_norms.size(); ++i)
      curve.ratio[i] = best_norms[i - 1] > 0
                           ? std::pow(best_norms[i] / best_norms[i - 1],
                                      1.0 / n0)
                           : 0.0;
    curve.gamma_fit = worst_gamma;
    curve.fit_start = best_start;
    result.curves.push_back(std::move(curve));
    result.gamma = std::max(result.gamma, worst_gamma);
  }
  (void)workers;
  return result;
}

}  // namespace expmix
