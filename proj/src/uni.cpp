#include "expmix/uni.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "expmix/parallel.hpp"
#include "json.hpp"

namespace expmix {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

BirkhoffEval psi(const RoofFunction& roof, const BranchWord& w1,
                 const BranchWord& w2, double y) {
  if (w1.length() != w2.length())
    throw WordLengthMismatch("psi needs words of equal length, got " +
                             std::to_string(w1.length()) + " and " +
                             std::to_string(w2.length()));
  auto a = birkhoff_roof(roof, w1, y);
  auto b = birkhoff_roof(roof, w2, y);
  return {a.value - b.value, a.deriv - b.deriv};
}

std::optional<UNIWitness> uni_scan(const ExpandingMap& map,
                                   const RoofFunction& roof,
                                   const std::vector<int>& n_range,
                                   int grid_resolution, double floor, int M,
                                   int workers) {
  std::vector<int> lengths = n_range;
  std::sort(lengths.begin(), lengths.end());

  std::optional<UNIWitness> best;
  const int G = grid_resolution;

  for (int n : lengths) {
    auto en = enumerate_words(map, n, M, &roof);
    const auto& words = en.words;
    const int W = static_cast<int>(words.size());
    struct PairResult {
      double D;
      double argmin;
    };
    std::vector<PairResult> results(
        static_cast<std::size_t>(W) * W,
        {-std::numeric_limits<double>::infinity(), 0.0});

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < W; ++i)
      for (int j = i + 1; j < W; ++j) pairs.emplace_back(i, j);

    parallel_for(
        pairs.size(), workers,
        [&](std::size_t p) {
          auto [i, j] = pairs[p];
          double inf_abs = std::numeric_limits<double>::infinity();
          double argmin = 0.0;
          double prev_slope = 0.0;
          double max_slope_change = 0.0;
          for (int g = 0; g <= G; ++g) {
            double y = static_cast<double>(g) / G;
            auto pe = psi(roof, words[i], words[j], y);
            double a = std::abs(pe.deriv);
            if (a < inf_abs) {
              inf_abs = a;
              argmin = y;
            }
            if (g > 0)
              max_slope_change =
                  std::max(max_slope_change, std::abs(pe.deriv - prev_slope));
            prev_slope = pe.deriv;
          }
          // Lipschitz safety margin: grid step times the |psi''| proxy
          // (max adjacent slope change over the step), i.e. one step's
          // worth of slope drift below the node infimum
          double D = inf_abs - max_slope_change;
          results[static_cast<std::size_t>(i) * W + j] = {D, argmin};
        },
        4);

    for (int i = 0; i < W; ++i)
      for (int j = i + 1; j < W; ++j) {
        const auto& r = results[static_cast<std::size_t>(i) * W + j];
        if (r.D > floor && (!best || r.D > best->D)) {
          best = UNIWitness{n, words[i], words[j], r.D, r.argmin, &roof};
        }
      }
  }
  return best;
}

AdmissibilityReport n0_admissible(const ConstantsLedger& ledger, int n0) {
  if (!ledger.complete())
    throw LedgerIncomplete("admissibility needs a fully populated ledger");
  AdmissibilityReport rep;
  rep.n0 = n0;
  const double a = ledger.alpha;
  const double c1a = std::pow(ledger.C1, a);
  auto eval = [&](int n, double& lhs1, double& lhs2, double& lhs3) {
    double rn = std::pow(ledger.rho, n);
    lhs1 = c1a * ledger.C4 * rn * std::pow(4.0 * kPi / ledger.D, a);
    lhs2 = 2.0 * rn * (1.0 + c1a * ledger.C4);
    lhs3 = ledger.C3 * rn;
  };
  rep.rhs_cancel = 0.25 * std::sqrt(2.0 - 2.0 * std::cos(kPi / 12.0));
  eval(n0, rep.lhs_cancel, rep.lhs_cone, rep.lhs_seminorm);
  rep.cancel_scale_ok = rep.lhs_cancel <= rep.rhs_cancel;
  rep.cone_scale_ok = rep.lhs_cone <= 1.0;
  rep.seminorm_scale_ok = rep.lhs_seminorm <= 1.0 / 3.0;
  rep.c4_dominates = ledger.C4 >= 6.0 * ledger.C3;

  rep.smallest_admissible = -1;
  for (int n = n0; n <= n0 + 256; ++n) {
    double l1, l2, l3;
    eval(n, l1, l2, l3);
    if (l1 <= rep.rhs_cancel && l2 <= 1.0 && l3 <= 1.0 / 3.0) {
      rep.smallest_admissible = n;
      break;
    }
  }
  return rep;
}

bool ConstantsLedger::complete() const {
  return alpha > 0 && C1 > 0 && rho0 > 0 && rho > 0 && C2 > 0 && C3 > 0 &&
         C4 > 0 && D > 0 && n0 >= 1 && Delta > 0 && eta0 > 0 && eta > 0 &&
         delta > 0 && eps > 0;
}

ConstantsLedger build_ledger(const ExpandingMap& map, const RoofFunction& roof,
                             const SpectralData& spectral0,
                             const std::optional<UNIWitness>& witness,
                             double C3_measured) {
  if (!witness)
    throw NoUNIWitness("ledger construction needs a UNI witness");

  ConstantsLedger lg;
  lg.alpha = map.alpha();
  lg.C1 = map.C1();
  lg.rho0 = map.rho0();
  lg.rho = std::pow(lg.rho0, lg.alpha);
  lg.C2 = lg.C1 * lg.C1 / (1.0 - lg.rho);
  lg.C3 = C3_measured;

  lg.f0_sup = spectral0.f.sup_norm();
  lg.f0_inv_sup = 1.0 / spectral0.f.min_real();
  lg.f0_holder = spectral0.f.holder_seminorm();
  lg.C4 = 8.0 * lg.f0_inv_sup * lg.f0_holder * lg.C1 + 5.0 * lg.C2;
  lg.c4_ge_6c3 = lg.C4 >= 6.0 * lg.C3;

  lg.D = witness->D;
  lg.n0 = witness->n0;
  lg.Delta = 2.0 * kPi / lg.D;
  lg.Dprime = std::max(4.0 * kPi / lg.D, 2.0);
  lg.eta0 = 0.5 * (std::sqrt(7.0) - 1.0);
  lg.eps = default_twist_halfwidth(roof);

  // largest delta passing all four cancellation-scale bounds, then a 1%
  // shave; bisection to 1e-10 on the conjunction
  const double c1a = std::pow(lg.C1, lg.alpha);
  auto ok = [&](double d) {
    double t = c1a * lg.C4 * std::pow(d, lg.alpha);
    return t < 1.0 / 6.0 && (2.0 / 3.0) * std::exp(t) < lg.eta0 &&
           d < 2.0 * kPi / lg.D && 2.0 * lg.C2 * d < kPi / 6.0;
  };
  double lo = 0.0, hi = 1.0;
  if (!ok(1e-12)) throw Error("no positive delta satisfies the bounds");
  while (!ok(hi) && hi > 1e-12) hi *= 0.5;
  lo = hi;
  hi *= 2.0;
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  lg.delta = 0.99 * lo;

  // minimal damping level eta in [eta0,1) with 3(1-eta)/(delta P) <= 1
  double P = std::numeric_limits<double>::infinity();
  for (const BranchWord* w : {&witness->word1, &witness->word2}) {
    for (int g = 0; g <= 64; ++g) {
      double y = g / 64.0;
      P = std::min(P, std::abs(w->eval(y).deriv));
    }
  }
  lg.P = P;
  lg.eta = std::max(lg.eta0, 1.0 - lg.delta * P / 3.0);

  lg.delta1 = lg.delta / (4.0 * lg.delta + 6.0 * lg.Delta);
  lg.delta2 = lg.delta1 * spectral0.f.min_real() / lg.f0_sup;
  double K = 2.0 * lg.f0_inv_sup * lg.f0_holder + 2.0 * lg.C2;
  lg.delta3 = 0.5 * lg.delta2 *
              std::exp(-std::pow(2.0 * lg.delta + 2.0 * lg.Delta, lg.alpha) *
                       K);

  AdmissibilityReport adm = n0_admissible(lg, lg.n0);
  lg.smallest_admissible_n0 = adm.smallest_admissible;

  lg.provenance = {
      {"rho", "rho0^alpha"},
      {"C2", "C1^2/(1-rho)"},
      {"C3", "measured: tightest constant in the Lasota-Yorke bound"},
      {"C4", "8*|f0^-1|_inf*|f0|_alpha*C1 + 5*C2"},
      {"D", "safeguarded grid infimum of |psi'| for the witness pair"},
      {"Delta", "2*pi/D"},
      {"Dprime", "max(4*pi/D, 2)"},
      {"delta", "0.99 * sup{d : all four cancellation-scale bounds hold}"},
      {"delta1", "delta/(4*delta+6*Delta)"},
      {"delta2", "delta1 * inf f0 / sup f0"},
      {"delta3", "0.5*delta2*exp(-(2*delta+2*Delta)^alpha * K), "
                 "K = 2*|f0^-1|_inf*|f0|_alpha + 2*C2"},
      {"eta0", "(sqrt(7)-1)/2"},
      {"eta", "max(eta0, 1 - delta*P/3)"},
      {"eps", "clamp(0.5 * inf R * eps_iv, 1e-6, 0.999)"},
      {"P", "min over the witness words of inf|h'|"},
  };
  return lg;
}

std::string ConstantsLedger::to_json_string() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["C1"] = C1;
  j["rho0"] = rho0;
  j["rho"] = rho;
  j["C2"] = C2;
  j["C3"] = C3;
  j["C4"] = C4;
  j["D"] = D;
  j["n0"] = n0;
  j["Delta"] = Delta;
  j["Dprime"] = Dprime;
  j["delta"] = delta;
  j["delta1"] = delta1;
  j["delta2"] = delta2;
  j["delta3"] = delta3;
  j["eta0"] = eta0;
  j["eta"] = eta;
  j["eps"] = eps;
  j["f0_sup"] = f0_sup;
  j["f0_inv_sup"] = f0_inv_sup;
  j["f0_holder"] = f0_holder;
  j["P"] = P;
  j["smallest_admissible_n0"] = smallest_admissible_n0;
  j["c4_ge_6c3"] = c4_ge_6c3;
  j["provenance"] = provenance;
  return j.dump(2);
}

}  // namespace expmix
