#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "expmix/dynamics.hpp"
#include "expmix/grid.hpp"
#include "expmix/transfer.hpp"
#include "expmix/uni.hpp"

namespace expmix {

// Membership report for the oscillation cone at frequency b:
//   u > 0,  |v| <= u,  |log u|_alpha <= C4 |b|^alpha,
//   |v(x)-v(y)| <= C4 |b|^alpha u(y) |x-y|^alpha.
struct ConeReport {
  bool member = false;
  double margin_positive = 0.0;   // min u           (needs > 0)
  double margin_dominated = 0.0;  // max |v|/u       (needs <= 1)
  double margin_log_u = 0.0;      // |log u|_a / (C4 |b|^a)    (<= 1)
  double margin_v_reg = 0.0;      // tightest ratio in the v bound (<= 1)
  const char* violated = nullptr;
};

struct ConePair {
  GridFunction u;  // positive
  GridFunction v;  // complex, |v| <= u
  double b = 0.0;
  double C4 = 0.0;
};

ConeReport cone_check(const GridFunction& u, const GridFunction& v, double b,
                      const ConstantsLedger& ledger);

// Seeded cone member: u = exp(g) with band-limited g, v = u e^{i theta}
// with Lipschitz theta, amplitudes backed off until cone_check passes.
ConePair sample_cone(double b, const ConstantsLedger& ledger,
                     std::uint64_t seed, int grid_cells);

// Piecewise-C^1 damping function chi : Y -> [eta, 1].
//
// Built from an ordered family of disjoint intervals I_j (each tagged with
// one of the two witness words) with diam in [delta/|b|, 2 delta/|b|] and
// gaps of diam <= 2 Delta/|b|. chi == 1 off range(h1) u range(h2); inside
// range(h_m), chi(h_m(y)) = eta on middle thirds of type-m intervals,
// 1 outside type-m intervals, cubic smoothstep on the outer thirds.
class ChiFunction {
 public:
  struct Interval {
    double lo, hi;
    int type;  // 0 -> word1, 1 -> word2
  };

  ChiFunction(const ExpandingMap* map, BranchWord w1, BranchWord w2,
              std::vector<Interval> intervals, double eta, double b,
              double delta, double Delta);

  double eval(double x) const;
  // damping profile as a function of the base coordinate y
  double profile(double y, int type) const;

  const std::vector<Interval>& intervals() const { return intervals_; }
  double eta() const { return eta_; }
  double b() const { return b_; }
  double delta() const { return delta_; }
  double Delta() const { return Delta_; }
  const BranchWord& word(int m) const { return m == 0 ? w1_ : w2_; }

  // certified bound on |chi'| (chain rule through F^{n0})
  double slope_bound() const { return slope_bound_; }

  // middle thirds I^_j, and the gap covers J^_j (gap plus the adjacent
  // outer thirds); their union is Y
  std::vector<std::pair<double, double>> middle_thirds() const;
  std::vector<std::pair<double, double>> hat_gaps() const;

  std::string to_json_string() const;

 private:
  const ExpandingMap* map_;
  BranchWord w1_, w2_;
  std::vector<Interval> intervals_;
  double eta_, b_, delta_, Delta_;
  double img_lo_[2], img_hi_[2];
  double slope_bound_ = 0.0;
  friend ChiFunction build_chi(double, const ConePair&,
                               const ConstantsLedger&, const UNIWitness&,
                               const SpectralData&, int);
};

// Locates the cancellation intervals for the pair (u,v) at frequency b by
// sweeping base points, testing the two case bounds
//   |A_1(f v) + A_2(f v)| <= eta0 A_m(f u) + A_other(f u)
// on candidate balls, and assembling a disjoint interval family.
ChiFunction build_chi(double b, const ConePair& pair,
                      const ConstantsLedger& ledger,
                      const UNIWitness& witness, const SpectralData& spectral,
                      int workers = 1);

// min over grid nodes of  L_sigma^{n0}(chi u) - |L_s^{n0} v|
struct CancellationResult {
  double margin = 0.0;
  double min_rhs = 0.0;
  bool pass = false;
};
CancellationResult cancellation_check(Complex s, const ConePair& pair,
                                      const ChiFunction& chi,
                                      const UNIWitness& witness,
                                      const SpectralData& spectral,
                                      double grid_tol = 1e-8);

// Damped iteration u' = L_sigma^{n0}(chi u), v' = L_s^{n0} v with per-step
// cone membership and L2 ratios r_m = int u_{m+1}^2 dmu / int u_m^2 dmu.
struct ConeStep {
  int m;
  double r;
  ConeReport membership;
  double cancellation_margin;
};
struct ConeIterateResult {
  std::vector<ConeStep> steps;
  double beta_hat = 0.0;  // max over steps of r_m
  ConePair final_pair;
};
ConeIterateResult cone_iterate(Complex s, const ConePair& start, int m_steps,
                               const ConstantsLedger& ledger,
                               const UNIWitness& witness,
                               const SpectralData& spectral, int workers = 1);

// Federer-style mass comparison between the middle thirds and the gap
// covers, for positive w with |log w|_alpha <= K |b|^alpha.
struct FedRatio {
  double int_middle = 0.0;
  double int_gaps = 0.0;
  double ratio = 0.0;
  double delta3 = 0.0;
  bool pass = false;
};
FedRatio fed_ratio(const GridFunction& w, const ChiFunction& chi, double K,
                   const ConstantsLedger& ledger, const GridFunction& f0);

}  // namespace expmix
