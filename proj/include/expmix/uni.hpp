#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expmix/dynamics.hpp"
#include "expmix/transfer.hpp"

namespace expmix {

// A branch pair certifying uniform nonintegrability: D is the grid infimum
// of |psi'| for psi = R_{n0} o h1 - R_{n0} o h2, minus a Lipschitz safety
// margin for the between-node dip. Keeps a handle on the roof it was
// scanned against.
struct UNIWitness {
  int n0;
  BranchWord word1, word2;
  double D;
  double argmin_y;
  const RoofFunction* roof_fn = nullptr;
  const RoofFunction* roof() const { return roof_fn; }
};

// Every named constant of the contraction machinery, with provenance.
struct ConstantsLedger {
  double alpha = 0.0;
  double C1 = 0.0, rho0 = 0.0, rho = 0.0;
  double C2 = 0.0;          // C1^2/(1-rho)
  double C3 = 0.0;          // measured by transfer::ly_report, injected
  double C4 = 0.0;          // 8|f0^-1|_inf |f0|_alpha C1 + 5 C2
  double D = 0.0;
  int n0 = 0;
  double Delta = 0.0;       // 2*pi/D
  double Dprime = 0.0;      // max{4*pi/D, 2}
  double delta = 0.0;       // largest scale passing the cancellation bounds
  double delta1 = 0.0;      // delta/(4*delta+6*Delta)   (diagnostic)
  double delta2 = 0.0;      // delta1 * inf f0 / sup f0  (diagnostic)
  double delta3 = 0.0;      // (1/2) delta2 e^{-(2delta+2Delta)^alpha K}
  double eta0 = 0.0;        // (sqrt(7)-1)/2
  double eta = 0.0;         // damping level, in [eta0, 1)
  double eps = 0.0;         // twist-domain half width
  double f0_sup = 0.0, f0_inv_sup = 0.0, f0_holder = 0.0;
  double P = 0.0;           // min inf|h'| over the two witness words
  int smallest_admissible_n0 = -1;
  bool c4_ge_6c3 = false;
  std::map<std::string, std::string> provenance;

  bool complete() const;
  std::string to_json_string() const;
};

// Admissibility of a word length n0: the three scale inequalities that the
// contraction argument needs, evaluated exactly as written.
struct AdmissibilityReport {
  int n0 = 0;
  bool cancel_scale_ok = false;   // C1^a C4 rho^n0 (4pi/D)^a <= (1/4)sqrt(2-2cos(pi/12))
  bool cone_scale_ok = false;     // 2 rho^n0 (1 + C1^a C4) <= 1
  bool seminorm_scale_ok = false; // C3 rho^n0 <= 1/3
  bool c4_dominates = false;      // C4 >= 6 C3
  double lhs_cancel = 0.0, rhs_cancel = 0.0;
  double lhs_cone = 0.0, lhs_seminorm = 0.0;
  int smallest_admissible = -1;
  bool admissible() const {
    return cancel_scale_ok && cone_scale_ok && seminorm_scale_ok;
  }
};

// psi_{h1,h2}(y) = R_n(h1(y)) - R_n(h2(y)) and its analytic derivative.
BirkhoffEval psi(const RoofFunction& roof, const BranchWord& w1,
                 const BranchWord& w2, double y);

// Scans word pairs over the given lengths for the pair maximizing the
// safeguarded grid infimum of |psi'|. Ties break toward smaller n0, then
// lexicographic word pair. nullopt when the best infimum is below `floor`.
std::optional<UNIWitness> uni_scan(const ExpandingMap& map,
                                   const RoofFunction& roof,
                                   const std::vector<int>& n_range,
                                   int grid_resolution = 4096,
                                   double floor = 1e-8, int M = -1,
                                   int workers = 1);

AdmissibilityReport n0_admissible(const ConstantsLedger& ledger, int n0);

ConstantsLedger build_ledger(const ExpandingMap& map, const RoofFunction& roof,
                             const SpectralData& spectral0,
                             const std::optional<UNIWitness>& witness,
                             double C3_measured);

}  // namespace expmix
