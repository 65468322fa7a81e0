#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "expmix/errors.hpp"

namespace expmix {

// One inverse branch h : [0,1] -> [lo,hi] of a piecewise expanding map,
// with closed-form derivative.
struct Branch {
  double lo = 0.0, hi = 1.0;  // image interval h([0,1]) = partition cell
  std::function<double(double)> h;
  std::function<double(double)> hp;
};

// Piecewise C^{1+alpha} uniformly expanding map of [0,1] with enumerable
// inverse branches and analytic derivatives. Immutable after construction.
//
// Standing conditions (n-fold inverse branches H_n):
//   (i)   |h'|_inf <= C1 * rho0^n        for every h in H_n
//   (ii)  |log|h'||_alpha <= C1          for every single branch
class ExpandingMap {
 public:
  ExpandingMap(double alpha, double C1, double rho0,
               std::vector<Branch> branches,
               std::function<double(double)> forward,
               std::string name = "");

  // countable family: `factory(m)` yields branch m; `count` branches are
  // materialized eagerly, the rest on demand up to `max_branches`.
  ExpandingMap(double alpha, double C1, double rho0,
               std::function<Branch(int)> factory, int materialized,
               std::function<double(double)> forward, std::string name = "");

  double alpha() const { return alpha_; }
  double C1() const { return C1_; }
  double rho0() const { return rho0_; }
  const std::string& name() const { return name_; }
  bool countable() const { return static_cast<bool>(factory_); }

  // number of directly usable branches (finite maps: all of them)
  int branch_count() const;
  // min(M, branch_count) with M<0 meaning "no truncation"
  int usable_branches(int M) const;
  const Branch& branch(int m) const;

  double forward(double y) const { return forward_(y); }

  // copy with different declared constants (for condition re-checks)
  ExpandingMap with_declared(double C1, double rho0) const;

  // interior partition endpoints (branch interfaces); used for the
  // boundary-proximity guard on orbits
  const std::vector<double>& interior_endpoints() const { return interior_; }
  double boundary_tol() const { return boundary_tol_; }

 private:
  double alpha_, C1_, rho0_;
  std::string name_;
  mutable std::vector<Branch> branches_;
  std::function<Branch(int)> factory_;
  std::function<double(double)> forward_;
  std::vector<double> interior_;
  double boundary_tol_ = 1e-12;
  void rebuild_interior(int upto);
};

// Branchwise-C^1 roof function R > 0 with closed-form derivative.
// Conditions (iii)/(iv):
//   (iii) |(R o h)'|_inf <= C1 for every single branch
//   (iv)  sum_h e^{eps |R o h|_inf} |h'|_inf < infinity
struct RoofFunction {
  std::function<double(double)> R;
  std::function<double(double)> Rp;
  double inf_R = 0.0;
  double eps_iv = 0.1;  // moment parameter for condition (iv)
};

// A length-n composition h_{i1} o ... o h_{in} of inverse branches.
class BranchWord {
 public:
  BranchWord(const ExpandingMap* map, std::vector<int> indices);

  int length() const { return static_cast<int>(indices_.size()); }
  const std::vector<int>& indices() const { return indices_; }
  const ExpandingMap& map() const { return *map_; }
  double image_lo() const { return image_lo_; }
  double image_hi() const { return image_hi_; }

  // h(y) and h'(y) via the chain rule (no finite differences)
  struct Eval {
    double value;
    double deriv;
  };
  Eval eval(double y) const;

  bool operator<(const BranchWord& o) const { return indices_ < o.indices_; }
  bool operator==(const BranchWord& o) const { return indices_ == o.indices_; }

 private:
  const ExpandingMap* map_;
  std::vector<int> indices_;
  double image_lo_, image_hi_;
};

struct ConditionWitness {
  std::string condition;
  double location;
  double measured;
  double allowed;
};

// verify_conditions output: per-condition flags, tightest measured
// constants, and witness locations for any failure.
struct ConditionReport {
  bool cond_i = false;          // contraction of single branches
  bool cond_ii = false;         // log-derivative Hoelder bound
  bool cond_iii = false;        // roof-slope bound
  bool cond_iv = false;         // exponential moment series finite
  bool distortion = false;      // |h'x-h'y| <= 2 C1 |h'y| |x-y|^alpha
  double measured_C1 = 0.0;     // tightest C1 covering (i)-(iii)
  double measured_rho0 = 0.0;   // tightest rho0 given declared C1
  double measured_distortion = 0.0;  // tightest constant in the h' bound
  double moment_sum = 0.0;      // sum_h e^{eps|R o h|_inf}|h'|_inf
  double moment_tail = 0.0;     // omitted tail when countable
  double exp_moment_mu = 0.0;   // quadrature estimate of int e^{eps R} dmu
  std::vector<ConditionWitness> witnesses;
  bool all_pass() const {
    return cond_i && cond_ii && cond_iii && cond_iv && distortion;
  }
};

// ----- operations ------------------------------------------------------

// orbit[0]=y, orbit[j+1]=F(orbit[j]); throws OrbitHitsBoundary when an
// iterate lands within tolerance of an interior partition endpoint.
std::vector<double> eval_forward(const ExpandingMap& map, double y, int n);

BranchWord::Eval branch_eval(const BranchWord& word, double y);

// All words of length n over the first min(M, branch count) branches in
// lexicographic order. For countable maps the omitted single-branch tail
// mass sum_{m>=M} e^{eps|R o h_m|_inf}|h_m'|_inf is estimated numerically
// and returned; TruncationTailTooLarge if it exceeds tail_bound.
struct WordEnumeration {
  std::vector<BranchWord> words;
  double tail_mass = 0.0;
};
WordEnumeration enumerate_words(
    const ExpandingMap& map, int n, int M = -1,
    const RoofFunction* roof = nullptr,
    double tail_bound = std::numeric_limits<double>::infinity());

ConditionReport verify_conditions(const ExpandingMap& map,
                                  const RoofFunction& roof,
                                  int samples_per_cell = 64, int M = 64);

// Birkhoff sum of the roof along a word: value R_n(h(y)) and analytic
// derivative (R_n o h)'(y).
struct BirkhoffEval {
  double value;
  double deriv;
};
BirkhoffEval birkhoff_roof(const RoofFunction& roof, const BranchWord& word,
                           double y);

}  // namespace expmix
