#include "expmix/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace expmix {

namespace {
constexpr int kMaxCountableBranches = 4096;
}

ExpandingMap::ExpandingMap(double alpha, double C1, double rho0,
                           std::vector<Branch> branches,
                           std::function<double(double)> forward,
                           std::string name)
    : alpha_(alpha),
      C1_(C1),
      rho0_(rho0),
      name_(std::move(name)),
      branches_(std::move(branches)),
      forward_(std::move(forward)) {
  rebuild_interior(static_cast<int>(branches_.size()));
}

ExpandingMap::ExpandingMap(double alpha, double C1, double rho0,
                           std::function<Branch(int)> factory,
                           int materialized,
                           std::function<double(double)> forward,
                           std::string name)
    : alpha_(alpha),
      C1_(C1),
      rho0_(rho0),
      name_(std::move(name)),
      factory_(std::move(factory)),
      forward_(std::move(forward)) {
  branches_.reserve(materialized);
  for (int m = 0; m < materialized; ++m) branches_.push_back(factory_(m));
  rebuild_interior(materialized);
}

void ExpandingMap::rebuild_interior(int upto) {
  interior_.clear();
  for (int m = 0; m < upto && m < static_cast<int>(branches_.size()); ++m) {
    const Branch& b = branches_[m];
    if (b.lo > 0.0) interior_.push_back(b.lo);
    if (b.hi < 1.0) interior_.push_back(b.hi);
  }
  std::sort(interior_.begin(), interior_.end());
  interior_.erase(std::unique(interior_.begin(), interior_.end(),
                              [](double a, double b) {
                                return std::abs(a - b) < 1e-15;
                              }),
                  interior_.end());
}

ExpandingMap ExpandingMap::with_declared(double C1, double rho0) const {
  ExpandingMap copy = *this;
  copy.C1_ = C1;
  copy.rho0_ = rho0;
  return copy;
}

int ExpandingMap::branch_count() const {
  return countable() ? kMaxCountableBranches
                     : static_cast<int>(branches_.size());
}

int ExpandingMap::usable_branches(int M) const {
  int count = branch_count();
  if (M < 0) return countable() ? static_cast<int>(branches_.size()) : count;
  return std::min(M, count);
}

const Branch& ExpandingMap::branch(int m) const {
  while (countable() && m >= static_cast<int>(branches_.size()) &&
         static_cast<int>(branches_.size()) < kMaxCountableBranches)
    branches_.push_back(factory_(static_cast<int>(branches_.size())));
  return branches_.at(m);
}

BranchWord::BranchWord(const ExpandingMap* map, std::vector<int> indices)
    : map_(map), indices_(std::move(indices)) {
  double a = eval(0.0).value;
  double b = eval(1.0).value;
  image_lo_ = std::min(a, b);
  image_hi_ = std::max(a, b);
}

BranchWord::Eval BranchWord::eval(double y) const {
  double x = y;
  double deriv = 1.0;
  for (int j = length() - 1; j >= 0; --j) {
    const Branch& b = map_->branch(indices_[j]);
    deriv *= b.hp(x);
    x = b.h(x);
  }
  return {x, deriv};
}

std::vector<double> eval_forward(const ExpandingMap& map, double y, int n) {
  std::vector<double> orbit;
  orbit.reserve(n + 1);
  orbit.push_back(y);
  const auto& interior = map.interior_endpoints();
  for (int j = 0; j < n; ++j) {
    double x = orbit.back();
    for (double e : interior)
      if (std::abs(x - e) <= map.boundary_tol())
        throw OrbitHitsBoundary("orbit iterate " + std::to_string(j) +
                                " lands on partition endpoint " +
                                std::to_string(e));
    orbit.push_back(map.forward(x));
  }
  return orbit;
}

BranchWord::Eval branch_eval(const BranchWord& word, double y) {
  return word.eval(y);
}

WordEnumeration enumerate_words(const ExpandingMap& map, int n, int M,
                                const RoofFunction* roof, double tail_bound) {
  WordEnumeration out;
  int B = map.usable_branches(M);
  if (map.countable() && M < 0) B = map.usable_branches(16);

  // tail mass of the condition-(iv) series over omitted single branches;
  // the series converges, so sum until terms are negligible
  if (map.countable() && roof) {
    double tail = 0.0;
    const double eps = roof->eps_iv;
    int m = B;
    for (; m < B + 100000; ++m) {
      const Branch& br = map.branch(std::min(m, map.branch_count() - 1));
      if (m >= map.branch_count()) break;
      double sup_h = 0.0, sup_R = 0.0;
      for (int k = 0; k <= 8; ++k) {
        double y = k / 8.0;
        sup_h = std::max(sup_h, std::abs(br.hp(y)));
        sup_R = std::max(sup_R, roof->R(br.h(y)));
      }
      double term = std::exp(eps * sup_R) * sup_h;
      tail += term;
      if (term < 1e-16 * std::max(tail, 1.0)) break;
    }
    out.tail_mass = tail;
    if (tail > tail_bound)
      throw TruncationTailTooLarge(
          "condition-(iv) tail mass " + std::to_string(tail) +
          " exceeds bound " + std::to_string(tail_bound));
  }

  // lexicographic enumeration = counting in base B, most significant first
  std::vector<int> idx(n, 0);
  std::int64_t total = 1;
  for (int j = 0; j < n; ++j) {
    total *= B;
    if (total > 1 << 22)
      throw Error("word enumeration too large: B=" + std::to_string(B) +
                  " n=" + std::to_string(n));
  }
  out.words.reserve(total);
  for (std::int64_t w = 0; w < total; ++w) {
    out.words.emplace_back(&map, idx);
    for (int j = n - 1; j >= 0; --j) {
      if (++idx[j] < B) break;
      idx[j] = 0;
    }
  }
  return out;
}

BirkhoffEval birkhoff_roof(const RoofFunction& roof, const BranchWord& word,
                           double y) {
  const int n = word.length();
  const ExpandingMap& map = word.map();
  // suffix_k = h_{i_k} o ... o h_{i_n}(y), computed inner-out
  std::vector<double> suffix(n + 1);
  std::vector<double> sden(n + 1);  // derivative of suffix_k at y
  suffix[n] = y;
  sden[n] = 1.0;
  for (int k = n - 1; k >= 0; --k) {
    const Branch& b = map.branch(word.indices()[k]);
    sden[k] = b.hp(suffix[k + 1]) * sden[k + 1];
    suffix[k] = b.h(suffix[k + 1]);
  }
  double value = 0.0, deriv = 0.0;
  for (int k = 0; k < n; ++k) {
    value += roof.R(suffix[k]);
    deriv += roof.Rp(suffix[k]) * sden[k];
  }
  return {value, deriv};
}

namespace {

void record_fail(ConditionReport& rep, bool& flag, const std::string& cond,
                 double loc, double measured, double allowed) {
  flag = false;
  rep.witnesses.push_back({cond, loc, measured, allowed});
}

}  // namespace

ConditionReport verify_conditions(const ExpandingMap& map,
                                  const RoofFunction& roof,
                                  int samples_per_cell, int M) {
  ConditionReport rep;
  rep.cond_i = rep.cond_ii = rep.cond_iii = rep.cond_iv = rep.distortion =
      true;

  const double alpha = map.alpha();
  const double C1 = map.C1();
  const double rho0 = map.rho0();
  const int B = map.usable_branches(map.countable() ? M : -1);
  const int S = std::max(2, samples_per_cell);

  double sup_hp = 0.0, sup_loghp_alpha = 0.0, sup_roof_slope = 0.0;
  double sup_distortion = 0.0;
  double moment = 0.0;

  for (int m = 0; m < B; ++m) {
    const Branch& br = map.branch(m);
    std::vector<double> ys(S + 1), hv(S + 1), hd(S + 1);
    for (int k = 0; k <= S; ++k) {
      ys[k] = static_cast<double>(k) / S;
      hv[k] = br.h(ys[k]);
      hd[k] = br.hp(ys[k]);
    }

    double br_sup_hp = 0.0, br_sup_R = 0.0;
    for (int k = 0; k <= S; ++k) {
      br_sup_hp = std::max(br_sup_hp, std::abs(hd[k]));
      br_sup_R = std::max(br_sup_R, roof.R(hv[k]));
      double rs = std::abs(roof.Rp(hv[k]) * hd[k]);
      if (rs > sup_roof_slope) sup_roof_slope = rs;
      if (rs > C1 && rep.cond_iii)
        record_fail(rep, rep.cond_iii, "iii", ys[k], rs, C1);
    }
    sup_hp = std::max(sup_hp, br_sup_hp);
    if (br_sup_hp > C1 * rho0 && rep.cond_i) {
      double worst_y = 0.0, worst = 0.0;
      for (int k = 0; k <= S; ++k)
        if (std::abs(hd[k]) > worst) worst = std::abs(hd[k]), worst_y = ys[k];
      record_fail(rep, rep.cond_i, "i", worst_y, worst, C1 * rho0);
    }

    // Hoelder seminorm of log|h'| and the two-point derivative distortion
    for (int k = 0; k <= S; ++k)
      for (int l = k + 1; l <= S; ++l) {
        double d = std::pow(ys[l] - ys[k], alpha);
        double lh =
            std::abs(std::log(std::abs(hd[l])) - std::log(std::abs(hd[k]))) /
            d;
        sup_loghp_alpha = std::max(sup_loghp_alpha, lh);
        if (lh > C1 && rep.cond_ii)
          record_fail(rep, rep.cond_ii, "ii", ys[k], lh, C1);
        double dist = std::abs(hd[l] - hd[k]) /
                      (std::abs(hd[k]) * d);  // vs 2*C1
        sup_distortion = std::max(sup_distortion, dist);
        if (dist > 2.0 * C1 && rep.distortion)
          record_fail(rep, rep.distortion, "distortion", ys[k], dist,
                      2.0 * C1);
      }

    moment += std::exp(roof.eps_iv * br_sup_R) * br_sup_hp;
  }

  // condition (iv): extend the series over the omitted branches
  rep.moment_sum = moment;
  if (map.countable()) {
    double tail = 0.0;
    for (int m = B; m < map.branch_count(); ++m) {
      const Branch& br = map.branch(m);
      double sup_h = 0.0, sup_R = 0.0;
      for (int k = 0; k <= 8; ++k) {
        double y = k / 8.0;
        sup_h = std::max(sup_h, std::abs(br.hp(y)));
        sup_R = std::max(sup_R, roof.R(br.h(y)));
      }
      double term = std::exp(roof.eps_iv * sup_R) * sup_h;
      tail += term;
      if (term < 1e-16 * std::max(moment + tail, 1.0)) break;
    }
    rep.moment_tail = tail;
    rep.moment_sum += tail;
  }
  if (!std::isfinite(rep.moment_sum))
    record_fail(rep, rep.cond_iv, "iv", 0.0, rep.moment_sum,
                std::numeric_limits<double>::infinity());

  // quadrature estimate of int e^{eps R} dmu with the flat reference
  // density; the spectral module refines this with f0 when available
  {
    int n = 2048;
    double acc = 0.5 * (std::exp(roof.eps_iv * roof.R(0.0)) +
                        std::exp(roof.eps_iv * roof.R(1.0)));
    for (int i = 1; i < n; ++i)
      acc += std::exp(roof.eps_iv * roof.R(static_cast<double>(i) / n));
    rep.exp_moment_mu = acc / n;
  }

  rep.measured_C1 =
      std::max({sup_hp / rho0, sup_loghp_alpha, sup_roof_slope});
  rep.measured_rho0 = sup_hp / C1;
  rep.measured_distortion = sup_distortion;
  return rep;
}

}  // namespace expmix
