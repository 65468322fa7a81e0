#include "expmix/cone.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "expmix/parallel.hpp"
#include "expmix/rng.hpp"
#include "json.hpp"

namespace expmix {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
}  // namespace

ConeReport cone_check(const GridFunction& u, const GridFunction& v, double b,
                      const ConstantsLedger& ledger) {
  ConeReport rep;
  const double alpha = ledger.alpha;
  const double cap = ledger.C4 * std::pow(std::abs(b), alpha);
  const int N = u.cells();
  const double h = 1.0 / N;

  rep.margin_positive = u.min_real();

  double dom = 0.0;
  for (int i = 0; i <= N; ++i)
    dom = std::max(dom, std::abs(v[i]) / u[i].real());
  rep.margin_dominated = dom;

  GridFunction logu = u.map([](Complex z) { return std::log(z.real()); });
  rep.margin_log_u = logu.holder_seminorm() / cap;

  // v regularity against u(y): check dyadic separations in both orders
  double vr = 0.0;
  for (int k = 1; k <= N; k *= 2) {
    double denom = cap * std::pow(k * h, alpha);
    for (int i = 0; i + k <= N; ++i) {
      double dv = std::abs(v[i + k] - v[i]);
      vr = std::max(vr, dv / (denom * u[i].real()));
      vr = std::max(vr, dv / (denom * u[i + k].real()));
    }
  }
  rep.margin_v_reg = vr;

  const double tol = 1e-10;
  if (rep.margin_positive <= 0.0)
    rep.violated = "u > 0";
  else if (rep.margin_dominated > 1.0 + tol)
    rep.violated = "|v| <= u";
  else if (rep.margin_log_u > 1.0 + tol)
    rep.violated = "|log u|_alpha <= C4 |b|^alpha";
  else if (rep.margin_v_reg > 1.0 + tol)
    rep.violated = "|v(x)-v(y)| <= C4 |b|^alpha u(y) |x-y|^alpha";
  rep.member = rep.violated == nullptr;
  return rep;
}

ConePair sample_cone(double b, const ConstantsLedger& ledger,
                     std::uint64_t seed, int grid_cells) {
  if (std::abs(b) < 1.0) throw Error("sample_cone needs |b| >= 1");
  const double alpha = ledger.alpha;
  const double cap = ledger.C4 * std::pow(std::abs(b), alpha);

  SampleRng rng(seed, 11);
  const int K = 8;
  std::vector<double> ag(K), pg(K), at(K), pt(K);
  double lip_g = 0.0, lip_t = 0.0, sup_g = 0.0;
  for (int k = 0; k < K; ++k) {
    ag[k] = rng.uniform(-1.0, 1.0);
    pg[k] = rng.uniform(0.0, kTwoPi);
    at[k] = rng.uniform(-1.0, 1.0);
    pt[k] = rng.uniform(0.0, kTwoPi);
    lip_g += std::abs(ag[k]) * kTwoPi * (k + 1);
    lip_t += std::abs(at[k]) * kTwoPi * (k + 1);
    sup_g += std::abs(ag[k]);
  }
  // scale so that |g|_alpha, |theta|_alpha stay clear of the cone cap and
  // |g|_inf is small enough that the exp factor cannot push the two-point
  // bound over the cap at moderate separations
  double sg = std::min(0.4 * cap / lip_g, 0.05 / sup_g);
  double st = 0.4 * cap / lip_t;

  for (int attempt = 0; attempt < 24; ++attempt) {
    auto g = [&](double y) {
      double acc = 0.0;
      for (int k = 0; k < K; ++k)
        acc += sg * ag[k] * std::cos(kTwoPi * (k + 1) * y + pg[k]);
      return acc;
    };
    auto th = [&](double y) {
      double acc = 0.0;
      for (int k = 0; k < K; ++k)
        acc += st * at[k] * std::cos(kTwoPi * (k + 1) * y + pt[k]);
      return acc;
    };
    ConePair pair;
    pair.b = b;
    pair.C4 = ledger.C4;
    pair.u = GridFunction::from_fn(grid_cells, alpha, [&](double y) {
      return Complex(std::exp(g(y)), 0.0);
    });
    pair.v = GridFunction::from_fn(grid_cells, alpha, [&](double y) {
      return std::exp(g(y)) * std::exp(Complex(0.0, th(y)));
    });
    if (cone_check(pair.u, pair.v, b, ledger).member) return pair;
    sg *= 0.8;
    st *= 0.8;
  }
  throw Error("cone sampler failed to back off into the cone");
}

// ---------------------------------------------------------------------
// chi construction

ChiFunction::ChiFunction(const ExpandingMap* map, BranchWord w1, BranchWord w2,
                         std::vector<Interval> intervals, double eta, double b,
                         double delta, double Delta)
    : map_(map),
      w1_(std::move(w1)),
      w2_(std::move(w2)),
      intervals_(std::move(intervals)),
      eta_(eta),
      b_(b),
      delta_(delta),
      Delta_(Delta) {
  img_lo_[0] = w1_.image_lo();
  img_hi_[0] = w1_.image_hi();
  img_lo_[1] = w2_.image_lo();
  img_hi_[1] = w2_.image_hi();
}

namespace {
inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }
}  // namespace

double ChiFunction::profile(double y, int type) const {
  // binary search for the interval containing y
  int lo = 0, hi = static_cast<int>(intervals_.size()) - 1;
  while (lo <= hi) {
    int mid = (lo + hi) / 2;
    const Interval& I = intervals_[mid];
    if (y < I.lo)
      hi = mid - 1;
    else if (y > I.hi)
      lo = mid + 1;
    else {
      if (I.type != type) return 1.0;
      double w = (I.hi - I.lo) / 3.0;
      if (y <= I.lo + w)
        return 1.0 - (1.0 - eta_) * smoothstep((y - I.lo) / w);
      if (y >= I.hi - w)
        return 1.0 - (1.0 - eta_) * smoothstep((I.hi - y) / w);
      return eta_;
    }
  }
  return 1.0;
}

double ChiFunction::eval(double x) const {
  for (int m = 0; m < 2; ++m) {
    if (x >= img_lo_[m] && x <= img_hi_[m]) {
      const BranchWord& w = m == 0 ? w1_ : w2_;
      double y = x;
      for (int j = 0; j < w.length(); ++j) y = map_->forward(y);
      return profile(std::clamp(y, 0.0, 1.0), m);
    }
  }
  return 1.0;
}

std::vector<std::pair<double, double>> ChiFunction::middle_thirds() const {
  std::vector<std::pair<double, double>> out;
  for (const auto& I : intervals_) {
    double w = (I.hi - I.lo) / 3.0;
    out.emplace_back(I.lo + w, I.hi - w);
  }
  return out;
}

std::vector<std::pair<double, double>> ChiFunction::hat_gaps() const {
  // gap J_j together with the outer thirds of the flanking intervals
  std::vector<std::pair<double, double>> out;
  double prev_inner = 0.0;  // right end of previous middle third, or 0
  for (const auto& I : intervals_) {
    double w = (I.hi - I.lo) / 3.0;
    out.emplace_back(prev_inner, I.lo + w);
    prev_inner = I.hi - w;
  }
  out.emplace_back(prev_inner, 1.0);
  return out;
}

std::string ChiFunction::to_json_string() const {
  nlohmann::json j;
  j["eta"] = eta_;
  j["b"] = b_;
  j["delta"] = delta_;
  j["Delta"] = Delta_;
  j["slope_bound"] = slope_bound_;
  auto arr = nlohmann::json::array();
  for (const auto& I : intervals_)
    arr.push_back({{"lo", I.lo}, {"hi", I.hi}, {"type", I.type}});
  j["intervals"] = arr;
  return j.dump(2);
}

ChiFunction build_chi(double b, const ConePair& pair,
                      const ConstantsLedger& ledger,
                      const UNIWitness& witness, const SpectralData& spectral,
                      int workers) {
  const double ab = std::abs(b);
  // feasibility of the base-point sweep: the phase must wrap by a full
  // turn inside a ball that fits in [0,1]
  if (ab < std::max(kTwoPi / ledger.D, 1.0))
    throw Error("frequency too small for the cancellation sweep: |b| < "
                "2*pi/D");

  const double delta = ledger.delta;
  const double Delta = ledger.Delta;
  const double r_small = delta / ab;   // candidate ball radius
  const double r_big = Delta / ab;     // base-point ball radius
  const double step = delta / (8.0 * ab);
  const int L = static_cast<int>(std::ceil(1.0 / step)) + 1;

  const ExpandingMap& map = witness.word1.map();

  // pointwise case predicates on the sweep lattice
  const double eta0 = ledger.eta0;
  std::vector<std::uint8_t> case_ok[2];
  case_ok[0].assign(L + 1, 0);
  case_ok[1].assign(L + 1, 0);

  const BranchWord* words[2] = {&witness.word1, &witness.word2};

  parallel_for(
      static_cast<std::size_t>(L) + 1, workers,
      [&](std::size_t i) {
        double y = std::min(1.0, static_cast<double>(i) * step);
        Complex Av[2];
        double Au[2];
        for (int m = 0; m < 2; ++m) {
          auto he = words[m]->eval(y);
          auto rb = birkhoff_roof(*witness.roof(), *words[m], y);
          double fa = spectral.f.eval(he.value).real();
          double wgt = std::abs(he.deriv) * fa;
          Complex tw = std::exp(-Complex(spectral.sigma, b) * rb.value);
          double tw_r = std::exp(-spectral.sigma * rb.value);
          Av[m] = tw * wgt * pair.v.eval(he.value);
          Au[m] = tw_r * wgt * pair.u.eval(he.value).real();
        }
        double lhs = std::abs(Av[0] + Av[1]);
        case_ok[0][i] = lhs <= eta0 * Au[0] + Au[1] + 1e-14 ? 1 : 0;
        case_ok[1][i] = lhs <= Au[0] + eta0 * Au[1] + 1e-14 ? 1 : 0;
      },
      1024);

  // prefix sums for sliding all-true window queries
  std::vector<int> pre[2];
  for (int m = 0; m < 2; ++m) {
    pre[m].assign(L + 2, 0);
    for (int i = 0; i <= L; ++i) pre[m][i + 1] = pre[m][i] + case_ok[m][i];
  }
  auto window_wins = [&](int m, double lo, double hi) {
    int a = std::max(0, static_cast<int>(std::ceil(lo / step)));
    int c = std::min(L, static_cast<int>(std::floor(hi / step)));
    if (c < a) return false;
    return pre[m][c + 1] - pre[m][a] == c - a + 1;
  };
  // candidate y1 at lattice index i: a case wins on the full clipped ball
  auto candidate_case = [&](int i) {
    double y1 = std::min(1.0, i * step);
    double lo = std::max(0.0, y1 - r_small);
    double hi = std::min(1.0, y1 + r_small);
    if (window_wins(0, lo, hi)) return 0;  // tie-break toward word1
    if (window_wins(1, lo, hi)) return 1;
    return -1;
  };

  // base-point sweep: every ball B_{Delta/|b|}(y0) must contain a winner
  const double sweep = Delta / (2.0 * ab);
  for (double y0 = 0.0; y0 <= 1.0 + 1e-12; y0 += sweep) {
    double lo = std::max(0.0, std::min(1.0, y0) - r_big);
    double hi = std::min(1.0, std::min(1.0, y0) + r_big);
    int a = static_cast<int>(std::ceil(lo / step));
    int c = std::min(L, static_cast<int>(std::floor(hi / step)));
    bool found = false;
    for (int i = a; i <= c && !found; ++i)
      if (candidate_case(i) >= 0) found = true;
    if (!found)
      throw NoCaseWins(
          "no candidate ball around y0=" + std::to_string(y0) +
          " satisfies either case bound (constants/regularity bug)");
  }

  // greedy left-to-right assembly of disjoint intervals
  std::vector<ChiFunction::Interval> intervals;
  double edge = 0.0;
  for (;;) {
    int found = -1, ftype = -1;
    int start = static_cast<int>(std::ceil((edge + r_small) / step));
    if (static_cast<double>(start) * step - r_small <= edge)
      ++start;  // enforce a strictly positive gap
    for (int i = start; i <= L; ++i) {
      int t = candidate_case(i);
      if (t >= 0) {
        found = i;
        ftype = t;
        break;
      }
    }
    if (found < 0) break;
    double y1 = std::min(1.0, found * step);
    double lo = y1 - r_small;
    double hi = std::min(1.0, y1 + r_small);
    if (hi - lo < r_small) break;  // right-edge sliver, leave to the gap
    double gap = lo - edge;
    if (gap > 2.0 * r_big + 1e-12)
      throw NoCaseWins("interval gap " + std::to_string(gap) +
                       " exceeds 2*Delta/|b| during assembly");
    intervals.push_back({lo, hi, ftype});
    edge = hi;
  }
  if (intervals.empty())
    throw NoCaseWins("no cancellation interval could be placed");
  if (1.0 - edge > 2.0 * r_big + 1e-12)
    throw NoCaseWins("final gap exceeds 2*Delta/|b|");

  // damping level: the ledger value, raised if needed so the smoothstep
  // slope (1.5 per unit) through the branch contraction stays below |b|
  double eta = std::max(ledger.eta, ledger.eta0);
  for (const auto& I : intervals) {
    double w = (I.hi - I.lo) / 3.0;
    double pmin = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 16; ++g) {
      double y = I.lo + (I.hi - I.lo) * g / 16.0;
      pmin = std::min(pmin, std::abs(words[I.type]->eval(y).deriv));
    }
    double eta_req = 1.0 - ab * w * pmin / 1.5;
    eta = std::max(eta, eta_req);
  }
  if (eta >= 1.0)
    throw ChiSlopeExceeded("no eta < 1 keeps |chi'| <= |b|");

  ChiFunction chi(&map, witness.word1, witness.word2, std::move(intervals),
                  eta, b, delta, Delta);

  // certify the slope bound
  double bound = 0.0;
  for (const auto& I : chi.intervals()) {
    double w = (I.hi - I.lo) / 3.0;
    double pmin = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= 16; ++g) {
      double y = I.lo + (I.hi - I.lo) * g / 16.0;
      pmin = std::min(pmin, std::abs(words[I.type]->eval(y).deriv));
    }
    bound = std::max(bound, 1.5 * (1.0 - eta) / (w * pmin));
  }
  chi.slope_bound_ = bound;
  if (bound > ab * (1.0 + 1e-9))
    throw ChiSlopeExceeded("certified |chi'| bound " + std::to_string(bound) +
                           " exceeds |b|=" + std::to_string(ab));
  return chi;
}

CancellationResult cancellation_check(Complex s, const ConePair& pair,
                                      const ChiFunction& chi,
                                      const UNIWitness& witness,
                                      const SpectralData& spectral,
                                      double grid_tol) {
  const ExpandingMap& map = witness.word1.map();
  const RoofFunction& roof = *witness.roof();
  auto words = enumerate_words(map, witness.n0, -1, &roof).words;
  const int N = pair.u.cells();

  GridFunction lhs = apply_L_words(
      map, roof, spectral, s, words,
      [&](double x) { return pair.v.eval(x); }, N);
  GridFunction rhs = apply_L_words(
      map, roof, spectral, Complex(spectral.sigma, 0.0), words,
      [&](double x) {
        return Complex(chi.eval(x) * pair.u.eval(x).real(), 0.0);
      },
      N);

  CancellationResult out;
  out.margin = std::numeric_limits<double>::infinity();
  out.min_rhs = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= N; ++i) {
    double m = rhs[i].real() - std::abs(lhs[i]);
    out.margin = std::min(out.margin, m);
    out.min_rhs = std::min(out.min_rhs, rhs[i].real());
  }
  out.pass = out.margin >= -grid_tol;
  return out;
}

ConeIterateResult cone_iterate(Complex s, const ConePair& start, int m_steps,
                               const ConstantsLedger& ledger,
                               const UNIWitness& witness,
                               const SpectralData& spectral, int workers) {
  const double b = s.imag();
  if (std::abs(b) < std::max(kTwoPi / ledger.D, 1.0))
    throw Error("cone iteration needs |b| >= max(2*pi/D, 1)");
  ConeReport init = cone_check(start.u, start.v, b, ledger);
  if (!init.member)
    throw ConeEscape(std::string("start pair outside the cone: ") +
                     init.violated);

  const ExpandingMap& map = witness.word1.map();
  const RoofFunction& roof = *witness.roof();
  auto words = enumerate_words(map, witness.n0, -1, &roof).words;
  const int N = start.u.cells();

  ConeIterateResult out;
  ConePair cur = start;
  double mass_prev = mu_integral(hadamard(cur.u, cur.u), spectral.f).real();

  for (int m = 0; m < m_steps; ++m) {
    ChiFunction chi = build_chi(b, cur, ledger, witness, spectral, workers);
    CancellationResult cc =
        cancellation_check(s, cur, chi, witness, spectral);

    ConePair next;
    next.b = b;
    next.C4 = ledger.C4;
    next.u = apply_L_words(
        map, roof, spectral, Complex(spectral.sigma, 0.0), words,
        [&](double x) {
          return Complex(chi.eval(x) * cur.u.eval(x).real(), 0.0);
        },
        N);
    next.v = apply_L_words(
        map, roof, spectral, s, words,
        [&](double x) { return cur.v.eval(x); }, N);

    double mass = mu_integral(hadamard(next.u, next.u), spectral.f).real();
    double r = mass / mass_prev;
    ConeReport rep = cone_check(next.u, next.v, b, ledger);
    if (!rep.member)
      throw ConeEscape("cone escape at step " + std::to_string(m) + ": " +
                       rep.violated);
    out.steps.push_back({m, r, rep, cc.margin});
    out.beta_hat = std::max(out.beta_hat, r);
    cur = std::move(next);
    mass_prev = mass;
  }
  out.final_pair = std::move(cur);
  return out;
}

FedRatio fed_ratio(const GridFunction& w, const ChiFunction& chi, double K,
                   const ConstantsLedger& ledger, const GridFunction& f0) {
  const double ab = std::abs(chi.b());
  const double cap = K * std::pow(ab, ledger.alpha);
  GridFunction logw = w.map([](Complex z) { return std::log(z.real()); });
  if (logw.holder_seminorm() > cap * (1.0 + 1e-10))
    throw RegularityViolated("log-regularity of w exceeds K|b|^alpha");

  auto integrate = [&](const std::vector<std::pair<double, double>>& segs) {
    double acc = 0.0;
    for (auto [a, c] : segs) {
      if (c <= a) continue;
      int n = std::max(8, static_cast<int>((c - a) * 16 * w.cells()));
      double h = (c - a) / n;
      for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * h;
        acc += w.eval(x).real() * f0.eval(x).real() * h;
      }
    }
    return acc;
  };

  FedRatio out;
  out.int_middle = integrate(chi.middle_thirds());
  out.int_gaps = integrate(chi.hat_gaps());
  out.ratio = out.int_middle / out.int_gaps;
  double d2 = ledger.delta1 * f0.min_real() / f0.sup_norm();
  out.delta3 =
      0.5 * d2 *
      std::exp(-std::pow(2.0 * ledger.delta + 2.0 * ledger.Delta,
                         ledger.alpha) *
               K);
  out.pass = out.ratio >= out.delta3;
  return out;
}

}  // namespace expmix
