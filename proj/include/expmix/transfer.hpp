#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "expmix/dynamics.hpp"
#include "expmix/grid.hpp"

namespace expmix {

struct ConstantsLedger;  // uni.hpp

// s = sigma + i b
struct TwistParameter {
  double sigma = 0.0;
  double b = 0.0;
  Complex s() const { return {sigma, b}; }
};

// Leading eigendata of the twisted operator P_sigma at a real twist.
struct SpectralData {
  double sigma = 0.0;
  double lambda = 0.0;
  GridFunction f;        // positive eigenfunction, int f dLeb = 1
  double residual = 0.0; // |P_sigma f - lambda f|_inf
};

// default twist-domain half width derived from the roof's moment margin
double default_twist_halfwidth(const RoofFunction& roof);

// A_{s,h,n} v = e^{-s R_n o h} |h'| v o h  for a single word h
GridFunction apply_A(const BranchWord& word, Complex s,
                     const RoofFunction& roof, const GridFunction& v);

// P_s v = sum over single branches of A_{s,h} v (truncated at M branches
// for countable families, with the tail reported through enumerate_words)
GridFunction apply_P(const ExpandingMap& map, const RoofFunction& roof,
                     Complex s, const GridFunction& v, int M = -1,
                     double tail_bound = std::numeric_limits<double>::infinity());

struct PowerIterationOptions {
  int max_iterations = 20000;
  double eigenvalue_tol = 1e-12;
  double residual_tol = 1e-9;
};

// Power iteration for the leading eigenpair of P_sigma, normalized so that
// int f dLeb = 1. Also asserts the perturbation sanity band against f0.
SpectralData leading_spectrum(const ExpandingMap& map,
                              const RoofFunction& roof, double sigma,
                              int grid_cells = 1024,
                              PowerIterationOptions opts = {},
                              double eps_override = 0.0);

// L_s v = (lambda_sigma f_sigma)^{-1} P_s(f_sigma v); requires spectral
// data at sigma = Re s (SpectralMismatch otherwise).
GridFunction apply_L(const ExpandingMap& map, const RoofFunction& roof,
                     const SpectralData& spectral, Complex s,
                     const GridFunction& v, int M = -1);

// n-fold application of L_s (operator power, applied sequentially)
GridFunction apply_L_pow(const ExpandingMap& map, const RoofFunction& roof,
                         const SpectralData& spectral, Complex s,
                         const GridFunction& v, int n, int M = -1);

// L_s^n evaluated through the length-n word sum with a callable integrand:
// (lambda^n f(y))^{-1} sum_w e^{-s R_n(h_w y)} |h_w'(y)| f(h_w y) g(h_w y).
// The callable is sampled exactly, which matters when g carries structure
// far below the grid scale (the damped cone iteration does).
GridFunction apply_L_words(const ExpandingMap& map, const RoofFunction& roof,
                           const SpectralData& spectral, Complex s,
                           const std::vector<BranchWord>& words,
                           const std::function<Complex(double)>& g,
                           int grid_cells);

// int v dmu with dmu = f0 dLeb (trapezoid)
Complex mu_integral(const GridFunction& v, const GridFunction& f0);

// Lasota-Yorke measurement: the tightest C3 with
//   |L_s^n v|_alpha <= C3 (1+|b|^alpha)|v|_inf + C3 rho^n |v|_alpha
// over the sample suite, plus the induced b-norm bound check.
struct LyEntry {
  Complex s;
  int n;
  int sample;
  double seminorm;
  double ratio;      // seminorm / ((1+|b|^a)|v|_inf + rho^n |v|_a)
  double bnorm_ratio;  // ||L^n v||_b / ||v||_b
};
struct LyReport {
  double C3 = 0.0;
  double max_bnorm_ratio = 0.0;  // must stay <= 2*C3
  std::vector<LyEntry> entries;
};
LyReport ly_report(const ExpandingMap& map, const RoofFunction& roof,
                   const std::vector<Complex>& s_list,
                   const std::vector<int>& n_list,
                   const std::vector<GridFunction>& samples, double rho,
                   int workers = 1);

// standard oscillatory + band-limited sample suite for ly_report
std::vector<GridFunction> ly_sample_suite(int grid_cells, double alpha,
                                          std::uint64_t seed);

// Norm-decay probe for the twisted operator at large |b|: follows
// ||L_{sigma+ib}^n v||_b along n = n0, 2 n0, ... and fits the geometric
// rate on the tail once the curve has entered monotone decay.
struct DolgopyatCurve {
  double b;
  std::vector<int> n;
  std::vector<double> norm_b;
  std::vector<double> ratio;  // per-step ratio of consecutive norms
  double gamma_fit = 0.0;
  int fit_start = 0;
  bool in_theorem_range = true;  // |b| >= Dprime
};
struct DolgopyatResult {
  std::vector<DolgopyatCurve> curves;
  double gamma = 0.0;  // max over curves
};
DolgopyatResult dolgopyat_probe(const ExpandingMap& map,
                                const RoofFunction& roof,
                                const ConstantsLedger& ledger,
                                const std::vector<double>& b_list,
                                int num_samples, std::uint64_t seed,
                                int grid_cells, int max_blocks = 400,
                                int workers = 1);

}  // namespace expmix
