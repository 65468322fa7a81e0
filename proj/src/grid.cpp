#include "expmix/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace expmix {

GridFunction GridFunction::from_fn(int cells, double alpha,
                                   const std::function<Complex(double)>& f) {
  GridFunction g(cells, alpha);
  for (int i = 0; i <= cells; ++i) g[i] = f(g.node_x(i));
  return g;
}

Complex GridFunction::eval(double x) const {
  int N = cells();
  double t = std::clamp(x, 0.0, 1.0) * N;
  int i = static_cast<int>(t);
  if (i >= N) return values_[N];
  double frac = t - i;
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (const auto& z : values_) m = std::max(m, std::abs(z));
  return m;
}

double GridFunction::min_abs() const {
  double m = std::abs(values_[0]);
  for (const auto& z : values_) m = std::min(m, std::abs(z));
  return m;
}

double GridFunction::min_real() const {
  double m = values_[0].real();
  for (const auto& z : values_) m = std::min(m, z.real());
  return m;
}

double GridFunction::max_real() const {
  double m = values_[0].real();
  for (const auto& z : values_) m = std::max(m, z.real());
  return m;
}

double GridFunction::holder_seminorm() const {
  int N = cells();
  double h = 1.0 / N;
  double best = 0.0;
  for (int k = 1; k <= N; k *= 2) {
    double denom = std::pow(k * h, alpha_);
    double worst = 0.0;
    for (int i = 0; i + k <= N; ++i)
      worst = std::max(worst, std::abs(values_[i + k] - values_[i]));
    best = std::max(best, worst / denom);
  }
  return best;
}

double GridFunction::holder_seminorm_full() const {
  int N = cells();
  double h = 1.0 / N;
  double best = 0.0;
  for (int k = 1; k <= N; ++k) {
    double denom = std::pow(k * h, alpha_);
    double worst = 0.0;
    for (int i = 0; i + k <= N; ++i)
      worst = std::max(worst, std::abs(values_[i + k] - values_[i]));
    best = std::max(best, worst / denom);
  }
  return best;
}

double GridFunction::b_norm(double b) const {
  return std::max(sup_norm(),
                  holder_seminorm() / (1.0 + std::pow(std::abs(b), alpha_)));
}

GridFunction GridFunction::map(
    const std::function<Complex(Complex)>& f) const {
  GridFunction g = *this;
  for (auto& z : g.values_) z = f(z);
  return g;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(Complex c) {
  for (auto& z : values_) z *= c;
  return *this;
}

GridFunction hadamard(GridFunction a, const GridFunction& b) {
  for (int i = 0; i < a.nodes(); ++i) a[i] *= b[i];
  return a;
}

Complex trapezoid(const GridFunction& v) {
  int N = v.cells();
  Complex acc = 0.5 * (v[0] + v[N]);
  for (int i = 1; i < N; ++i) acc += v[i];
  return acc / static_cast<double>(N);
}

Complex trapezoid_weighted(const GridFunction& v, const GridFunction& w) {
  int N = v.cells();
  Complex acc = 0.5 * (v[0] * w[0] + v[N] * w[N]);
  for (int i = 1; i < N; ++i) acc += v[i] * w[i];
  return acc / static_cast<double>(N);
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int panels) {
  if (b <= a) return 0.0;
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;
  double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

Complex simpson_c(const std::function<Complex(double)>& f, double a, double b,
                  int panels) {
  if (b <= a) return 0.0;
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;
  double h = (b - a) / panels;
  Complex acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i)
    acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

}  // namespace expmix
