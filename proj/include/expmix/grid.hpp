#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace expmix {

using Complex = std::complex<double>;

// Complex-valued function on the uniform grid {i/N : i=0..N} over [0,1],
// interpolated piecewise linearly between nodes.
//
// Norms:
//   sup_norm          |v|_inf   = max node magnitude
//   holder_seminorm   |v|_alpha = max over node pairs at dyadic separations
//                                 of |v(x)-v(y)| / |x-y|^alpha
//   b_norm(b)         max{ |v|_inf, |v|_alpha / (1+|b|^alpha) }
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int cells, double alpha, Complex fill = 0.0)
      : alpha_(alpha), values_(cells + 1, fill) {}

  static GridFunction from_fn(int cells, double alpha,
                              const std::function<Complex(double)>& f);

  int cells() const { return static_cast<int>(values_.size()) - 1; }
  int nodes() const { return static_cast<int>(values_.size()); }
  double alpha() const { return alpha_; }
  double node_x(int i) const { return static_cast<double>(i) / cells(); }

  Complex& operator[](int i) { return values_[i]; }
  const Complex& operator[](int i) const { return values_[i]; }
  const std::vector<Complex>& values() const { return values_; }

  // piecewise-linear interpolation; x clamped to [0,1]
  Complex eval(double x) const;

  double sup_norm() const;
  double min_abs() const;
  double min_real() const;
  double max_real() const;
  // dyadic-separation scan, O(N log N)
  double holder_seminorm() const;
  // all-pairs scan, O(N^2)
  double holder_seminorm_full() const;
  double b_norm(double b) const;

  GridFunction map(const std::function<Complex(Complex)>& f) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(Complex c);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) {
    a += b;
    return a;
  }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) {
    a -= b;
    return a;
  }
  friend GridFunction operator*(Complex c, GridFunction a) {
    a *= c;
    return a;
  }
  // nodewise product
  friend GridFunction hadamard(GridFunction a, const GridFunction& b);

 private:
  double alpha_ = 1.0;
  std::vector<Complex> values_;
};

// trapezoid quadrature of v against Lebesgue measure on [0,1]
Complex trapezoid(const GridFunction& v);

// trapezoid quadrature of v*w (nodewise product) against Lebesgue
Complex trapezoid_weighted(const GridFunction& v, const GridFunction& w);

// composite Simpson on [a,b] with n panels (n forced even)
double simpson(const std::function<double(double)>& f, double a, double b,
               int panels);
Complex simpson_c(const std::function<Complex(double)>& f, double a, double b,
                  int panels);

}  // namespace expmix
