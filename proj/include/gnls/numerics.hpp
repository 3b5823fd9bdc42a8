#pragma once

// Small numerical helpers shared across the library: compensated summation,
// an adaptive Simpson quadrature for 1-d integrals, and the 3-point Gauss rule
// used for the |u|^p terms on mesh intervals.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string_view>

namespace gnls {

// Kahan-compensated accumulator; cheap insurance when summing ~1e5 interval
// contributions of mixed magnitude.
class KahanSum {
public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

private:
  double s_ = 0.0, c_ = 0.0;
};

// 3-point Gauss-Legendre rule on [0,1]: exact for polynomials up to degree 5.
inline constexpr double kGauss3Node[3] = {
    0.1127016653792583, 0.5, 0.8872983346207417};
inline constexpr double kGauss3Weight[3] = {
    5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fb,
                                   double fm, double whole, double tol,
                                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, flm);
  double right = simpson(f, m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f on [a,b] with absolute tolerance tol.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-12,
                               int max_depth = 48) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = detail::simpson(f, a, fa, b, fb, fm);
  return detail::adaptive_simpson_rec(f, a, b, fa, fb, fm, whole, tol,
                                      max_depth);
}

// FNV-1a 64-bit hash, used to fingerprint graphs in CSV/JSON records.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 1469598103934665603ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gnls
