#include "gnls/soliton.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gnls/numerics.hpp"

namespace gnls {

namespace {

constexpr double kPi = 3.14159265358979323846;

double log_cosh(double x) {
  double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

double sech(double x) { return 1.0 / std::cosh(x); }

bool near_integer(double x, long& n) {
  double r = std::round(x);
  if (std::abs(x - r) < 1e-12) {
    n = static_cast<long>(r);
    return true;
  }
  return false;
}

}  // namespace

double sech_power_integral(double r) {
  return std::sqrt(kPi) * std::tgamma(r) / std::tgamma(r + 0.5);
}

double sech_power_tail(double r, double w) {
  long n2r;
  if (near_integer(2.0 * r, n2r) && n2r >= 2) {
    // Even power: the antiderivative S_n obeys
    //   S_2 = tanh,  S_n = sech^{n-2} tanh / (n-1) + (n-2)/(n-1) S_{n-2},
    // and the full-line integral halves at w = 0 by oddness of S_n.
    if (n2r % 2 == 0) {
      double s = std::tanh(w);
      double sech2 = sech(w) * sech(w);
      double sechpow = 1.0;  // sech^{n-2} accumulated below
      double S = s;          // S_2
      for (long n = 4; n <= n2r; n += 2) {
        sechpow *= sech2;
        S = sechpow * s / (n - 1) + (double(n - 2) / (n - 1)) * S;
      }
      return 0.5 * sech_power_integral(r) - S;
    }
  }
  // General exponent: substitute t = tanh(s), then t = sin(theta):
  //   integral_w^inf sech^{2r} = integral_{atan(sinh w)}^{pi/2} cos^{2r-1}.
  double theta0 = std::atan(std::sinh(w));
  double q = 2.0 * r - 1.0;  // > 0 for p < 6
  return adaptive_simpson(
      [q](double th) { return std::pow(std::cos(th), q); }, theta0, 0.5 * kPi,
      1e-15);
}

SolitonParams soliton_params(double p) {
  if (!(p > 2.0 && p < 6.0))
    throw std::invalid_argument("soliton_params: p must lie in (2, 6), got " +
                                std::to_string(p));
  SolitonParams sp;
  sp.p = p;
  sp.alpha = 2.0 / (6.0 - p);
  sp.beta = (p - 2.0) / (6.0 - p);
  sp.r = 2.0 / (p - 2.0);
  double I = sech_power_integral(sp.r);
  sp.sech_moment = I;
  // Unit mass fixes A through  A^2 I / B = 1  with  B = A^2 I, and the ODE
  // phi'' + phi^{p-1} = lambda phi pins  A^{p-2} = r(r+1) B^2.
  sp.amplitude = std::pow(sp.r * (sp.r + 1.0) * I * I, -1.0 / (6.0 - p));
  sp.width = sp.amplitude * sp.amplitude * I;
  sp.lambda_unit = sp.r * sp.r * sp.width * sp.width;
  double I2 = I * (2.0 * sp.r) / (2.0 * sp.r + 1.0);  // integral of sech^{2r+2}
  sp.unit_energy =
      0.5 * sp.amplitude * sp.amplitude * sp.r * sp.r * sp.width * (I - I2) -
      std::pow(sp.amplitude, p) * I2 / (p * sp.width);
  return sp;
}

double soliton_value(const SolitonParams& sp, double mass, double x) {
  double t = sp.width * std::pow(mass, sp.beta) * x;
  return std::pow(mass, sp.alpha) * sp.amplitude *
         std::pow(sech(t), sp.r);
}

double soliton_derivative(const SolitonParams& sp, double mass, double x) {
  double t = sp.width * std::pow(mass, sp.beta) * x;
  return -std::pow(mass, sp.alpha + sp.beta) * sp.amplitude * sp.r * sp.width *
         std::pow(sech(t), sp.r) * std::tanh(t);
}

double soliton_energy(const SolitonParams& sp, double mass) {
  return std::pow(mass, (sp.p + 2.0) / (6.0 - sp.p)) * sp.unit_energy;
}

double soliton_lambda(const SolitonParams& sp, double mass) {
  return std::pow(mass, 2.0 * sp.beta) * sp.lambda_unit;
}

double soliton_tail_mass(const SolitonParams& sp, double mass, double x) {
  // integral_x^inf phi_mass^2 = mass * (A^2 / B) * T(B mass^beta x) using
  // 2 alpha - beta = 1.
  double w = sp.width * std::pow(mass, sp.beta) * x;
  return mass * sp.amplitude * sp.amplitude / sp.width *
         sech_power_tail(sp.r, w);
}

// ---------------------------------------------------------------------------

namespace {

// log of  g(z) = phi_1(z)^{-1/alpha} integral_0^inf phi_1(z+t)^2 dt,
// strictly decreasing from +inf to 0.
double g_log(const SolitonParams& sp, double z) {
  double log_phi =
      std::log(sp.amplitude) - sp.r * log_cosh(sp.width * z);
  double tail = sp.amplitude * sp.amplitude / sp.width *
                sech_power_tail(sp.r, sp.width * z);
  double log_tail = tail > 0.0 ? std::log(tail) : -800.0;
  return -log_phi / sp.alpha + log_tail;
}

}  // namespace

HalfLineSolution solve_half_line(const SolitonParams& sp, double a, double m) {
  if (!(a > 0.0) || !(m > 0.0))
    throw std::invalid_argument(
        "solve_half_line: boundary value and mass must be positive");

  double target = std::log(0.5 * m) - std::log(a) / sp.alpha;

  double lo = -1.0;
  while (g_log(sp, lo) <= target) {
    lo *= 2.0;
    if (lo < -1e9)
      throw std::runtime_error("solve_half_line: bracket expansion failed");
  }
  double hi = 1.0;
  while (g_log(sp, hi) >= target) {
    hi *= 2.0;
    if (hi > 1e9)
      throw std::runtime_error("solve_half_line: bracket expansion failed");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    (g_log(sp, mid) > target ? lo : hi) = mid;
  }
  double z = 0.5 * (lo + hi);

  HalfLineSolution sol;
  sol.a = a;
  sol.m = m;
  sol.z = z;
  double log_phi_z =
      std::log(sp.amplitude) - sp.r * log_cosh(sp.width * z);
  sol.M = std::exp((std::log(a) - log_phi_z) / sp.alpha);
  sol.y = z * std::pow(sol.M, -sp.beta);
  sol.residual_value = std::abs(soliton_value(sp, sol.M, sol.y) - a);
  sol.residual_mass =
      std::abs(soliton_tail_mass(sp, sol.M, sol.y) - 0.5 * m);
  if (sol.residual_value > 1e-8 || sol.residual_mass > 1e-8)
    throw std::runtime_error(
        "solve_half_line: residuals exceed tolerance (value " +
        std::to_string(sol.residual_value) + ", mass " +
        std::to_string(sol.residual_mass) + ")");
  return sol;
}

LineProblemSolution classify_line_problem(const SolitonParams& sp, double a,
                                          double m) {
  if (!(a > 0.0) || !(m > 0.0))
    throw std::invalid_argument(
        "classify_line_problem: value and mass must be positive");
  double peak = soliton_value(sp, m, 0.0);
  LineProblemSolution out;
  if (std::abs(a - peak) <= 1e-10 * peak) {
    out.kind = LineProblemSolution::Kind::Centered;
    out.y = 0.0;
    out.soliton_mass = m;
    out.evaluate = [sp, m](double x) { return soliton_value(sp, m, x); };
    return out;
  }
  if (a < peak) {
    // phi_m(y) = a  =>  sech(B m^beta y) = (a / peak)^{1/r}.
    double s = std::pow(a / peak, 1.0 / sp.r);
    double y = std::acosh(1.0 / s) / (sp.width * std::pow(m, sp.beta));
    out.kind = LineProblemSolution::Kind::TwoTranslates;
    out.y = y;
    out.soliton_mass = m;
    // One of the two mirror solutions; the other is x -> phi_m(x + y).
    out.evaluate = [sp, m, y](double x) {
      return soliton_value(sp, m, x - y);
    };
    return out;
  }
  HalfLineSolution hl = solve_half_line(sp, a, m);
  out.kind = LineProblemSolution::Kind::Truncated;
  out.y = hl.y;
  out.soliton_mass = hl.M;
  double M = hl.M, y = hl.y;
  out.evaluate = [sp, M, y](double x) {
    return soliton_value(sp, M, std::abs(x) + y);
  };
  return out;
}

}  // namespace gnls
