#pragma once

// The one-parameter soliton family on the real line for the focusing
// subcritical NLS energy  E(u) = 1/2 ||u'||_2^2 - 1/p ||u||_p^p,  2 < p < 6.
// The unit-mass profile is phi_1(x) = A sech(B x)^r with r = 2/(p-2); general
// mass follows the two-exponent rescaling phi_m = m^alpha phi_1(m^beta x).

#include <functional>

namespace gnls {

struct SolitonParams {
  double p;
  double alpha;        // amplitude exponent 2/(6-p)
  double beta;         // length exponent (p-2)/(6-p)
  double r;            // sech power alpha/beta = 2/(p-2)
  double amplitude;    // A, fixes unit L2 mass
  double width;        // B, inverse length scale of phi_1
  double lambda_unit;  // Lagrange multiplier of phi_1:  phi'' + phi^{p-1} = lambda phi
  double unit_energy;  // E(phi_1, R)
  double sech_moment;  // integral of sech^{2r} over R
};

// Throws std::invalid_argument unless 2 < p < 6.
SolitonParams soliton_params(double p);

double soliton_value(const SolitonParams& sp, double mass, double x);
double soliton_derivative(const SolitonParams& sp, double mass, double x);

// E(phi_mass, R) = mass^{(p+2)/(6-p)} E(phi_1, R).
double soliton_energy(const SolitonParams& sp, double mass);

// Multiplier of phi_mass: lambda_unit * mass^{2 beta}.
double soliton_lambda(const SolitonParams& sp, double mass);

// Tail mass  integral_x^inf phi_mass(s)^2 ds  (exact for integer r, adaptive
// quadrature otherwise).
double soliton_tail_mass(const SolitonParams& sp, double mass, double x);

// integral_w^inf sech^{2r}(s) ds, valid for any real w.
double sech_power_tail(double r, double w);
// integral over all of R: sqrt(pi) Gamma(r) / Gamma(r + 1/2).
double sech_power_integral(double r);

// ---------------------------------------------------------------------------
// Double-shooting problem on a half-line: find the soliton mass M and shift y
// such that  v(x) = phi_M(y + x)  satisfies  v(0) = a  and has half-line mass
// integral_0^inf v^2 = m/2.  Unique solution for every a, m > 0; reduces to a
// scalar strictly-decreasing root-finding problem in z = M^beta y.
struct HalfLineSolution {
  double a = 0.0;   // prescribed boundary value v(0)
  double m = 0.0;   // total mass budget (half of it sits on the half-line)
  double M = 0.0;   // recovered soliton mass, M > 0
  double y = 0.0;   // shift; y > 0 exactly when a > phi_m(0)
  double z = 0.0;   // scaled shift M^beta y used by the scalar solve
  double residual_value = 0.0;  // |phi_M(y) - a|
  double residual_mass = 0.0;   // |integral_0^inf phi_M(y+x)^2 dx - m/2|
};

HalfLineSolution solve_half_line(const SolitonParams& sp, double a, double m);

// ---------------------------------------------------------------------------
// All positive half-line-symmetric solutions of the line problem with a
// prescribed central value a and mass m:
//   a < phi_m(0): two mirror translates of phi_m touching value a at x = 0;
//   a = phi_m(0): the centred soliton itself;
//   a > phi_m(0): the matched truncated profile x -> phi_M(|x| + y), M > m.
struct LineProblemSolution {
  enum class Kind { TwoTranslates, Centered, Truncated };
  Kind kind = Kind::Centered;
  double y = 0.0;             // shift (positive in all non-centred cases)
  double soliton_mass = 0.0;  // m for the first two cases, M for the third
  std::function<double(double)> evaluate;  // one representative solution
};

// Relative tie tolerance 1e-10 on |a - phi_m(0)| selects the centred case.
LineProblemSolution classify_line_problem(const SolitonParams& sp, double a,
                                          double m);

}  // namespace gnls
