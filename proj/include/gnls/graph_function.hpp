#pragma once

// Functionals and calculus for nodal functions on truncated graph meshes:
// exact mass and Dirichlet integrals, Gauss quadrature of |u|^p, the nodal
// energy gradient, superlevel-set geometry, and Euler-Lagrange / Kirchhoff
// residual diagnostics.

#include <iosfwd>
#include <string>

#include "gnls/mesh.hpp"

namespace gnls {

// integral of u^2 (exact for piecewise linear u).
double mass(const GraphFunction& u);

// integral of |u|^p via a 3-point Gauss rule per mesh interval (exact when u
// is linear and p = 4).
double lp_integral(const GraphFunction& u, double p);

// integral of |u'|^2 (exact).
double dirichlet_integral(const GraphFunction& u);

// E(u) = 1/2 integral |u'|^2 - 1/p integral |u|^p.
double energy(const GraphFunction& u, double p);

// Nodal gradient of the discrete energy (entries at Dirichlet nodes are
// zeroed).  Consistent with `energy` to machine precision: it is the exact
// derivative of the quadrature-discretized functional.
std::vector<double> energy_gradient(const GraphFunction& u, double p);

// Derivative of mass: entries integral 2 u phi_i (consistent mass action).
std::vector<double> mass_gradient(const GraphFunction& u);

// Exact measure of the superlevel set {u > t}, t >= 0.  Right-continuous
// in t; plateaus sitting exactly at level t contribute nothing.
double distribution_function(const GraphFunction& u, double t);

// Number of transversal crossings of level t.  Pre: 0 < t < max u and t is
// not a nodal value (throws std::invalid_argument otherwise so the caller
// can nudge t).
int count_preimages(const GraphFunction& u, double t);

struct OptimalityResiduals {
  double lambda = 0.0;       // least-squares multiplier fit
  double el_residual = 0.0;  // RMS strong-form residual of u'' + |u|^{p-2}u = lambda u
  double kirchhoff_residual = 0.0;  // max over finite vertices of the
                                    // one-sided derivative sum (2nd order)
};

OptimalityResiduals optimality_residuals(const GraphFunction& u, double p);

// CSV dump: header records the graph hash, h, L, p, mu and energy, then one
// block of (edge_id, x, u) rows per edge.
void dump_csv(const GraphFunction& u, double p, double mu, std::ostream& out);

struct CsvFunction {
  GraphFunction u;
  double p = 0.0, mu = 0.0, energy = 0.0;
};

// Rebuilds the mesh (possibly non-uniform) recorded in a dump.  The graph
// must match the hash in the header.
CsvFunction read_csv(const MetricGraph& graph, std::istream& in);

// P1 re-interpolation onto another mesh over the same graph (matched by edge
// ids; coordinates beyond the source extent clamp to the boundary value).
GraphFunction resample(const GraphFunction& u, MeshPtr target);

}  // namespace gnls
