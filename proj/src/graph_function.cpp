#include "gnls/graph_function.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gnls/numerics.hpp"

namespace gnls {

namespace {

// |v|^p and |v|^{p-2} v with fast paths for the integer exponents that
// dominate the workloads.
struct Pow3 {
  static double pow_p(double v) { return std::abs(v) * v * v; }
  static double phi_p(double v) { return std::abs(v) * v; }
};
struct Pow4 {
  static double pow_p(double v) {
    double q = v * v;
    return q * q;
  }
  static double phi_p(double v) { return v * v * v; }
};
struct Pow5 {
  static double pow_p(double v) {
    double q = v * v;
    return q * q * std::abs(v);
  }
  static double phi_p(double v) {
    double q = v * v;
    return q * std::abs(v) * v;
  }
};
struct PowGeneric {
  double p;
  double pow_p(double v) const { return std::pow(std::abs(v), p); }
  double phi_p(double v) const {
    double a = std::abs(v);
    return a > 0.0 ? v * std::pow(a, p - 2.0) : 0.0;
  }
};

int integer_exponent(double p) {
  double r = std::round(p);
  if (std::abs(p - r) < 1e-12 && r >= 3.0 && r <= 5.0)
    return static_cast<int>(r);
  return 0;
}

template <class Pow>
double lp_impl(const GraphFunction& u, const Pow& pw) {
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  KahanSum total;
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double a = v[ia[k]], b = v[ib[k]];
    double acc = 0.0;
    for (int gqi = 0; gqi < 3; ++gqi) {
      double val = a + (b - a) * kGauss3Node[gqi];
      acc += kGauss3Weight[gqi] * pw.pow_p(val);
    }
    total.add(hs[k] * acc);
  }
  return total.value();
}

template <class Pow>
void lp_gradient_impl(const GraphFunction& u, const Pow& pw,
                      std::vector<double>& g) {
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double a = v[ia[k]], b = v[ib[k]];
    double ga = 0.0, gb = 0.0;
    for (int gqi = 0; gqi < 3; ++gqi) {
      double xi = kGauss3Node[gqi];
      double val = a + (b - a) * xi;
      double f = kGauss3Weight[gqi] * pw.phi_p(val);
      ga += f * (1.0 - xi);
      gb += f * xi;
    }
    g[ia[k]] -= hs[k] * ga;
    g[ib[k]] -= hs[k] * gb;
  }
}

}  // namespace

double mass(const GraphFunction& u) {
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  KahanSum total;
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double a = v[ia[k]], b = v[ib[k]];
    total.add(hs[k] * (a * a + a * b + b * b) / 3.0);
  }
  return total.value();
}

double lp_integral(const GraphFunction& u, double p) {
  if (!(p > 2.0 && p < 6.0))
    throw std::invalid_argument("lp_integral: p must lie in (2, 6)");
  switch (integer_exponent(p)) {
    case 3: return lp_impl(u, Pow3{});
    case 4: return lp_impl(u, Pow4{});
    case 5: return lp_impl(u, Pow5{});
    default: return lp_impl(u, PowGeneric{p});
  }
}

double dirichlet_integral(const GraphFunction& u) {
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  KahanSum total;
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double d = v[ib[k]] - v[ia[k]];
    total.add(d * d / hs[k]);
  }
  return total.value();
}

double energy(const GraphFunction& u, double p) {
  return 0.5 * dirichlet_integral(u) - lp_integral(u, p) / p;
}

std::vector<double> energy_gradient(const GraphFunction& u, double p) {
  if (!(p > 2.0 && p < 6.0))
    throw std::invalid_argument("energy_gradient: p must lie in (2, 6)");
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  std::vector<double> g(v.size(), 0.0);
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double s = (v[ia[k]] - v[ib[k]]) / hs[k];
    g[ia[k]] += s;
    g[ib[k]] -= s;
  }
  switch (integer_exponent(p)) {
    case 3: lp_gradient_impl(u, Pow3{}, g); break;
    case 4: lp_gradient_impl(u, Pow4{}, g); break;
    case 5: lp_gradient_impl(u, Pow5{}, g); break;
    default: lp_gradient_impl(u, PowGeneric{p}, g); break;
  }
  const auto& mask = mesh.dirichlet_mask();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mask[i]) g[i] = 0.0;
  return g;
}

std::vector<double> mass_gradient(const GraphFunction& u) {
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  std::vector<double> g(v.size(), 0.0);
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double a = v[ia[k]], b = v[ib[k]];
    g[ia[k]] += hs[k] * (2.0 * a + b) / 3.0;
    g[ib[k]] += hs[k] * (2.0 * b + a) / 3.0;
  }
  return g;
}

double distribution_function(const GraphFunction& u, double t) {
  if (!(t >= 0.0))
    throw std::invalid_argument("distribution_function: level must be >= 0");
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  const auto& v = u.values();
  KahanSum total;
  for (std::size_t k = 0; k < ia.size(); ++k) {
    double a = v[ia[k]], b = v[ib[k]];
    double lo = std::min(a, b), hi = std::max(a, b);
    if (lo > t)
      total.add(hs[k]);
    else if (hi > t)
      total.add(hs[k] * (hi - t) / (hi - lo));
  }
  return total.value();
}

int count_preimages(const GraphFunction& u, double t) {
  double mx = u.max_value();
  if (!(t > 0.0) || !(t < mx))
    throw std::invalid_argument(
        "count_preimages: level must lie strictly between 0 and max u");
  for (double v : u.values())
    if (v == t)
      throw std::invalid_argument(
          "count_preimages: level coincides with a nodal value; nudge it");
  const auto& mesh = u.mesh();
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& v = u.values();
  int n = 0;
  for (std::size_t k = 0; k < ia.size(); ++k)
    if ((v[ia[k]] - t) * (v[ib[k]] - t) < 0.0) ++n;
  return n;
}

namespace {

// Derivative at x of the quadratic through (x0,f0), (x1,f1), (x2,f2).
double lagrange3_deriv(double x, double x0, double f0, double x1, double f1,
                       double x2, double f2) {
  return f0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
         f1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
         f2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

}  // namespace

OptimalityResiduals optimality_residuals(const GraphFunction& u, double p) {
  const auto& mesh = u.mesh();
  const auto& g = energy_gradient(u, p);
  auto mg = mass_gradient(u);
  const auto& mask = mesh.dirichlet_mask();

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask[i]) continue;
    double q = 0.5 * mg[i];
    num += g[i] * q;
    den += q * q;
  }
  OptimalityResiduals res;
  res.lambda = den > 0.0 ? -num / den : 0.0;

  // Lumped node weights give a strong-form residual estimate per node.
  std::vector<double> w(g.size(), 0.0);
  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  for (std::size_t k = 0; k < ia.size(); ++k) {
    w[ia[k]] += 0.5 * hs[k];
    w[ib[k]] += 0.5 * hs[k];
  }
  double acc = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask[i] || w[i] <= 0.0) continue;
    double r = g[i] + res.lambda * 0.5 * mg[i];
    acc += r * r / w[i];
    wsum += w[i];
  }
  res.el_residual = wsum > 0.0 ? std::sqrt(acc / wsum) : 0.0;

  // Kirchhoff flux balance at every finite vertex, one-sided second-order
  // derivative estimates pointing into each incident edge.
  const auto& graph = mesh.graph();
  std::vector<double> flux(graph.vertices().size(), 0.0);
  for (const auto& em : mesh.edge_meshes()) {
    const Edge& ed = graph.edges()[em.edge];
    const auto& c = em.coord;
    const auto& nd = em.node;
    const auto& v = u.values();
    std::size_t n = c.size();
    double d_start, d_end;
    if (n >= 3) {
      d_start = lagrange3_deriv(c[0], c[0], v[nd[0]], c[1], v[nd[1]], c[2],
                                v[nd[2]]);
      d_end = lagrange3_deriv(c[n - 1], c[n - 3], v[nd[n - 3]], c[n - 2],
                              v[nd[n - 2]], c[n - 1], v[nd[n - 1]]);
    } else {
      d_start = d_end = (v[nd[1]] - v[nd[0]]) / (c[1] - c[0]);
    }
    std::size_t vf = *graph.vertex_index(ed.from);
    std::size_t vt = *graph.vertex_index(ed.to);
    flux[vf] += d_start;   // derivative taken away from the vertex
    flux[vt] += -d_end;
  }
  double kmax = 0.0;
  for (std::size_t vi = 0; vi < graph.vertices().size(); ++vi)
    if (!graph.vertices()[vi].at_infinity)
      kmax = std::max(kmax, std::abs(flux[vi]));
  res.kirchhoff_residual = kmax;
  return res;
}

// ---------------------------------------------------------------------------

void dump_csv(const GraphFunction& u, double p, double mu, std::ostream& out) {
  const auto& mesh = u.mesh();
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# graph=%s h=%.17g L=%.17g p=%.17g mu=%.17g energy=%.17g\n",
                graph_hash_hex(mesh.graph()).c_str(), mesh.target_h(),
                mesh.truncation(), p, mu, energy(u, p));
  out << buf << "edge_id,x,u\n";
  for (const auto& em : mesh.edge_meshes()) {
    const std::string& id = mesh.graph().edges()[em.edge].id;
    for (std::size_t j = 0; j < em.coord.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", id.c_str(),
                    em.coord[j], u.values()[em.node[j]]);
      out << buf;
    }
  }
}

CsvFunction read_csv(const MetricGraph& graph, std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("csv: missing header line");
  std::map<std::string, std::string> header;
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      auto eq = tok.find('=');
      if (eq != std::string::npos)
        header[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  for (const char* key : {"graph", "h", "L", "p", "mu"})
    if (!header.count(key))
      throw std::runtime_error(std::string("csv: header missing ") + key);
  if (header["graph"] != graph_hash_hex(graph))
    throw std::runtime_error(
        "csv: graph hash mismatch (dump belongs to a different graph)");
  double h = std::stod(header["h"]);
  double L = std::stod(header["L"]);

  if (!std::getline(in, line) || line != "edge_id,x,u")
    throw std::runtime_error("csv: missing column header 'edge_id,x,u'");

  std::map<std::string, std::vector<std::pair<double, double>>> blocks;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("csv: malformed row at line " +
                               std::to_string(lineno));
    std::string id = line.substr(0, c1);
    double x = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    double v = std::stod(line.substr(c2 + 1));
    blocks[id].emplace_back(x, v);
  }

  std::vector<std::vector<double>> coords(graph.edges().size());
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    auto it = blocks.find(graph.edges()[e].id);
    if (it == blocks.end())
      throw std::runtime_error("csv: no rows for edge " + graph.edges()[e].id);
    for (const auto& [x, v] : it->second) coords[e].push_back(x);
  }
  auto mesh = std::make_shared<TruncatedMesh>(
      TruncatedMesh::with_coordinates(graph, std::move(coords), h, L));

  CsvFunction out;
  out.u = GraphFunction(mesh);
  std::vector<char> seen(mesh->node_count(), 0);
  for (const auto& em : mesh->edge_meshes()) {
    const auto& rows = blocks[graph.edges()[em.edge].id];
    for (std::size_t j = 0; j < em.node.size(); ++j) {
      double v = rows[j].second;
      std::uint32_t n = em.node[j];
      if (seen[n] &&
          std::abs(out.u[n] - v) > 1e-9 * std::max(1.0, std::abs(v)))
        throw std::runtime_error(
            "csv: inconsistent values at a shared vertex node");
      out.u[n] = v;
      seen[n] = 1;
    }
  }
  out.p = std::stod(header["p"]);
  out.mu = std::stod(header["mu"]);
  out.energy = header.count("energy") ? std::stod(header["energy"]) : 0.0;
  return out;
}

GraphFunction resample(const GraphFunction& u, MeshPtr target) {
  const auto& src_mesh = u.mesh();
  GraphFunction out(target);
  for (const auto& em : target->edge_meshes()) {
    const std::string& id = target->graph().edges()[em.edge].id;
    // Locate the matching source edge mesh.
    const EdgeMesh* src = nullptr;
    for (const auto& sem : src_mesh.edge_meshes())
      if (src_mesh.graph().edges()[sem.edge].id == id) {
        src = &sem;
        break;
      }
    if (!src)
      throw std::invalid_argument("resample: target edge " + id +
                                  " missing from source graph");
    std::size_t src_index = static_cast<std::size_t>(src - src_mesh.edge_meshes().data());
    for (std::size_t j = 0; j < em.coord.size(); ++j)
      out[em.node[j]] = u.eval_on_edge(src_index, em.coord[j]);
  }
  out.zero_dirichlet();
  return out;
}

}  // namespace gnls
