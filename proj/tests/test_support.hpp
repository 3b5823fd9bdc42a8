#pragma once
// Shared helpers for the test suites: deterministic random multigraphs, a
// brute-force edge-removal oracle for the escape condition, and soliton
// sampling onto the two-half-line graph.

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gnls/graph_function.hpp"
#include "gnls/mesh.hpp"
#include "gnls/metric_graph.hpp"
#include "gnls/soliton.hpp"

namespace gnls_test {

inline gnls::MeshPtr make_mesh(const gnls::MetricGraph& g, double h,
                               double L) {
  return std::make_shared<gnls::TruncatedMesh>(
      gnls::TruncatedMesh::uniform(g, h, L));
}

// On the `line` builtin both edges are half-lines rooted at the centre, so
// the edge coordinate is the graph distance.
inline gnls::GraphFunction sample_line_soliton(gnls::MeshPtr mesh, double p,
                                               double mu) {
  gnls::SolitonParams sp = gnls::soliton_params(p);
  gnls::GraphFunction u(std::move(mesh));
  for (const gnls::EdgeMesh& em : u.mesh().edge_meshes())
    for (std::size_t j = 0; j < em.coord.size(); ++j)
      u[em.node[j]] = gnls::soliton_value(sp, mu, em.coord[j]);
  u.zero_dirichlet();
  return u;
}

// Random connected multigraph with at most 8 edges: a spanning tree over
// 1..5 finite vertices, optional extra loops / parallels, and 0..3
// half-lines. Always passes validate() by construction.
inline gnls::MetricGraph random_graph(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nfin(1, 5);
  std::uniform_real_distribution<double> len(0.5, 2.0);
  int nv = nfin(rng);
  std::vector<gnls::Vertex> vs;
  for (int i = 0; i < nv; ++i)
    vs.push_back({"v" + std::to_string(i), false});
  std::vector<gnls::Edge> es;
  int eid = 0;
  auto bounded = [&](const std::string& a, const std::string& b) {
    es.push_back({"e" + std::to_string(eid++), a, b, len(rng)});
  };
  for (int i = 1; i < nv; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    bounded(vs[pick(rng)].id, vs[i].id);
  }
  std::uniform_int_distribution<int> anyv(0, nv - 1);
  int budget = 8 - static_cast<int>(es.size());
  int halves = std::uniform_int_distribution<int>(0, std::min(3, budget))(rng);
  budget -= halves;
  if (budget > 0) {
    int extra = std::uniform_int_distribution<int>(0, budget)(rng);
    for (int k = 0; k < extra; ++k)
      bounded(vs[anyv(rng)].id, vs[anyv(rng)].id);
  }
  for (int k = 0; k < halves; ++k) {
    std::string w = "w" + std::to_string(k);
    std::string base = vs[anyv(rng)].id;
    vs.push_back({w, true});
    es.push_back({"h" + std::to_string(k), base, w, gnls::kInfiniteLength});
  }
  if (es.empty()) bounded(vs[0].id, vs[0].id);
  return gnls::MetricGraph(std::move(vs), std::move(es));
}

// Connected components of the vertex set after dropping one edge.
inline std::vector<std::vector<std::size_t>> components_without_edge(
    const gnls::MetricGraph& g, std::size_t skip) {
  std::size_t n = g.vertices().size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    if (e == skip) continue;
    std::size_t a = find(*g.vertex_index(g.edges()[e].from));
    std::size_t b = find(*g.vertex_index(g.edges()[e].to));
    parent[a] = b;
  }
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t r = find(v);
    if (slot[r] == n) {
      slot[r] = comps.size();
      comps.emplace_back();
    }
    comps[slot[r]].push_back(v);
  }
  return comps;
}

// Definition-level check: after removing any single edge, every component
// keeps a vertex at infinity. Compact graphs fail by convention.
inline bool oracle_condition_h(const gnls::MetricGraph& g) {
  bool any_inf = false;
  for (const auto& v : g.vertices()) any_inf = any_inf || v.at_infinity;
  if (!any_inf) return false;
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    for (const auto& comp : components_without_edge(g, e)) {
      bool has_inf = false;
      for (std::size_t v : comp) has_inf |= g.vertices()[v].at_infinity;
      if (!has_inf) return false;
    }
  return true;
}

}  // namespace gnls_test
