#include "gnls/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gnls {

namespace {

void check_mesh_args(double h, double L) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh: h must be positive");
  if (!(L > 0.0))
    throw std::invalid_argument("mesh: truncation length must be positive");
}

}  // namespace

TruncatedMesh TruncatedMesh::uniform(MetricGraph graph, double h, double L) {
  check_mesh_args(h, L);
  require_valid(graph);
  TruncatedMesh mesh;
  mesh.graph_ = std::move(graph);
  mesh.h_ = h;
  mesh.L_ = L;
  const auto& g = mesh.graph_;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    EdgeMesh em;
    em.edge = e;
    em.clipped = g.edges()[e].is_half_line();
    em.length = em.clipped ? L : g.edges()[e].length;
    std::size_t n = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(em.length / h - 1e-9)));
    em.coord.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
      em.coord[j] = em.length * double(j) / double(n);
    mesh.edges_.push_back(std::move(em));
  }
  mesh.finalize();
  return mesh;
}

TruncatedMesh TruncatedMesh::with_coordinates(
    MetricGraph graph, std::vector<std::vector<double>> coords, double h,
    double L) {
  check_mesh_args(h, L);
  require_valid(graph);
  if (coords.size() != graph.edges().size())
    throw std::invalid_argument(
        "mesh: need one coordinate list per edge");
  TruncatedMesh mesh;
  mesh.graph_ = std::move(graph);
  mesh.h_ = h;
  mesh.L_ = L;
  const auto& g = mesh.graph_;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    EdgeMesh em;
    em.edge = e;
    em.clipped = g.edges()[e].is_half_line();
    em.coord = std::move(coords[e]);
    if (em.coord.size() < 2)
      throw std::invalid_argument("mesh: edge " + g.edges()[e].id +
                                  " needs at least two nodes");
    if (em.coord.front() != 0.0)
      throw std::invalid_argument("mesh: edge " + g.edges()[e].id +
                                  " coordinates must start at 0");
    for (std::size_t j = 1; j < em.coord.size(); ++j)
      if (!(em.coord[j] > em.coord[j - 1]))
        throw std::invalid_argument("mesh: edge " + g.edges()[e].id +
                                    " coordinates must be strictly increasing");
    em.length = em.coord.back();
    if (!em.clipped &&
        std::abs(em.length - g.edges()[e].length) >
            1e-9 * std::max(1.0, g.edges()[e].length))
      throw std::invalid_argument("mesh: edge " + g.edges()[e].id +
                                  " coordinates must end at the edge length");
    mesh.edges_.push_back(std::move(em));
  }
  mesh.finalize();
  return mesh;
}

void TruncatedMesh::finalize() {
  const auto& g = graph_;
  std::size_t nv = g.vertices().size();
  vertex_node_.resize(nv);
  for (std::size_t v = 0; v < nv; ++v)
    vertex_node_[v] = static_cast<std::uint32_t>(v);
  std::uint32_t next = static_cast<std::uint32_t>(nv);

  for (auto& em : edges_) {
    const Edge& ed = g.edges()[em.edge];
    std::uint32_t n_from = vertex_node_[*g.vertex_index(ed.from)];
    std::uint32_t n_to = vertex_node_[*g.vertex_index(ed.to)];
    em.node.resize(em.coord.size());
    em.node.front() = n_from;
    em.node.back() = n_to;
    for (std::size_t j = 1; j + 1 < em.node.size(); ++j) em.node[j] = next++;
  }
  node_count_ = next;

  dirichlet_.assign(node_count_, 0);
  for (std::size_t v = 0; v < nv; ++v)
    if (g.vertices()[v].at_infinity) dirichlet_[vertex_node_[v]] = 1;

  measure_ = 0.0;
  for (const auto& em : edges_) {
    measure_ += em.length;
    for (std::size_t j = 0; j + 1 < em.node.size(); ++j) {
      iv_a_.push_back(em.node[j]);
      iv_b_.push_back(em.node[j + 1]);
      iv_h_.push_back(em.coord[j + 1] - em.coord[j]);
    }
  }
}

double GraphFunction::max_value() const {
  double m = values_.empty() ? 0.0 : values_[0];
  for (double v : values_) m = std::max(m, v);
  return m;
}

double GraphFunction::min_value() const {
  double m = values_.empty() ? 0.0 : values_[0];
  for (double v : values_) m = std::min(m, v);
  return m;
}

double GraphFunction::eval_on_edge(std::size_t k, double x) const {
  const EdgeMesh& em = mesh_->edge_meshes()[k];
  if (x <= em.coord.front()) return values_[em.node.front()];
  if (x >= em.coord.back()) return values_[em.node.back()];
  auto it = std::upper_bound(em.coord.begin(), em.coord.end(), x);
  std::size_t j = static_cast<std::size_t>(it - em.coord.begin());
  double x0 = em.coord[j - 1], x1 = em.coord[j];
  double v0 = values_[em.node[j - 1]], v1 = values_[em.node[j]];
  return v0 + (v1 - v0) * (x - x0) / (x1 - x0);
}

}  // namespace gnls
