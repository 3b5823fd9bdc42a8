#pragma once

// P1 finite-element meshes on metric graphs.  Half-lines are clipped to a
// finite window [0, L]; the clipped far endpoint becomes a homogeneous
// Dirichlet node.  Vertex nodes are shared between incident edges so nodal
// functions are automatically continuous across the graph.

#include <cstdint>
#include <memory>
#include <vector>

#include "gnls/metric_graph.hpp"

namespace gnls {

struct EdgeMesh {
  std::size_t edge = 0;       // index into graph().edges()
  double length = 0.0;        // meshed length (edge length, or L if clipped)
  bool clipped = false;       // true for truncated half-lines
  std::vector<double> coord;  // ascending node coordinates, 0 .. length
  std::vector<std::uint32_t> node;  // global node ids, parallel to coord
};

class TruncatedMesh {
public:
  // Uniform spacing <= h on every edge (at least two intervals per edge).
  static TruncatedMesh uniform(MetricGraph graph, double h, double L);

  // Explicit node coordinates per edge (each list ascending, starting at 0
  // and ending at the meshed length).  Used to place nodes exactly at profile
  // breakpoints, e.g. by the rearrangement operators.
  static TruncatedMesh with_coordinates(
      MetricGraph graph, std::vector<std::vector<double>> coords, double h,
      double L);

  const MetricGraph& graph() const { return graph_; }
  double target_h() const { return h_; }
  double truncation() const { return L_; }

  std::size_t node_count() const { return node_count_; }
  const std::vector<EdgeMesh>& edge_meshes() const { return edges_; }
  std::uint32_t vertex_node(std::size_t vertex_index) const {
    return vertex_node_[vertex_index];
  }
  bool is_dirichlet(std::uint32_t node) const { return dirichlet_[node]; }
  const std::vector<char>& dirichlet_mask() const { return dirichlet_; }

  // Flattened interval arrays for tight numerical loops.
  const std::vector<std::uint32_t>& interval_a() const { return iv_a_; }
  const std::vector<std::uint32_t>& interval_b() const { return iv_b_; }
  const std::vector<double>& interval_h() const { return iv_h_; }

  // Total meshed length (finite edges plus clipped half-line windows).
  double domain_measure() const { return measure_; }

private:
  TruncatedMesh() = default;
  void finalize();

  MetricGraph graph_;
  double h_ = 0.0, L_ = 0.0;
  std::vector<EdgeMesh> edges_;
  std::vector<std::uint32_t> vertex_node_;
  std::vector<char> dirichlet_;
  std::size_t node_count_ = 0;
  std::vector<std::uint32_t> iv_a_, iv_b_;
  std::vector<double> iv_h_;
  double measure_ = 0.0;
};

using MeshPtr = std::shared_ptr<const TruncatedMesh>;

// Nodal (piecewise linear) function on a mesh.  Dirichlet nodes stay at zero.
class GraphFunction {
public:
  GraphFunction() = default;
  explicit GraphFunction(MeshPtr mesh)
      : mesh_(std::move(mesh)), values_(mesh_->node_count(), 0.0) {}

  const TruncatedMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](std::uint32_t i) { return values_[i]; }
  double operator[](std::uint32_t i) const { return values_[i]; }

  // Value at local node j of edge-mesh k.
  double at(std::size_t k, std::size_t j) const {
    return values_[mesh_->edge_meshes()[k].node[j]];
  }

  void zero_dirichlet() {
    const auto& mask = mesh_->dirichlet_mask();
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (mask[i]) values_[i] = 0.0;
  }

  double max_value() const;
  double min_value() const;

  // Piecewise-linear evaluation along one edge (binary search on coords).
  double eval_on_edge(std::size_t k, double x) const;

private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

}  // namespace gnls
