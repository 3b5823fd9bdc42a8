#pragma once

// Metric graphs: connected multigraphs whose edges are intervals [0, len] or
// half-lines [0, inf). Half-lines carry an infinite length and end in a
// degree-one "vertex at infinity". Parallel edges and self-loops are
// first-class citizens.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnls {

inline constexpr double kInfiniteLength =
    std::numeric_limits<double>::infinity();

struct Vertex {
  std::string id;
  bool at_infinity = false;
};

struct Edge {
  std::string id;
  std::string from;  // endpoint at coordinate 0
  std::string to;    // endpoint at coordinate length (infinity end if any)
  double length = 0.0;

  bool is_half_line() const { return std::isinf(length); }
  bool is_loop() const { return from == to; }
};

class MetricGraph {
public:
  MetricGraph() = default;
  MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::optional<std::size_t> vertex_index(std::string_view id) const;
  std::optional<std::size_t> edge_index(std::string_view id) const;

  // Degree counts every incidence; a self-loop contributes 2.
  std::size_t degree(std::size_t vertex) const;
  // Indices of edges incident to the vertex (self-loops listed once).
  const std::vector<std::size_t>& incident_edges(std::size_t vertex) const;

  std::size_t infinity_vertex_count() const;
  bool is_connected() const;

private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incidence_;  // vertex -> edge indices
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Rule {
    DuplicateVertexId,
    DuplicateEdgeId,
    UnknownEndpoint,
    NonPositiveLength,
    HalfLineEndpoints,   // a half-line must end (at its far coordinate) in a
                         // vertex at infinity and start at a finite vertex
    InfinityVertexDegree,  // vertices at infinity have degree exactly one
    InfinityVertexOnFiniteEdge,
    LoopAtInfinity,
    NotConnected,
    Empty,
  };
  Rule rule;
  std::string subject;  // offending vertex/edge id (may be empty)
  std::string message;
};

std::string_view rule_name(Violation::Rule rule);

// Structural checks; empty result means the graph is a valid metric graph.
std::vector<Violation> validate(const MetricGraph& graph);

// Throws std::invalid_argument listing all violations.
void require_valid(const MetricGraph& graph);

// ---------------------------------------------------------------------------
// Topology

// Sum of finite edge lengths; +infinity as soon as a half-line is present.
double total_length(const MetricGraph& graph);

// Edge ids whose removal disconnects the graph (bridges). Self-loops and
// members of parallel bundles are never cut edges. Linear-time lowpoint DFS.
std::vector<std::string> cut_edges(const MetricGraph& graph);

// "After removing any edge, every connected component of what remains still
// contains a vertex at infinity." Only cut edges can break this.
struct ConditionHResult {
  bool satisfied = false;
  bool compact = false;             // no vertices at infinity at all
  std::string witness_edge;         // cut edge whose removal traps a component
  std::vector<std::string> infinity_free_component;  // vertex ids of that part
};

ConditionHResult check_condition_h(const MetricGraph& graph);

// ---------------------------------------------------------------------------
// Recognition of the exactly-solvable family: the real line, the tadpole
// (loop plus two half-lines) and towers of parallel-edge "bubbles" topped by
// a loop. These are precisely the graphs isometric to the line under the
// gluing x ~ -x at a finite set of points 0 < a_1 < ... < a_n.

struct EdgeIsometry {
  std::string edge_id;
  // A point at edge-coordinate t maps to line position |offset + sign * t|.
  double offset_at_from = 0.0;
  int sign = 1;
};

struct LineIsometryResult {
  enum class Family { None, Line, SingleBubble, BubbleTower };
  Family family = Family::None;
  std::vector<double> glue_points;      // a_1 < ... < a_n (empty for Line)
  std::vector<EdgeIsometry> isometry;   // empty when family == None
};

LineIsometryResult recognize_line_isometry(const MetricGraph& graph);

// ---------------------------------------------------------------------------

// Stable fingerprint of the graph structure (ids, topology, lengths).
std::uint64_t graph_hash(const MetricGraph& graph);
std::string graph_hash_hex(const MetricGraph& graph);

}  // namespace gnls
