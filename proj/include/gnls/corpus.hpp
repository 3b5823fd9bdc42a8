#pragma once
// Built-in example graphs: the exactly-solvable line/tadpole/bubble-tower
// family, the double-bridge and pendant graphs, and a larger showcase graph
// with five half-lines.  Used by tests, experiments and the CLI.

#include <string>
#include <vector>

#include "gnls/metric_graph.hpp"

namespace gnls {

// Two half-lines glued at a single vertex.
MetricGraph make_line();

// Self-loop of the given length plus two half-lines at its base vertex.
MetricGraph make_tadpole(double loop_length = 2.0);

// Chain of equal-length parallel pairs between consecutive glue points,
// topped by a self-loop of length 2*a_1, with two half-lines at the bottom
// junction.  glue_points must be strictly increasing and positive; a single
// glue point degenerates to the tadpole.
MetricGraph make_bubble_tower(const std::vector<double>& glue_points);

// Two vertices joined by two parallel edges, one half-line at each vertex.
MetricGraph make_double_bridge(double bridge_a = 1.0, double bridge_b = 1.0);

// Two half-lines plus a bounded pendant edge hanging off their junction.
MetricGraph make_pendant(double pendant_length = 1.0);

// Five half-lines and thirteen bounded edges (one a self-loop), richly
// cyclic so that no cut edge isolates a bounded piece.
MetricGraph make_showcase();

struct CorpusEntry {
  std::string name;
  std::string note;
  MetricGraph graph;
};

// Validated builtins, stable order.
const std::vector<CorpusEntry>& builtin_corpus();

// Builtin graph by corpus name; throws std::invalid_argument for unknown
// names.
MetricGraph builtin_graph(const std::string& name);

}  // namespace gnls
