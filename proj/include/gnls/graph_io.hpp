#pragma once

// JSON graph files.  Schema:
//   {
//     "vertices": [ {"id": "v1", "infinity": false}, ... ],
//     "edges":    [ {"id": "e1", "from": "v1", "to": "v2",
//                    "length": 1.5 | "inf"}, ... ]
//   }
// "infinity" defaults to false.  Half-lines use "length": "inf" and must end
// (in their "to" slot) at a vertex with "infinity": true.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "gnls/metric_graph.hpp"

namespace gnls {

struct GraphParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse a graph from JSON text; throws GraphParseError with the byte offset
// (for malformed JSON) or the offending element path (for schema errors).
MetricGraph parse_graph(const std::string& text);
MetricGraph load_graph(const std::string& path);

std::string serialize_graph(const MetricGraph& graph);
void save_graph(const MetricGraph& graph, const std::string& path);

}  // namespace gnls
