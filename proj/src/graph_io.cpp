#include "gnls/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gnls {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw GraphParseError(where + ": " + what);
}

std::string need_string(const json& obj, const char* key,
                        const std::string& where) {
  if (!obj.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  if (!obj[key].is_string())
    fail(where, std::string("\"") + key + "\" must be a string");
  return obj[key].get<std::string>();
}

}  // namespace

MetricGraph parse_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphParseError(std::string("JSON error at byte ") +
                          std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) fail("top level", "expected an object");
  if (!doc.contains("vertices") || !doc["vertices"].is_array())
    fail("top level", "missing \"vertices\" array");
  if (!doc.contains("edges") || !doc["edges"].is_array())
    fail("top level", "missing \"edges\" array");

  std::vector<Vertex> vertices;
  std::size_t i = 0;
  for (const auto& jv : doc["vertices"]) {
    std::string where = "vertices[" + std::to_string(i++) + "]";
    if (!jv.is_object()) fail(where, "expected an object");
    Vertex v;
    v.id = need_string(jv, "id", where);
    if (jv.contains("infinity")) {
      if (!jv["infinity"].is_boolean())
        fail(where, "\"infinity\" must be a boolean");
      v.at_infinity = jv["infinity"].get<bool>();
    }
    vertices.push_back(std::move(v));
  }

  std::vector<Edge> edges;
  i = 0;
  for (const auto& je : doc["edges"]) {
    std::string where = "edges[" + std::to_string(i++) + "]";
    if (!je.is_object()) fail(where, "expected an object");
    Edge e;
    e.id = need_string(je, "id", where);
    e.from = need_string(je, "from", where);
    e.to = need_string(je, "to", where);
    if (!je.contains("length")) fail(where, "missing \"length\"");
    const auto& jl = je["length"];
    if (jl.is_string()) {
      if (jl.get<std::string>() != "inf")
        fail(where, "\"length\" string form must be \"inf\"");
      e.length = kInfiniteLength;
    } else if (jl.is_number()) {
      e.length = jl.get<double>();
      if (!(e.length > 0.0))
        fail(where, "\"length\" must be positive");
    } else {
      fail(where, "\"length\" must be a positive number or \"inf\"");
    }
    edges.push_back(std::move(e));
  }

  return MetricGraph(std::move(vertices), std::move(edges));
}

MetricGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphParseError("cannot open graph file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

std::string serialize_graph(const MetricGraph& graph) {
  json doc;
  doc["vertices"] = json::array();
  for (const auto& v : graph.vertices())
    doc["vertices"].push_back({{"id", v.id}, {"infinity", v.at_infinity}});
  doc["edges"] = json::array();
  for (const auto& e : graph.edges()) {
    json je = {{"id", e.id}, {"from", e.from}, {"to", e.to}};
    if (e.is_half_line())
      je["length"] = "inf";
    else
      je["length"] = e.length;
    doc["edges"].push_back(std::move(je));
  }
  return doc.dump(2) + "\n";
}

void save_graph(const MetricGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphParseError("cannot write graph file: " + path);
  out << serialize_graph(graph);
}

}  // namespace gnls
