#include "gnls/corpus.hpp"

#include <stdexcept>
#include <utility>

namespace gnls {

namespace {

Vertex fin(std::string id) { return Vertex{std::move(id), false}; }
Vertex inf_v(std::string id) { return Vertex{std::move(id), true}; }

Edge bounded(std::string id, std::string from, std::string to, double len) {
  return Edge{std::move(id), std::move(from), std::move(to), len};
}

Edge half_line(std::string id, std::string from, std::string to) {
  return Edge{std::move(id), std::move(from), std::move(to), kInfiniteLength};
}

}  // namespace

MetricGraph make_line() {
  return MetricGraph({fin("o"), inf_v("wl"), inf_v("wr")},
                     {half_line("left", "o", "wl"),
                      half_line("right", "o", "wr")});
}

MetricGraph make_tadpole(double loop_length) {
  if (!(loop_length > 0.0))
    throw std::invalid_argument("make_tadpole: loop length must be positive");
  return MetricGraph({fin("j"), inf_v("w0"), inf_v("w1")},
                     {bounded("loop", "j", "j", loop_length),
                      half_line("h0", "j", "w0"), half_line("h1", "j", "w1")});
}

MetricGraph make_bubble_tower(const std::vector<double>& glue_points) {
  if (glue_points.empty())
    throw std::invalid_argument("make_bubble_tower: need at least one glue point");
  for (std::size_t i = 0; i < glue_points.size(); ++i) {
    if (!(glue_points[i] > 0.0))
      throw std::invalid_argument(
          "make_bubble_tower: glue points must be positive");
    if (i > 0 && !(glue_points[i] > glue_points[i - 1]))
      throw std::invalid_argument(
          "make_bubble_tower: glue points must be strictly increasing");
  }

  std::size_t n = glue_points.size();
  std::vector<Vertex> vs;
  for (std::size_t i = 1; i <= n; ++i) vs.push_back(fin("x" + std::to_string(i)));
  vs.push_back(inf_v("w0"));
  vs.push_back(inf_v("w1"));

  std::vector<Edge> es;
  es.push_back(bounded("loop", "x1", "x1", 2.0 * glue_points[0]));
  for (std::size_t i = 2; i <= n; ++i) {
    double len = glue_points[i - 1] - glue_points[i - 2];
    std::string a = "x" + std::to_string(i - 1), b = "x" + std::to_string(i);
    es.push_back(bounded("pair" + std::to_string(i) + "a", a, b, len));
    es.push_back(bounded("pair" + std::to_string(i) + "b", a, b, len));
  }
  std::string base = "x" + std::to_string(n);
  es.push_back(half_line("h0", base, "w0"));
  es.push_back(half_line("h1", base, "w1"));
  return MetricGraph(std::move(vs), std::move(es));
}

MetricGraph make_double_bridge(double bridge_a, double bridge_b) {
  if (!(bridge_a > 0.0) || !(bridge_b > 0.0))
    throw std::invalid_argument(
        "make_double_bridge: bridge lengths must be positive");
  return MetricGraph(
      {fin("u"), fin("v"), inf_v("w0"), inf_v("w1")},
      {bounded("b0", "u", "v", bridge_a), bounded("b1", "u", "v", bridge_b),
       half_line("h0", "u", "w0"), half_line("h1", "v", "w1")});
}

MetricGraph make_pendant(double pendant_length) {
  if (!(pendant_length > 0.0))
    throw std::invalid_argument(
        "make_pendant: pendant length must be positive");
  return MetricGraph({fin("j"), fin("t"), inf_v("w0"), inf_v("w1")},
                     {half_line("h0", "j", "w0"), half_line("h1", "j", "w1"),
                      bounded("pend", "j", "t", pendant_length)});
}

MetricGraph make_showcase() {
  std::vector<Vertex> vs = {fin("a"),    fin("b"),    fin("c"),    fin("d"),
                            fin("e"),    fin("f"),    fin("g"),    inf_v("w1"),
                            inf_v("w2"), inf_v("w3"), inf_v("w4"), inf_v("w5")};
  std::vector<Edge> es = {
      bounded("ab1", "a", "b", 1.0),  bounded("ab2", "a", "b", 1.5),
      bounded("bc", "b", "c", 0.8),   bounded("cd", "c", "d", 1.2),
      bounded("da", "d", "a", 0.9),   bounded("ce", "c", "e", 0.7),
      bounded("ef", "e", "f", 1.1),   bounded("fd", "f", "d", 0.6),
      bounded("eg", "e", "g", 0.5),   bounded("fg", "f", "g", 1.3),
      bounded("bg", "b", "g", 1.0),   bounded("af", "a", "f", 1.4),
      bounded("gg", "g", "g", 2.0),
      half_line("ha", "a", "w1"),     half_line("hb", "b", "w2"),
      half_line("hc", "c", "w3"),     half_line("he", "e", "w4"),
      half_line("hf", "f", "w5")};
  return MetricGraph(std::move(vs), std::move(es));
}

const std::vector<CorpusEntry>& builtin_corpus() {
  static const std::vector<CorpusEntry> corpus = [] {
    std::vector<CorpusEntry> c;
    c.push_back({"line", "two half-lines at a vertex; the soliton lives here",
                 make_line()});
    c.push_back({"tadpole",
                 "loop of length 2 with two half-lines; exactly solvable by "
                 "folding the line at one glue point",
                 make_tadpole(2.0)});
    c.push_back({"bubble_tower",
                 "parallel pair between two junctions topped by a loop, two "
                 "half-lines below; exactly solvable with two glue points",
                 make_bubble_tower({1.0, 2.0})});
    c.push_back({"double_bridge",
                 "two unit bridges between two junctions, one half-line each; "
                 "no cut edges, the minimum is never attained",
                 make_double_bridge(1.0, 1.0)});
    c.push_back({"pendant",
                 "unit pendant edge at the junction of two half-lines; the "
                 "pendant tip traps the ground state",
                 make_pendant(1.0)});
    c.push_back({"showcase",
                 "five half-lines, thirteen bounded edges including a "
                 "self-loop; every bounded edge sits on a cycle",
                 make_showcase()});
    for (const CorpusEntry& e : c) require_valid(e.graph);
    return c;
  }();
  return corpus;
}

MetricGraph builtin_graph(const std::string& name) {
  for (const CorpusEntry& e : builtin_corpus())
    if (e.name == name) return e.graph;
  throw std::invalid_argument("unknown builtin graph '" + name + "'");
}

}  // namespace gnls
