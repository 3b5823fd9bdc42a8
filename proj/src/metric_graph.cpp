#include "gnls/metric_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "gnls/numerics.hpp"

namespace gnls {

MetricGraph::MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  incidence_.assign(vertices_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto a = vertex_index(edges_[e].from);
    auto b = vertex_index(edges_[e].to);
    if (a) incidence_[*a].push_back(e);
    if (b && (!a || *b != *a)) incidence_[*b].push_back(e);
  }
}

std::optional<std::size_t> MetricGraph::vertex_index(
    std::string_view id) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> MetricGraph::edge_index(std::string_view id) const {
  for (std::size_t i = 0; i < edges_.size(); ++i)
    if (edges_[i].id == id) return i;
  return std::nullopt;
}

std::size_t MetricGraph::degree(std::size_t vertex) const {
  std::size_t d = 0;
  for (std::size_t e : incidence_[vertex])
    d += edges_[e].is_loop() ? 2 : 1;
  return d;
}

const std::vector<std::size_t>& MetricGraph::incident_edges(
    std::size_t vertex) const {
  return incidence_[vertex];
}

std::size_t MetricGraph::infinity_vertex_count() const {
  std::size_t n = 0;
  for (const auto& v : vertices_)
    if (v.at_infinity) ++n;
  return n;
}

bool MetricGraph::is_connected() const {
  if (vertices_.empty()) return false;
  std::vector<char> seen(vertices_.size(), 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t e : incidence_[u]) {
      for (const std::string* end : {&edges_[e].from, &edges_[e].to}) {
        auto w = vertex_index(*end);
        if (w && !seen[*w]) {
          seen[*w] = 1;
          ++reached;
          q.push(*w);
        }
      }
    }
  }
  return reached == vertices_.size();
}

// ---------------------------------------------------------------------------

std::string_view rule_name(Violation::Rule rule) {
  switch (rule) {
    case Violation::Rule::DuplicateVertexId: return "duplicate-vertex-id";
    case Violation::Rule::DuplicateEdgeId: return "duplicate-edge-id";
    case Violation::Rule::UnknownEndpoint: return "unknown-endpoint";
    case Violation::Rule::NonPositiveLength: return "non-positive-length";
    case Violation::Rule::HalfLineEndpoints: return "half-line-endpoints";
    case Violation::Rule::InfinityVertexDegree: return "infinity-vertex-degree";
    case Violation::Rule::InfinityVertexOnFiniteEdge:
      return "infinity-vertex-on-finite-edge";
    case Violation::Rule::LoopAtInfinity: return "loop-at-infinity";
    case Violation::Rule::NotConnected: return "not-connected";
    case Violation::Rule::Empty: return "empty-graph";
  }
  return "unknown";
}

std::vector<Violation> validate(const MetricGraph& graph) {
  std::vector<Violation> out;
  auto add = [&](Violation::Rule rule, std::string subject, std::string msg) {
    out.push_back({rule, std::move(subject), std::move(msg)});
  };

  const auto& vs = graph.vertices();
  const auto& es = graph.edges();

  if (vs.empty() || es.empty()) {
    add(Violation::Rule::Empty, "",
        "a metric graph needs at least one vertex and one edge");
    return out;
  }

  std::unordered_set<std::string> vset, eset;
  for (const auto& v : vs)
    if (!vset.insert(v.id).second)
      add(Violation::Rule::DuplicateVertexId, v.id,
          "vertex id appears more than once: " + v.id);
  for (const auto& e : es)
    if (!eset.insert(e.id).second)
      add(Violation::Rule::DuplicateEdgeId, e.id,
          "edge id appears more than once: " + e.id);

  bool endpoints_ok = true;
  for (const auto& e : es) {
    for (const auto& end : {e.from, e.to}) {
      if (!graph.vertex_index(end)) {
        add(Violation::Rule::UnknownEndpoint, e.id,
            "edge " + e.id + " references unknown vertex " + end);
        endpoints_ok = false;
      }
    }
    if (!(e.length > 0.0) && !e.is_half_line())
      add(Violation::Rule::NonPositiveLength, e.id,
          "edge " + e.id + " must have positive (or infinite) length");
  }
  if (!endpoints_ok) return out;  // remaining checks need resolved endpoints

  for (const auto& e : es) {
    const Vertex& a = vs[*graph.vertex_index(e.from)];
    const Vertex& b = vs[*graph.vertex_index(e.to)];
    if (e.is_half_line()) {
      if (e.is_loop())
        add(Violation::Rule::LoopAtInfinity, e.id,
            "half-line " + e.id + " cannot be a self-loop");
      else if (a.at_infinity || !b.at_infinity)
        add(Violation::Rule::HalfLineEndpoints, e.id,
            "half-line " + e.id +
                " must run from a finite vertex to a vertex at infinity "
                "(infinite end last)");
    } else {
      if (a.at_infinity || b.at_infinity)
        add(Violation::Rule::InfinityVertexOnFiniteEdge, e.id,
            "finite edge " + e.id + " cannot touch a vertex at infinity");
    }
  }

  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].at_infinity && graph.degree(i) != 1)
      add(Violation::Rule::InfinityVertexDegree, vs[i].id,
          "vertex at infinity " + vs[i].id + " must have degree exactly one");
  }

  if (out.empty() && !graph.is_connected())
    add(Violation::Rule::NotConnected, "", "the graph is not connected");

  return out;
}

void require_valid(const MetricGraph& graph) {
  auto violations = validate(graph);
  if (violations.empty()) return;
  std::string msg = "invalid metric graph:";
  for (const auto& v : violations) {
    msg += "\n  [";
    msg += rule_name(v.rule);
    msg += "] ";
    msg += v.message;
  }
  throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------

double total_length(const MetricGraph& graph) {
  double sum = 0.0;
  for (const auto& e : graph.edges()) {
    if (e.is_half_line()) return kInfiniteLength;
    sum += e.length;
  }
  return sum;
}

namespace {

struct BridgeState {
  const MetricGraph* g;
  std::vector<int> disc, low;
  std::vector<char> is_bridge;
  int timer = 0;

  void dfs(std::size_t u, std::size_t in_edge) {
    disc[u] = low[u] = timer++;
    const std::string& uid = g->vertices()[u].id;
    for (std::size_t e : g->incident_edges(u)) {
      if (e == in_edge) continue;  // a parallel twin is a distinct edge index
      const Edge& ed = g->edges()[e];
      if (ed.is_loop()) continue;
      std::size_t v = *g->vertex_index(ed.from == uid ? ed.to : ed.from);
      if (disc[v] < 0) {
        dfs(v, e);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u]) is_bridge[e] = 1;
      } else {
        low[u] = std::min(low[u], disc[v]);
      }
    }
  }
};

}  // namespace

std::vector<std::string> cut_edges(const MetricGraph& graph) {
  BridgeState st;
  st.g = &graph;
  st.disc.assign(graph.vertices().size(), -1);
  st.low.assign(graph.vertices().size(), -1);
  st.is_bridge.assign(graph.edges().size(), 0);
  for (std::size_t v = 0; v < graph.vertices().size(); ++v)
    if (st.disc[v] < 0) st.dfs(v, static_cast<std::size_t>(-1));
  std::vector<std::string> out;
  for (std::size_t e = 0; e < graph.edges().size(); ++e)
    if (st.is_bridge[e]) out.push_back(graph.edges()[e].id);
  return out;
}

namespace {

// Connected components of the graph with one edge removed; returns vertex
// index lists.
std::vector<std::vector<std::size_t>> components_without(
    const MetricGraph& graph, std::size_t skip_edge) {
  std::vector<char> seen(graph.vertices().size(), 0);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < graph.vertices().size(); ++s) {
    if (seen[s]) continue;
    comps.emplace_back();
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      comps.back().push_back(u);
      for (std::size_t e : graph.incident_edges(u)) {
        if (e == skip_edge) continue;
        const Edge& ed = graph.edges()[e];
        for (const auto* end : {&ed.from, &ed.to}) {
          auto w = graph.vertex_index(*end);
          if (w && !seen[*w]) {
            seen[*w] = 1;
            q.push(*w);
          }
        }
      }
    }
  }
  return comps;
}

}  // namespace

ConditionHResult check_condition_h(const MetricGraph& graph) {
  ConditionHResult res;
  if (graph.infinity_vertex_count() == 0) {
    res.satisfied = false;
    res.compact = true;
    return res;
  }
  auto bridges = cut_edges(graph);
  std::unordered_set<std::string> bridge_set(bridges.begin(), bridges.end());
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    if (!bridge_set.count(graph.edges()[e].id)) continue;
    for (const auto& comp : components_without(graph, e)) {
      bool has_infinity = false;
      for (std::size_t v : comp)
        if (graph.vertices()[v].at_infinity) has_infinity = true;
      if (!has_infinity) {
        res.satisfied = false;
        res.witness_edge = graph.edges()[e].id;
        for (std::size_t v : comp)
          res.infinity_free_component.push_back(graph.vertices()[v].id);
        return res;
      }
    }
  }
  res.satisfied = true;
  return res;
}

// ---------------------------------------------------------------------------

namespace {

bool nearly_equal_length(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

LineIsometryResult recognize_line_isometry(const MetricGraph& graph) {
  require_valid(graph);
  LineIsometryResult none;

  // Two half-lines attached to a common finite junction.
  std::vector<std::size_t> half_lines;
  for (std::size_t e = 0; e < graph.edges().size(); ++e)
    if (graph.edges()[e].is_half_line()) half_lines.push_back(e);
  if (half_lines.size() != 2) return none;
  const std::string& j0 = graph.edges()[half_lines[0]].from;
  if (graph.edges()[half_lines[1]].from != j0) return none;
  std::size_t junction = *graph.vertex_index(j0);

  // Walk the finite part: junction -> ... -> loop vertex, consuming pairs of
  // equal-length parallel edges, or stop immediately (line / single bubble).
  std::vector<char> edge_used(graph.edges().size(), 0);
  edge_used[half_lines[0]] = edge_used[half_lines[1]] = 1;
  std::vector<char> visited(graph.vertices().size(), 0);
  visited[junction] = 1;

  struct Step {
    std::size_t a, b;        // pair edge indices
    std::size_t to_vertex;   // vertex the pair leads to
    double length;
  };
  std::vector<Step> chain;
  std::size_t cur = junction;
  std::optional<std::size_t> terminal_loop;

  while (true) {
    std::vector<std::size_t> avail;
    for (std::size_t e : graph.incident_edges(cur))
      if (!edge_used[e]) avail.push_back(e);

    if (avail.empty()) {
      if (cur != junction || !chain.empty()) return none;
      break;  // candidate: plain line
    }
    if (avail.size() == 1 && graph.edges()[avail[0]].is_loop()) {
      terminal_loop = avail[0];
      edge_used[avail[0]] = 1;
      break;
    }
    if (avail.size() != 2) return none;
    const Edge& ea = graph.edges()[avail[0]];
    const Edge& eb = graph.edges()[avail[1]];
    if (ea.is_loop() || eb.is_loop()) return none;
    auto other = [&](const Edge& ed) {
      return *graph.vertex_index(ed.from == graph.vertices()[cur].id ? ed.to
                                                                     : ed.from);
    };
    std::size_t wa = other(ea), wb = other(eb);
    if (wa != wb || visited[wa]) return none;
    if (!nearly_equal_length(ea.length, eb.length)) return none;
    edge_used[avail[0]] = edge_used[avail[1]] = 1;
    visited[wa] = 1;
    chain.push_back({avail[0], avail[1], wa, 0.5 * (ea.length + eb.length)});
    cur = wa;
  }

  for (char used : edge_used)
    if (!used) return none;

  LineIsometryResult res;
  if (!terminal_loop) {
    if (graph.degree(junction) != 2) return none;
    res.family = LineIsometryResult::Family::Line;
    for (std::size_t e : half_lines)
      res.isometry.push_back({graph.edges()[e].id, 0.0, +1});
    return res;
  }

  double a1 = 0.5 * graph.edges()[*terminal_loop].length;
  // Distance of each chain vertex from the gluing origin; the loop vertex
  // sits at a_1 and the junction at a_n.
  std::vector<double> dist(chain.size() + 1);  // dist[k] for chain position k
  dist[chain.size()] = a1;                     // loop end
  for (std::size_t k = chain.size(); k-- > 0;)
    dist[k] = dist[k + 1] + chain[k].length;

  res.family = chain.empty() ? LineIsometryResult::Family::SingleBubble
                             : LineIsometryResult::Family::BubbleTower;
  res.glue_points.push_back(a1);
  for (std::size_t k = chain.size(); k-- > 0;)
    res.glue_points.push_back(dist[k]);
  std::sort(res.glue_points.begin(), res.glue_points.end());

  double a_n = dist[0];
  for (std::size_t e : half_lines)
    res.isometry.push_back({graph.edges()[e].id, a_n, +1});
  // Pair k runs from chain position k (distance dist[k]) to k+1 (dist[k+1]).
  std::vector<std::size_t> pos_vertex(chain.size() + 1);
  pos_vertex[0] = junction;
  for (std::size_t k = 0; k < chain.size(); ++k)
    pos_vertex[k + 1] = chain[k].to_vertex;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    for (std::size_t e : {chain[k].a, chain[k].b}) {
      const Edge& ed = graph.edges()[e];
      bool from_is_near = ed.from == graph.vertices()[pos_vertex[k]].id;
      if (from_is_near)
        res.isometry.push_back({ed.id, dist[k], -1});
      else
        res.isometry.push_back({ed.id, dist[k + 1], +1});
    }
  }
  const Edge& loop = graph.edges()[*terminal_loop];
  res.isometry.push_back({loop.id, -a1, +1});  // |t - a_1| across the loop
  return res;
}

// ---------------------------------------------------------------------------

std::uint64_t graph_hash(const MetricGraph& graph) {
  std::string canon;
  char buf[64];
  for (const auto& v : graph.vertices()) {
    canon += "v:";
    canon += v.id;
    canon += v.at_infinity ? ":1;" : ":0;";
  }
  for (const auto& e : graph.edges()) {
    canon += "e:";
    canon += e.id;
    canon += ":";
    canon += e.from;
    canon += ":";
    canon += e.to;
    canon += ":";
    if (e.is_half_line())
      canon += "inf";
    else {
      std::snprintf(buf, sizeof buf, "%.17g", e.length);
      canon += buf;
    }
    canon += ";";
  }
  return fnv1a64(canon);
}

std::string graph_hash_hex(const MetricGraph& graph) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(graph_hash(graph)));
  return buf;
}

}  // namespace gnls
