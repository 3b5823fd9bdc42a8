#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "gnls/corpus.hpp"
#include "gnls/graph_io.hpp"
#include "gnls/metric_graph.hpp"
#include "test_support.hpp"

using namespace gnls;
using gnls_test::oracle_condition_h;
using gnls_test::random_graph;

namespace {

bool has_rule(const std::vector<Violation>& vs, Violation::Rule r) {
  for (const auto& v : vs)
    if (v.rule == r) return true;
  return false;
}

Edge fin(std::string id, std::string a, std::string b, double len) {
  return {std::move(id), std::move(a), std::move(b), len};
}

Edge half(std::string id, std::string a, std::string w) {
  return {std::move(id), std::move(a), std::move(w), kInfiniteLength};
}

}  // namespace

TEST_SUITE("metric_graph") {

TEST_CASE("corpus graphs validate cleanly") {
  for (const CorpusEntry& e : builtin_corpus()) {
    CAPTURE(e.name);
    CHECK(validate(e.graph).empty());
    CHECK_NOTHROW(require_valid(e.graph));
  }
}

TEST_CASE("validation flags each structural defect") {
  SUBCASE("empty graph") {
    MetricGraph g({}, {});
    CHECK(has_rule(validate(g), Violation::Rule::Empty));
  }
  SUBCASE("duplicate vertex id") {
    MetricGraph g({{"a", false}, {"a", false}}, {fin("e", "a", "a", 1)});
    CHECK(has_rule(validate(g), Violation::Rule::DuplicateVertexId));
  }
  SUBCASE("duplicate edge id") {
    MetricGraph g({{"a", false}, {"b", false}},
                  {fin("e", "a", "b", 1), fin("e", "a", "b", 2)});
    CHECK(has_rule(validate(g), Violation::Rule::DuplicateEdgeId));
  }
  SUBCASE("unknown endpoint") {
    MetricGraph g({{"a", false}}, {fin("e", "a", "zz", 1)});
    CHECK(has_rule(validate(g), Violation::Rule::UnknownEndpoint));
  }
  SUBCASE("non-positive length") {
    MetricGraph g({{"a", false}, {"b", false}}, {fin("e", "a", "b", 0.0)});
    CHECK(has_rule(validate(g), Violation::Rule::NonPositiveLength));
    MetricGraph g2({{"a", false}, {"b", false}}, {fin("e", "a", "b", -3)});
    CHECK(has_rule(validate(g2), Violation::Rule::NonPositiveLength));
  }
  SUBCASE("half-line must run finite to infinity") {
    MetricGraph g({{"a", false}, {"b", false}}, {half("h", "a", "b")});
    CHECK(has_rule(validate(g), Violation::Rule::HalfLineEndpoints));
    MetricGraph g2({{"a", false}, {"w", true}}, {half("h", "w", "a")});
    CHECK(has_rule(validate(g2), Violation::Rule::HalfLineEndpoints));
  }
  SUBCASE("infinity vertex degree must be one") {
    MetricGraph g({{"a", false}, {"w", true}},
                  {half("h0", "a", "w"), half("h1", "a", "w")});
    CHECK(has_rule(validate(g), Violation::Rule::InfinityVertexDegree));
  }
  SUBCASE("finite edge may not touch an infinity vertex") {
    MetricGraph g({{"a", false}, {"w", true}}, {fin("e", "a", "w", 1)});
    CHECK(has_rule(validate(g), Violation::Rule::InfinityVertexOnFiniteEdge));
  }
  SUBCASE("no loops at infinity") {
    MetricGraph g({{"w", true}}, {half("h", "w", "w")});
    CHECK(has_rule(validate(g), Violation::Rule::LoopAtInfinity));
  }
  SUBCASE("graph must be connected") {
    MetricGraph g({{"a", false}, {"b", false}, {"c", false}, {"d", false}},
                  {fin("e0", "a", "b", 1), fin("e1", "c", "d", 1)});
    CHECK(has_rule(validate(g), Violation::Rule::NotConnected));
  }
  SUBCASE("rule names are distinct and nonempty") {
    std::set<std::string> names;
    for (auto r : {Violation::Rule::DuplicateVertexId,
                   Violation::Rule::DuplicateEdgeId,
                   Violation::Rule::UnknownEndpoint,
                   Violation::Rule::NonPositiveLength,
                   Violation::Rule::HalfLineEndpoints,
                   Violation::Rule::InfinityVertexDegree,
                   Violation::Rule::InfinityVertexOnFiniteEdge,
                   Violation::Rule::LoopAtInfinity,
                   Violation::Rule::NotConnected, Violation::Rule::Empty}) {
      std::string n{rule_name(r)};
      CHECK(!n.empty());
      names.insert(n);
    }
    CHECK(names.size() == 10);
  }
}

TEST_CASE("degrees, incidence and totals") {
  MetricGraph tad = make_tadpole(2.0);
  REQUIRE(tad.vertex_index("j").has_value());
  std::size_t base = *tad.vertex_index("j");
  CHECK(tad.degree(base) == 4);  // loop counts twice, two half-lines
  CHECK(tad.infinity_vertex_count() == 2);
  CHECK(std::isinf(total_length(tad)));

  MetricGraph box({{"a", false}, {"b", false}},
                  {fin("e0", "a", "b", 1.5), fin("e1", "a", "b", 2.5)});
  CHECK(total_length(box) == doctest::Approx(4.0));
  CHECK(box.degree(0) == 2);
  CHECK(box.incident_edges(0).size() == 2);
  CHECK(box.infinity_vertex_count() == 0);
  CHECK(box.is_connected());
}

TEST_CASE("cut edges on known graphs") {
  auto cuts = [](const MetricGraph& g) {
    auto c = cut_edges(g);
    std::sort(c.begin(), c.end());
    return c;
  };
  CHECK(cuts(make_pendant(1.0)) ==
        std::vector<std::string>{"h0", "h1", "pend"});
  CHECK(cuts(make_double_bridge()) == std::vector<std::string>{"h0", "h1"});
  CHECK(cuts(make_line()) == std::vector<std::string>{"left", "right"});
  // parallel pair plus loop: nothing separates
  MetricGraph box({{"a", false}, {"b", false}},
                  {fin("e0", "a", "b", 1), fin("e1", "a", "b", 1),
                   fin("l", "b", "b", 2)});
  CHECK(cuts(box).empty());
  // every showcase cut edge is a half-line
  MetricGraph big = make_showcase();
  for (const std::string& id : cut_edges(big)) {
    auto e = big.edge_index(id);
    REQUIRE(e.has_value());
    CHECK(big.edges()[*e].is_half_line());
  }
}

TEST_CASE("escape condition on the corpus") {
  for (const char* name :
       {"line", "tadpole", "bubble_tower", "double_bridge", "showcase"}) {
    CAPTURE(name);
    CHECK(check_condition_h(builtin_graph(name)).satisfied);
  }
  ConditionHResult pend = check_condition_h(builtin_graph("pendant"));
  CHECK(!pend.satisfied);
  CHECK(pend.witness_edge == "pend");
  REQUIRE(pend.infinity_free_component.size() == 1);
  CHECK(pend.infinity_free_component[0] == "t");

  MetricGraph box({{"a", false}, {"b", false}}, {fin("e", "a", "b", 1)});
  ConditionHResult compact = check_condition_h(box);
  CHECK(!compact.satisfied);
  CHECK(compact.compact);
}

TEST_CASE("escape condition agrees with the edge-removal oracle") {
  std::mt19937_64 rng(0xC0FFEE);
  int unsatisfied_seen = 0;
  for (int trial = 0; trial < 50; ++trial) {
    MetricGraph g = random_graph(rng);
    CAPTURE(trial);
    REQUIRE(validate(g).empty());
    ConditionHResult res = check_condition_h(g);
    CHECK(res.satisfied == oracle_condition_h(g));
    if (!res.satisfied) ++unsatisfied_seen;
    if (!res.satisfied && !res.compact) {
      // the witness must be real: dropping it strands the named component
      auto e = g.edge_index(res.witness_edge);
      REQUIRE(e.has_value());
      std::vector<std::string> sorted_witness = res.infinity_free_component;
      std::sort(sorted_witness.begin(), sorted_witness.end());
      bool found = false;
      for (const auto& comp : gnls_test::components_without_edge(g, *e)) {
        std::vector<std::string> ids;
        bool has_inf = false;
        for (std::size_t v : comp) {
          ids.push_back(g.vertices()[v].id);
          has_inf = has_inf || g.vertices()[v].at_infinity;
        }
        std::sort(ids.begin(), ids.end());
        if (ids == sorted_witness) {
          found = true;
          CHECK(!has_inf);
        }
      }
      CHECK(found);
    }
  }
  CHECK(unsatisfied_seen > 0);  // the generator must exercise both outcomes
}

TEST_CASE("line-isometry family recognition") {
  SUBCASE("line") {
    LineIsometryResult r = recognize_line_isometry(make_line());
    CHECK(r.family == LineIsometryResult::Family::Line);
    CHECK(r.glue_points.empty());
    CHECK(r.isometry.size() == 2);
  }
  SUBCASE("tadpole folds at half the loop length") {
    LineIsometryResult r = recognize_line_isometry(make_tadpole(2.0));
    CHECK(r.family == LineIsometryResult::Family::SingleBubble);
    REQUIRE(r.glue_points.size() == 1);
    CHECK(r.glue_points[0] == doctest::Approx(1.0));
    LineIsometryResult r2 = recognize_line_isometry(make_tadpole(3.4));
    REQUIRE(r2.glue_points.size() == 1);
    CHECK(r2.glue_points[0] == doctest::Approx(1.7));
  }
  SUBCASE("bubble tower lists its glue points in order") {
    LineIsometryResult r = recognize_line_isometry(make_bubble_tower({1.0, 2.0}));
    CHECK(r.family == LineIsometryResult::Family::BubbleTower);
    REQUIRE(r.glue_points.size() == 2);
    CHECK(r.glue_points[0] == doctest::Approx(1.0));
    CHECK(r.glue_points[1] == doctest::Approx(2.0));
    LineIsometryResult r3 =
        recognize_line_isometry(make_bubble_tower({0.5, 1.25, 2.0}));
    REQUIRE(r3.glue_points.size() == 3);
    CHECK(r3.glue_points[1] == doctest::Approx(1.25));
  }
  SUBCASE("everything else is rejected") {
    CHECK(recognize_line_isometry(make_double_bridge()).family ==
          LineIsometryResult::Family::None);
    CHECK(recognize_line_isometry(make_pendant(1.0)).family ==
          LineIsometryResult::Family::None);
    CHECK(recognize_line_isometry(make_showcase()).family ==
          LineIsometryResult::Family::None);
  }
  SUBCASE("recognition is label- and order-invariant") {
    // tadpole with scrambled ids and edge order
    MetricGraph g({{"north", true}, {"hub", false}, {"south", true}},
                  {half("beta", "hub", "south"), fin("ring", "hub", "hub", 2.0),
                   half("alpha", "hub", "north")});
    REQUIRE(validate(g).empty());
    LineIsometryResult r = recognize_line_isometry(g);
    CHECK(r.family == LineIsometryResult::Family::SingleBubble);
    REQUIRE(r.glue_points.size() == 1);
    CHECK(r.glue_points[0] == doctest::Approx(1.0));
  }
  SUBCASE("isometry covers every edge with unit-speed charts") {
    LineIsometryResult r = recognize_line_isometry(make_bubble_tower({1.0, 2.0}));
    MetricGraph g = make_bubble_tower({1.0, 2.0});
    CHECK(r.isometry.size() == g.edges().size());
    for (const EdgeIsometry& iso : r.isometry) {
      CHECK(g.edge_index(iso.edge_id).has_value());
      CHECK((iso.sign == 1 || iso.sign == -1));
    }
  }
}

TEST_CASE("json graph round-trip preserves structure") {
  for (const CorpusEntry& e : builtin_corpus()) {
    CAPTURE(e.name);
    MetricGraph back = parse_graph(serialize_graph(e.graph));
    CHECK(graph_hash(back) == graph_hash(e.graph));
    CHECK(back.vertices().size() == e.graph.vertices().size());
    CHECK(back.edges().size() == e.graph.edges().size());
  }
}

TEST_CASE("json parse errors carry positions") {
  CHECK_THROWS_AS(parse_graph("{ not json"), GraphParseError);
  // parsing is structural only; emptiness is validate()'s business
  CHECK(has_rule(validate(parse_graph(R"({"vertices": [], "edges": []})")),
                 Violation::Rule::Empty));
  CHECK_THROWS_WITH_AS(
      parse_graph(
          R"({"vertices": [{"id": "a"}],
              "edges": [{"id": "e", "from": "a", "to": "a"}]})"),
      doctest::Contains("edges[0]"), GraphParseError);
  CHECK_THROWS_WITH_AS(
      parse_graph(R"({"vertices": [{"id": "a"}, {}], "edges": []})"),
      doctest::Contains("vertices[1]"), GraphParseError);
  CHECK_THROWS_AS(
      parse_graph(R"({"vertices": [{"id": "a", "infinity": "yes"}],
                      "edges": []})"),
      GraphParseError);
  CHECK_THROWS_AS(load_graph("/nonexistent/graph.json"), std::exception);
}

TEST_CASE("infinite lengths round-trip through the string form") {
  MetricGraph g = make_pendant(1.0);
  std::string text = serialize_graph(g);
  CHECK(text.find("\"inf\"") != std::string::npos);
  MetricGraph back = parse_graph(text);
  std::size_t halves = 0;
  for (const Edge& e : back.edges())
    if (e.is_half_line()) ++halves;
  CHECK(halves == 2);
}

TEST_CASE("hash discriminates lengths and labels") {
  MetricGraph a = make_tadpole(2.0);
  MetricGraph b = make_tadpole(2.5);
  CHECK(graph_hash(a) != graph_hash(b));
  CHECK(graph_hash_hex(a).size() == 16);
  MetricGraph renamed({{"o", false}, {"WL", true}, {"wr", true}},
                      {half("left", "o", "WL"), half("right", "o", "wr")});
  CHECK(graph_hash(renamed) != graph_hash(make_line()));
}

}  // TEST_SUITE
