#include "gnls/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnls/graph_function.hpp"
#include "gnls/numerics.hpp"

namespace gnls {

namespace {

void require_admissible(const GraphFunction& u, const char* who) {
  if (u.min_value() < 0.0)
    throw std::invalid_argument(std::string(who) +
                                ": negative values present");
  if (!(u.max_value() > 0.0))
    throw std::invalid_argument(std::string(who) + ": zero function");
}

// Index of the last level <= v.  Every nodal value lies within the merge
// tolerance above its representative, so this is its cluster.
std::size_t level_index(const std::vector<double>& lv, double v) {
  auto it = std::upper_bound(lv.begin(), lv.end(), v);
  return static_cast<std::size_t>(it - lv.begin()) - 1;
}

}  // namespace

LayerDecomposition layer_decomposition(const GraphFunction& u) {
  require_admissible(u, "layer_decomposition");
  const auto& mesh = u.mesh();
  const auto& vals = u.values();

  // Distinct levels; near-ties collapse onto the smallest member of their
  // cluster so interval slopes stay bounded.
  std::vector<double> lv(vals.begin(), vals.end());
  std::sort(lv.begin(), lv.end());
  double merge_tol = 1e-13 * lv.back();
  LayerDecomposition out;
  out.level.reserve(lv.size());
  for (double v : lv)
    if (out.level.empty() || v - out.level.back() > merge_tol)
      out.level.push_back(v);

  std::size_t K = out.level.size();
  out.above.assign(K, 0.0);
  out.at_or_above.assign(K, 0.0);
  out.crossings.assign(K > 1 ? K - 1 : 0, 0);
  std::vector<double> band_width(K > 1 ? K - 1 : 0, 0.0);
  std::vector<double> plateau(K, 0.0);

  const auto& ia = mesh.interval_a();
  const auto& ib = mesh.interval_b();
  const auto& hs = mesh.interval_h();
  for (std::size_t i = 0; i < ia.size(); ++i) {
    double va = vals[ia[i]], vb = vals[ib[i]];
    std::size_t ka = level_index(out.level, std::min(va, vb));
    std::size_t kb = level_index(out.level, std::max(va, vb));
    if (ka == kb) {
      plateau[ka] += hs[i];
      continue;
    }
    // Distribute the interval's length over the bands it crosses, in exact
    // proportion to the band heights (the affine level-set geometry).
    double span = out.level[kb] - out.level[ka];
    for (std::size_t k = ka; k < kb; ++k) {
      band_width[k] += hs[i] * (out.level[k + 1] - out.level[k]) / span;
      ++out.crossings[k];
    }
  }

  // Accumulate the distribution function downward from the top level; every
  // increment is nonnegative, so no cancellation occurs.
  out.above[K - 1] = 0.0;
  out.at_or_above[K - 1] = plateau[K - 1];
  KahanSum acc;
  for (std::size_t k = K - 1; k-- > 0;) {
    acc.add(plateau[k + 1]);
    acc.add(band_width[k]);
    out.above[k] = acc.value();
    out.at_or_above[k] = out.above[k] + plateau[k];
  }
  out.total_measure = out.at_or_above[0];
  return out;
}

DecreasingProfile decreasing_profile(const LayerDecomposition& layers) {
  const std::size_t K = layers.level.size();
  DecreasingProfile prof;
  prof.x.reserve(2 * K);
  prof.v.reserve(2 * K);
  auto push = [&prof](double x, double v) {
    if (!prof.x.empty() && !(x > prof.x.back())) return;  // zero-width step
    prof.x.push_back(x);
    prof.v.push_back(v);
  };
  prof.x.push_back(0.0);
  prof.v.push_back(layers.level[K - 1]);
  push(layers.at_or_above[K - 1], layers.level[K - 1]);
  for (std::size_t k = K - 1; k-- > 0;) {
    push(layers.above[k], layers.level[k]);
    push(layers.at_or_above[k], layers.level[k]);
  }
  return prof;
}

namespace {

MetricGraph one_edge_graph(bool half_line, double length) {
  if (half_line)
    return MetricGraph({{"o", false}, {"w", true}},
                       {{"rearranged", "o", "w", kInfiniteLength}});
  return MetricGraph({{"o", false}, {"t", false}},
                     {{"rearranged", "o", "t", length}});
}

MetricGraph symmetric_graph(bool half_line, double side_length) {
  if (half_line)
    return MetricGraph({{"o", false}, {"wl", true}, {"wr", true}},
                       {{"left", "o", "wl", kInfiniteLength},
                        {"right", "o", "wr", kInfiniteLength}});
  return MetricGraph({{"o", false}, {"l", false}, {"r", false}},
                     {{"left", "o", "l", side_length},
                      {"right", "o", "r", side_length}});
}

std::uint32_t min_crossings_of(const LayerDecomposition& layers) {
  std::uint32_t m = 0;
  for (std::size_t k = 0; k < layers.crossings.size(); ++k)
    m = k == 0 ? layers.crossings[k] : std::min(m, layers.crossings[k]);
  return m;
}

void fill_audits(RearrangementResult& r, const GraphFunction& in, double p) {
  r.input_mass = mass(in);
  r.input_lp = lp_integral(in, p);
  r.input_dirichlet = dirichlet_integral(in);
  r.output_mass = mass(r.output);
  r.output_lp = lp_integral(r.output, p);
  r.output_dirichlet = dirichlet_integral(r.output);
}

}  // namespace

RearrangementResult decreasing_rearrangement(const GraphFunction& u,
                                             double p) {
  require_admissible(u, "decreasing_rearrangement");
  auto layers = layer_decomposition(u);
  auto prof = decreasing_profile(layers);

  bool half_line = u.mesh().graph().infinity_vertex_count() > 0 &&
                   prof.v.back() == 0.0;
  MetricGraph graph = one_edge_graph(half_line, prof.x.back());
  auto mesh = std::make_shared<TruncatedMesh>(TruncatedMesh::with_coordinates(
      std::move(graph), {prof.x}, u.mesh().target_h(), prof.x.back()));

  RearrangementResult r;
  r.output = GraphFunction(mesh);
  const auto& em = mesh->edge_meshes()[0];
  for (std::size_t j = 0; j < em.node.size(); ++j)
    r.output[em.node[j]] = prof.v[j];
  r.min_crossings = min_crossings_of(layers);

  if (u.mesh().edge_meshes().size() == 1) {
    const auto& iem = u.mesh().edge_meshes()[0];
    bool mono = true;
    for (std::size_t j = 1; j < iem.node.size() && mono; ++j)
      if (u.values()[iem.node[j]] > u.values()[iem.node[j - 1]]) mono = false;
    r.input_already_shaped = mono;
  }
  fill_audits(r, u, p);
  return r;
}

RearrangementResult symmetric_rearrangement(const GraphFunction& u, double p) {
  require_admissible(u, "symmetric_rearrangement");
  auto layers = layer_decomposition(u);
  auto prof = decreasing_profile(layers);

  std::vector<double> half(prof.x.size());
  for (std::size_t j = 0; j < half.size(); ++j) half[j] = 0.5 * prof.x[j];

  bool half_line = u.mesh().graph().infinity_vertex_count() > 0 &&
                   prof.v.back() == 0.0;
  MetricGraph graph = symmetric_graph(half_line, half.back());
  auto mesh = std::make_shared<TruncatedMesh>(TruncatedMesh::with_coordinates(
      std::move(graph), {half, half}, u.mesh().target_h(), half.back()));

  RearrangementResult r;
  r.output = GraphFunction(mesh);
  for (const auto& em : mesh->edge_meshes())
    for (std::size_t j = 0; j < em.node.size(); ++j)
      r.output[em.node[j]] = prof.v[j];
  r.min_crossings = min_crossings_of(layers);

  // Fixed point: two mirrored edges off one junction, values even and
  // radially nonincreasing.
  const auto& ems = u.mesh().edge_meshes();
  if (ems.size() == 2 && ems[0].node.front() == ems[1].node.front() &&
      ems[0].coord.size() == ems[1].coord.size()) {
    bool ok = true;
    double vtol = 1e-9 * u.max_value();
    const auto& vv = u.values();
    for (std::size_t j = 0; ok && j < ems[0].coord.size(); ++j) {
      if (std::abs(ems[0].coord[j] - ems[1].coord[j]) >
          1e-12 * (1.0 + ems[0].coord[j]))
        ok = false;
      else if (std::abs(vv[ems[0].node[j]] - vv[ems[1].node[j]]) > vtol)
        ok = false;
      else if (j > 0 && vv[ems[0].node[j]] > vv[ems[0].node[j - 1]] + vtol)
        ok = false;
    }
    r.input_already_shaped = ok;
  }
  fill_audits(r, u, p);
  return r;
}

double find_threshold(const GraphFunction& u, double target_measure) {
  require_admissible(u, "find_threshold");
  if (!(target_measure > 0.0))
    throw std::invalid_argument(
        "find_threshold: target measure must be positive");
  double support = distribution_function(u, 0.0);
  if (!(target_measure < support))
    throw ThresholdError("THRESHOLD_NOT_FOUND: requested measure " +
                         std::to_string(target_measure) +
                         " is not below the support measure " +
                         std::to_string(support));
  double lo = 0.0, hi = u.max_value();
  const double tol = 1e-10 * target_measure;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    double rho = distribution_function(u, mid);
    if (std::abs(rho - target_measure) <= tol) return mid;
    (rho > target_measure ? lo : hi) = mid;
  }
  // The target sits inside a plateau jump; snap to the nodal value causing
  // it so that meas({u > tau}) <= target <= meas({u >= tau}).
  for (double v : u.values())
    if (v >= lo && v <= hi) return v;
  return hi;
}

std::optional<PendantShape> recognize_pendant(const MetricGraph& g) {
  if (!validate(g).empty()) return std::nullopt;
  if (g.vertices().size() != 4 || g.edges().size() != 3) return std::nullopt;
  if (g.infinity_vertex_count() != 2) return std::nullopt;
  std::vector<std::size_t> hls, bounded;
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    (g.edges()[e].is_half_line() ? hls : bounded).push_back(e);
  if (hls.size() != 2 || bounded.size() != 1) return std::nullopt;
  const Edge& h0 = g.edges()[hls[0]];
  const Edge& h1 = g.edges()[hls[1]];
  if (h0.from != h1.from) return std::nullopt;  // half-lines share a junction
  const Edge& pe = g.edges()[bounded[0]];
  if (pe.is_loop()) return std::nullopt;
  const std::string& junction = h0.from;
  std::string tip;
  if (pe.from == junction)
    tip = pe.to;
  else if (pe.to == junction)
    tip = pe.from;
  else
    return std::nullopt;

  PendantShape s;
  s.junction = *g.vertex_index(junction);
  s.tip = *g.vertex_index(tip);
  s.half_line[0] = hls[0];
  s.half_line[1] = hls[1];
  s.pendant = bounded[0];
  s.pendant_starts_at_junction = (pe.from == junction);
  s.pendant_length = pe.length;
  return s;
}

RearrangementResult hybrid_rearrangement(
    const GraphFunction& u, double p,
    std::optional<double> pendant_length_check) {
  require_admissible(u, "hybrid_rearrangement");
  const auto& mesh = u.mesh();
  auto shape = recognize_pendant(mesh.graph());
  if (!shape)
    throw std::invalid_argument(
        "hybrid_rearrangement: graph is not two half-lines plus a pendant");
  const double ell = shape->pendant_length;
  if (pendant_length_check &&
      std::abs(*pendant_length_check - ell) > 1e-9 * std::max(1.0, ell))
    throw std::invalid_argument(
        "hybrid_rearrangement: pendant length mismatch");

  const EdgeMesh* hm[2] = {nullptr, nullptr};
  const EdgeMesh* pm = nullptr;
  for (const auto& em : mesh.edge_meshes()) {
    if (em.edge == shape->half_line[0])
      hm[0] = &em;
    else if (em.edge == shape->half_line[1])
      hm[1] = &em;
    else
      pm = &em;
  }
  if (std::abs(hm[0]->length - hm[1]->length) >
      1e-9 * std::max(1.0, hm[0]->length))
    throw std::invalid_argument(
        "hybrid_rearrangement: half-line windows must match");

  double tau = find_threshold(u, ell);

  auto layers = layer_decomposition(u);
  auto prof = decreasing_profile(layers);
  if (prof.v.back() != 0.0)
    throw std::invalid_argument(
        "hybrid_rearrangement: u must vanish at the truncation boundary");

  // Measure of {u > tau} read off the profile (affine between breakpoints).
  std::size_t j0 = 0;
  while (j0 < prof.v.size() && prof.v[j0] > tau) ++j0;
  double x_tau;
  if (j0 == 0)
    x_tau = 0.0;  // tau at a flat top: nothing strictly above it
  else if (prof.v[j0] == tau)
    x_tau = prof.x[j0];
  else {
    double va = prof.v[j0 - 1], vb = prof.v[j0];
    x_tau = prof.x[j0 - 1] +
            (prof.x[j0] - prof.x[j0 - 1]) * (va - tau) / (va - vb);
  }
  // Threshold tolerance can leave the excess support a hair longer than the
  // pendant; compress it by that relative hair.
  double gscale = x_tau > ell ? ell / x_tau : 1.0;

  // Pendant profile (junction at coordinate 0): tau up to where the excess
  // starts, then the excess layers increasing toward the tip.
  std::vector<double> pc{0.0}, pv{tau};
  auto push_p = [&](double c, double v) {
    if (!(c > pc.back())) return;
    pc.push_back(c);
    pv.push_back(v);
  };
  if (x_tau > 0.0) {
    push_p(ell - x_tau * gscale, tau);
    for (std::size_t j = j0; j-- > 0;)
      push_p(ell - prof.x[j] * gscale, prof.v[j]);
  }
  if (pc.back() < ell) push_p(ell, pv.back());
  if (!shape->pendant_starts_at_junction) {
    std::vector<double> rc, rv;
    rc.reserve(pc.size());
    rv.reserve(pv.size());
    for (std::size_t i = pc.size(); i-- > 0;) {
      double c = i + 1 == pc.size() ? 0.0 : ell - pc[i];
      if (!rc.empty() && !(c > rc.back())) continue;
      rc.push_back(c);
      rv.push_back(pv[i]);
    }
    if (rc.back() < ell) {
      rc.push_back(ell);
      rv.push_back(pv[0]);
    }
    pc = std::move(rc);
    pv = std::move(rv);
  }

  // Line-part profile, one half-line side: the capped symmetrization with
  // the pendant's measure cut out around the centre.
  std::vector<double> hc{0.0}, hv{tau};
  auto push_h = [&](double c, double v) {
    if (!(c > hc.back())) return;
    hc.push_back(c);
    hv.push_back(v);
  };
  for (std::size_t j = 0; j < prof.x.size(); ++j) {
    if (!(prof.x[j] > ell)) continue;
    push_h(0.5 * (prof.x[j] - ell), std::min(prof.v[j], tau));
  }

  std::vector<std::vector<double>> coords(mesh.graph().edges().size());
  coords[shape->half_line[0]] = hc;
  coords[shape->half_line[1]] = hc;
  coords[shape->pendant] = pc;
  auto omesh = std::make_shared<TruncatedMesh>(TruncatedMesh::with_coordinates(
      mesh.graph(), std::move(coords), mesh.target_h(), mesh.truncation()));

  RearrangementResult r;
  r.output = GraphFunction(omesh);
  r.tau = tau;
  for (const auto& em : omesh->edge_meshes()) {
    const std::vector<double>& src = em.edge == shape->pendant ? pv : hv;
    for (std::size_t j = 0; j < em.node.size(); ++j)
      r.output[em.node[j]] = src[j];
  }
  r.min_crossings = min_crossings_of(layers);

  // Equality-case shape: excess already increasing along the pendant and the
  // junction dominating the line part.
  {
    const auto& vv = u.values();
    bool ok = true;
    double vtol = 1e-9 * u.max_value();
    for (std::size_t j = 1; ok && j < pm->node.size(); ++j) {
      double prev = vv[pm->node[j - 1]], cur = vv[pm->node[j]];
      if (shape->pendant_starts_at_junction ? cur < prev - vtol
                                            : cur > prev + vtol)
        ok = false;
    }
    double jv = vv[mesh.vertex_node(shape->junction)];
    for (int s = 0; ok && s < 2; ++s)
      for (std::size_t j = 0; ok && j < hm[s]->node.size(); ++j)
        if (vv[hm[s]->node[j]] > jv + vtol) ok = false;
    r.input_already_shaped = ok;
  }
  fill_audits(r, u, p);
  return r;
}

}  // namespace gnls
