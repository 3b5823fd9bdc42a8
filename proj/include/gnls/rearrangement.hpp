#pragma once
// Rearrangements of nonnegative functions on truncated metric-graph meshes:
// the decreasing rearrangement u* on a half-line, the symmetric rearrangement
// u-hat on a line, and the hybrid rearrangement on a pendant graph (cap the
// function at a threshold, symmetrize the cap on the line part, and stack the
// excess increasingly on the pendant).  All three share one exact layer
// decomposition of the input.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gnls/mesh.hpp"

namespace gnls {

// Exact level-set geometry of a nonnegative nodal function.  level[] holds
// the distinct nodal values in ascending order (near-ties within 1e-13 of the
// range are merged onto one representative so that slopes stay bounded);
// above[k] and at_or_above[k] are the measures of {u > level[k]} and
// {u >= level[k]}; crossings[k] counts the mesh intervals crossing the open
// band (level[k], level[k+1]).
struct LayerDecomposition {
  std::vector<double> level;
  std::vector<double> above;
  std::vector<double> at_or_above;
  std::vector<std::uint32_t> crossings;
  double total_measure = 0.0;
};

LayerDecomposition layer_decomposition(const GraphFunction& u);

// Breakpoint list of the decreasing rearrangement u* on [0, total measure]:
// x ascending from 0, v nonincreasing from max u down to min u.  Plateaus of
// u appear as flat segments; between consecutive levels u* is affine because
// the distribution function is.
struct DecreasingProfile {
  std::vector<double> x;
  std::vector<double> v;
};

DecreasingProfile decreasing_profile(const LayerDecomposition& layers);

struct RearrangementResult {
  GraphFunction output;
  std::optional<double> tau;  // hybrid threshold, absent otherwise
  double input_mass = 0.0, output_mass = 0.0;
  double input_lp = 0.0, output_lp = 0.0;
  double input_dirichlet = 0.0, output_dirichlet = 0.0;
  // Smallest per-band crossing count over the input's layers; >= 2 certifies
  // the Dirichlet bound for the symmetric rearrangement.
  std::uint32_t min_crossings = 0;
  // The input already had the operator's target shape (fixed point up to
  // resampling).
  bool input_already_shaped = false;
};

// Threshold root-finding failure: the distribution function never attains the
// requested measure on the available support.
class ThresholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// tau with meas({u > tau}) = target, by bisection on the exact piecewise
// linear distribution function (tolerance 1e-10 * target).  If the target
// falls inside a plateau jump the plateau's nodal value is returned, so that
// meas({u > tau}) <= target <= meas({u >= tau}) still holds.
double find_threshold(const GraphFunction& u, double target_measure);

// Two half-lines plus one bounded pendant edge hanging off their junction.
struct PendantShape {
  std::size_t junction = 0, tip = 0;  // vertex indices
  std::size_t half_line[2] = {0, 0};  // edge indices
  std::size_t pendant = 0;            // edge index
  bool pendant_starts_at_junction = true;
  double pendant_length = 0.0;
};

std::optional<PendantShape> recognize_pendant(const MetricGraph& g);

// u* on [0, measure] placed on a fresh one-edge graph (a truncated half-line
// when the input has one, so the far node keeps its zero boundary value).
// Output nodes sit exactly on the profile breakpoints.  The exponent p only
// feeds the |u|^p audit fields.
RearrangementResult decreasing_rearrangement(const GraphFunction& u,
                                             double p = 4.0);

// u-hat(x) = u*(2|x|) on a fresh symmetric two-edge graph.
RearrangementResult symmetric_rearrangement(const GraphFunction& u,
                                            double p = 4.0);

// Hybrid rearrangement on a pendant graph: with tau chosen so that
// meas({u > tau}) equals the pendant length, the capped part u ^ tau is
// symmetrized on the two half-lines (shifted so the cap's plateau exactly
// covers the removed pendant measure) and the excess (u - tau)^+ is
// rearranged increasingly along the pendant, meeting the line part at the
// junction with the exact value tau.  Preserves all level-set measures and
// never increases the energy.  If pendant_length_check is given it must
// match the graph's pendant edge length.
RearrangementResult hybrid_rearrangement(
    const GraphFunction& u, double p = 4.0,
    std::optional<double> pendant_length_check = std::nullopt);

}  // namespace gnls
