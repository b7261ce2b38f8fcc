#pragma once

// Embedding a single point mass of weight lambda at w into a target measure
// along the left-curtain: the tangents from (w, p) to the put function of the
// target, their slopes a(p), b(p) and the sweep rate Upsilon = a - b.

#include <iosfwd>
#include <vector>

#include "lcurtain/measures.hpp"

namespace lcurtain {

struct Tangent {
  double point = 0.0;  // tangency kink (alpha or beta)
  double slope = 0.0;  // a or b
};

/// Lowest-slope line from (w, p) to the graph of P over kinks above w.
/// Ties go to the smallest kink. At p = P(w) an atom of the target at w
/// returns (w, P'(w+)).
Tangent tangent_right(const PutFunction& put, double w, double p);

/// Mirror image over kinks below w; ties go to the largest kink.
Tangent tangent_left(const PutFunction& put, double w, double p);

/// One node of the Upsilon table. alpha and beta are the right-continuous
/// values at p; a, b and upsilon are continuous in p.
struct UpsilonNode {
  double p = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double a = 0.0;
  double b = 0.0;
  double upsilon = 0.0;
};

struct UpsilonTable {
  double w = 0.0;
  double p_max = 0.0;      // P(w)
  double atom_mass = 0.0;  // target mass at w
  // Ascending in p from 0 to p_max. Between nodes k and k+1, alpha and beta
  // equal nodes[k].alpha / nodes[k].beta and a, b, upsilon are linear. A
  // target with nothing on one side of w yields the single node p_max.
  std::vector<UpsilonNode> nodes;

  double upsilon_at_zero() const { return nodes.front().upsilon; }
  double upsilon_at_end() const { return nodes.back().upsilon; }
  /// Interpolated node at an arbitrary p in [0, p_max].
  UpsilonNode at(double p) const;
};

/// O(n) construction from tangent intercepts at w.
UpsilonTable build_upsilon(const AtomicMeasure& target, double w);

void write_upsilon_csv(std::ostream& os, const UpsilonTable& table);

/// A constant (R, S) run over (u_lo, u_hi] in global u coordinates.
struct Segment {
  double u_lo = 0.0;
  double u_hi = 0.0;
  double r = 0.0;
  double s = 0.0;
};

struct EmbeddingResult {
  std::vector<Segment> segments;
  AtomicMeasure embedded;
  AtomicMeasure residual;
  double r_star = 0.0;        // R at the end of the run
  double s_star = 0.0;        // S at the end of the run
  double lambda_low = 0.0;    // embedded mass at r_star
  double lambda_high = 0.0;   // embedded mass at s_star (0 when r_star == s_star)
  double upsilon_zero = 0.0;  // largest weight the target could take at w
};

/// Embeds lambda * delta_w into target. Segments cover (u_offset, u_offset + lambda].
/// Throws Error(AtomTooHeavy) if lambda exceeds Upsilon(0) by more than 1e-9.
EmbeddingResult embed_point_mass(const AtomicMeasure& target, double w, double lambda,
                                 double u_offset = 0.0);

}  // namespace lcurtain
