#pragma once

// Envelopes for the upper and lower functions of the coupling, and an
// empirical convergence probe for triples built from refining
// discretizations of an initial law.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lcurtain/curtain.hpp"
#include "lcurtain/measures.hpp"

namespace lcurtain {

/// Largest touching point among the kinks of P_nu above k of the lowest line
/// from (k, P_mu(k)) to the graph of P_nu. Returns k when no kink of P_nu
/// lies above k.
double tangent_point_K(const PutFunction& p_mu, const PutFunction& p_nu, double k);

/// Upper envelope J_+(u) = K(G(u+)) for S.
double bound_J(const AtomicMeasure& mu, const AtomicMeasure& nu, double u);

/// Lower envelope j(u) for R. Empty when the slope-u tangent to P_mu also
/// touches P_nu, or when no admissible epsilon is found within 60 halvings.
std::optional<double> bound_j(const AtomicMeasure& mu, const AtomicMeasure& nu, double u);

struct EnvelopePoint {
  double u = 0.0;
  double s = 0.0;
  double j_plus = 0.0;
  double r = 0.0;
  std::optional<double> j;  // only where G(u+) < S(u) and bound_j applies
};

struct EnvelopeReport {
  std::vector<EnvelopePoint> points;  // one per piece midpoint
  std::vector<std::string> violations;
};

EnvelopeReport envelopes(const CouplingTriple& triple, const AtomicMeasure& mu, const AtomicMeasure& nu);

struct ProbeRow {
  std::size_t n = 0;
  double u = 0.0;
  double s = 0.0;
  double g = 0.0;
  double r = 0.0;
  double j_plus = 0.0;
  std::optional<double> j;
  bool excluded = false;
};

struct ProbeLevel {
  std::size_t n = 0;
  bool skipped = false;
  std::string diagnostic;
  std::size_t pieces = 0;
  double mean_dev_s = 0.0;  // against the finest level, over non-excluded grid points
  double max_dev_s = 0.0;
  double mean_dev_g = 0.0;
  double max_dev_g = 0.0;
  std::optional<double> w1_to_next;  // W1 to the next built level's joint law
};

struct ProbeReport {
  std::vector<ProbeLevel> levels;
  std::vector<ProbeRow> rows;
  std::vector<double> excluded;  // grid points at persistent jumps of the finest triple
  bool w1_nonincreasing = true;  // within 10% slack
  bool deviations_shrink = true; // within 10% slack
};

/// Builds triples for discretize(mu, n), n in ns (ascending), against nu and
/// compares them on the grid u_k = (k + 1/2) / grid.
ProbeReport convergence_probe(const QuantileSource& mu, const AtomicMeasure& nu,
                              const std::vector<std::size_t>& ns, std::size_t grid);

}  // namespace lcurtain
