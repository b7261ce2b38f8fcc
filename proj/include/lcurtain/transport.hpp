#pragma once

// Exact optimal transport between two finite point clouds in the plane with
// Euclidean ground cost, solved as a transportation problem by the primal
// network simplex method.

#include <cstddef>
#include <vector>

#include "lcurtain/coupling.hpp"

namespace lcurtain {

struct WeightedPoint {
  double x = 0.0;
  double y = 0.0;
  double mass = 0.0;
};

/// Row-major n_src x n_dst matrix of Euclidean distances.
std::vector<double> cost_matrix(const std::vector<WeightedPoint>& src, const std::vector<WeightedPoint>& dst);
std::vector<double> cost_matrix_serial(const std::vector<WeightedPoint>& src,
                                       const std::vector<WeightedPoint>& dst);

struct TransportSolution {
  double cost = 0.0;
  std::size_t pivots = 0;
  // Nonzero flows as (source, target, amount).
  struct Flow {
    std::size_t src = 0;
    std::size_t dst = 0;
    double amount = 0.0;
  };
  std::vector<Flow> plan;
};

/// Minimum-cost plan moving the supplies of src onto the demands of dst for
/// an explicit row-major cost matrix. Total masses must agree within 1e-9;
/// the smaller side is scaled up to match before solving.
TransportSolution solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                  const std::vector<double>& cost);

/// Wasserstein-1 distance between two atomic laws on the plane.
double wasserstein1(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b);
double wasserstein1(const JointLaw& a, const JointLaw& b);

}  // namespace lcurtain
