#pragma once

// The martingale coupling generated by a triple: Y(u, v) for independent
// uniforms, its exact joint law, its dispersion cost and a seeded sampler.

#include <cstdint>
#include <utility>
#include <vector>

#include "lcurtain/curtain.hpp"

namespace lcurtain {

struct JointAtom {
  double x = 0.0;
  double y = 0.0;
  double mass = 0.0;
};

struct JointLaw {
  std::vector<JointAtom> atoms;  // sorted by (x, y), duplicates merged

  AtomicMeasure first_marginal() const;
  AtomicMeasure second_marginal() const;
  double total_mass() const;
};

/// Y(u, v): R(u) if v <= (S-G)/(S-R), S(u) otherwise, and G(u) when G = S.
double y_of(const CouplingTriple& triple, double u, double v);

/// Exact image of the pieces under (u, v) -> (G(u), Y(u, v)), no checks.
JointLaw pushforward(const std::vector<Piece>& pieces);

/// Joint law of a certified triple; throws Error(Uncertified) otherwise.
JointLaw joint_law(const CouplingTriple& triple);
/// As above, and additionally requires the first marginal to match mu.
JointLaw joint_law(const CouplingTriple& triple, const AtomicMeasure& mu);

/// Integral over u of (S-G)(G-R)/(S-R) on pieces with S > G.
double transport_cost(const CouplingTriple& triple);

/// E|Y - X| under a joint law.
double mean_abs_displacement(const JointLaw& law);

using SamplePair = std::pair<double, double>;

/// n draws of (G(U), Y(U, V)). Draws are generated in fixed blocks of 2^16,
/// block b seeded from splitmix64(seed + (b+1) * golden ratio constant) with
/// mt19937_64, so the output depends only on (triple, seed, n) and not on the
/// thread count. The OpenMP and serial versions return identical vectors.
std::vector<SamplePair> sample(const CouplingTriple& triple, std::uint64_t seed, std::size_t n);
std::vector<SamplePair> sample_serial(const CouplingTriple& triple, std::uint64_t seed, std::size_t n);

}  // namespace lcurtain
