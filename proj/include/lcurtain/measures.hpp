#pragma once

// Finitely supported measures on the real line and their put functions.
//
// Every measure here is a finite list of (position, mass) atoms. Masses may
// sum to less than one: the left-curtain construction works on residual
// sub-probability measures throughout, so probability-only operations
// (quantile, discretize) check the total mass themselves.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace lcurtain {

/// Positions closer than this are the same atom; masses at or below it vanish.
inline constexpr double kMergeTol = 1e-12;

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

class AtomicMeasure {
 public:
  AtomicMeasure() = default;

  /// Sorts, merges coincident positions and drops null masses. Throws
  /// Error(InvalidMeasure) on negative or non-finite input and when the
  /// total mass exceeds one.
  explicit AtomicMeasure(std::vector<Atom> atoms);

  static AtomicMeasure point_mass(double position, double mass = 1.0);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  double total_mass() const;
  double first_moment() const;
  /// Smallest / largest support point. Requires a nonempty measure.
  double lower() const;
  double upper() const;

  /// Mass sitting at x (within kMergeTol), zero if there is no atom there.
  double mass_at(double x) const;

 private:
  std::vector<Atom> atoms_;
};

/// The put function k -> sum over atoms of mass * (k - x)^+ as a piecewise
/// linear object. Kinks are the atom positions; all queries are O(log n).
class PutFunction {
 public:
  PutFunction() = default;
  explicit PutFunction(const AtomicMeasure& measure);

  std::size_t kink_count() const { return kinks_.size(); }
  std::span<const double> kinks() const { return kinks_; }
  double kink(std::size_t i) const { return kinks_[i]; }
  double value_at_kink(std::size_t i) const { return values_[i]; }
  /// Slope just left / right of kink i.
  double slope_left(std::size_t i) const { return cum_mass_[i]; }
  double slope_right(std::size_t i) const { return cum_mass_[i + 1]; }
  double total_mass() const { return cum_mass_.empty() ? 0.0 : cum_mass_.back(); }

  double operator()(double k) const;
  /// One-sided derivatives at an arbitrary point.
  double derivative_left(double k) const;
  double derivative_right(double k) const;

 private:
  std::vector<double> kinks_;
  std::vector<double> values_;
  std::vector<double> cum_mass_;    // size n+1, cum_mass_[i] = mass of atoms 0..i-1
  std::vector<double> cum_moment_;  // size n+1
};

double put_value(const AtomicMeasure& measure, double k);

/// Mass-weighted mean. Throws Error(EmptyMeasure) for zero mass.
double barycentre(const AtomicMeasure& measure);

/// Left-continuous quantile of a probability measure at u in (0,1).
double quantile(const AtomicMeasure& measure, double u);

/// Equal mass, equal barycentre and P_eta <= P_chi at every kink of either
/// measure (tolerance 1e-12). Two empty measures compare true.
bool convex_order_leq(const AtomicMeasure& eta, const AtomicMeasure& chi);

/// Atomwise eta - zeta. Throws Error(NotDominated) if zeta exceeds eta
/// anywhere by more than the merge tolerance.
AtomicMeasure subtract(const AtomicMeasure& eta, const AtomicMeasure& zeta);

/// Sum of |eta - chi| over the union of both supports.
double total_variation(const AtomicMeasure& eta, const AtomicMeasure& chi);

/// A probability law on the line described through its quantile function.
/// discretize() only needs the integral of the quantile over sub-intervals
/// of (0,1); sources with a closed form supply it exactly.
class QuantileSource {
 public:
  /// Uniform law on [a, b].
  static QuantileSource uniform(double a, double b);
  /// Empirical law of a sample list.
  static QuantileSource samples(std::vector<double> values);
  /// Quantile of an atomic probability measure.
  static QuantileSource measure(const AtomicMeasure& measure);
  /// Arbitrary left-continuous quantile; bin integrals by adaptive quadrature.
  static QuantileSource function(std::function<double(double)> quantile);

  double quantile(double u) const;
  /// Integral of the quantile over [lo, hi] within [0, 1].
  double integral(double lo, double hi) const;
  /// Conditional mean of bin i of n equal-probability bins.
  double bin_mean(std::size_t i, std::size_t n) const;

  struct Impl;

 private:
  explicit QuantileSource(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// n equal-probability bins, each replaced by its conditional mean with mass
/// 1/n. The result is below the source in convex order.
AtomicMeasure discretize(const QuantileSource& source, std::size_t n);

}  // namespace lcurtain
