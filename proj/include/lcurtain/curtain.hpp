#pragma once

// The left-curtain coupling of two atomic probability measures as a
// piecewise-constant triple (R, G, S) on (0, 1].

#include <cstddef>
#include <string>
#include <vector>

#include "lcurtain/measures.hpp"
#include "lcurtain/single_atom.hpp"

namespace lcurtain {

/// (R, G, S) constant on (u_lo, u_hi].
struct Piece {
  double u_lo = 0.0;
  double u_hi = 0.0;
  double r = 0.0;
  double g = 0.0;
  double s = 0.0;

  double length() const { return u_hi - u_lo; }
};

/// What happened while embedding one atom of mu.
struct EmbeddingAudit {
  std::size_t atom_index = 0;
  double x = 0.0;
  double mass = 0.0;
  double u_lo = 0.0;
  double u_hi = 0.0;
  double r_star = 0.0;
  double s_star = 0.0;
  double lambda_low = 0.0;
  double lambda_high = 0.0;
  AtomicMeasure embedded;
  AtomicMeasure residual;
  bool residual_convex_order = false;  // remaining mu <=cx residual nu
};

struct Certificate {
  bool ok = false;
  std::vector<std::string> failures;
  double marginal_tv = 0.0;          // sum of |second marginal - nu| over positions
  double first_marginal_tv = 0.0;
  double max_martingale_error = 0.0;
  double final_residual_mass = 0.0;
  bool ordering_ok = false;          // R <= G <= S, S nondecreasing, left-monotone
};

struct CouplingTriple {
  std::vector<Piece> pieces;
  std::vector<EmbeddingAudit> audit;  // empty for triples read back from files
  Certificate certificate;

  bool certified() const { return certificate.ok; }

  /// Piece whose (u_lo, u_hi] contains u; u is clamped into (0, 1].
  const Piece& piece_at(double u) const;
  std::size_t piece_index(double u) const;
  double R(double u) const { return piece_at(u).r; }
  double G(double u) const { return piece_at(u).g; }
  double S(double u) const { return piece_at(u).s; }
};

/// Embeds the atoms of mu lowest-first into the successive residuals of nu
/// and certifies the result. Throws Error(ConvexOrder) unless mu <=cx nu; an
/// inner embedding failure is rethrown with the atom index in the message.
/// A construction that completes but fails certification is returned with
/// certificate.ok == false and the failures listed.
CouplingTriple build_left_curtain(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Runs every structural and marginal check on a triple against (mu, nu):
/// ordering and left-monotonicity over all piece pairs, G equal to the
/// quantile of mu, both marginals within 1e-9 in total variation, the
/// martingale condition per atom of mu within 1e-10 and, when an audit
/// trail is present, the residual checks made during construction.
Certificate certify(const CouplingTriple& triple, const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Both sides of the mass and mean balance at level u.
struct MassMeanCheck {
  double lhs_mass = 0.0;
  double rhs_mass = 0.0;
  double lhs_mean = 0.0;
  double rhs_mean = 0.0;
};

/// Left side: mu on (R(u), G(u)) plus the share of the atom at G(u) used up
/// to u. Right side: nu on (R(u), S(u)) plus the mass sent to R(u) and S(u)
/// by levels up to u whose source lies above R(u) or equals G(u).
MassMeanCheck check_mass_mean(const CouplingTriple& triple, const AtomicMeasure& mu,
                              const AtomicMeasure& nu, double u);

/// Per atom of mu, the distinct (R, S) pairs used by its levels.
struct FgEntry {
  double x = 0.0;
  std::vector<std::pair<double, double>> fg;  // (f, g) = (R, S)

  bool multivalued() const { return fg.size() > 1; }
};

std::vector<FgEntry> fg_view(const CouplingTriple& triple);

}  // namespace lcurtain
