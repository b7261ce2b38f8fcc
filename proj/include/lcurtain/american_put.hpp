#pragma once

// Two-date American put (strike K1 at date 1, K2 < K1 at date 2): its price
// in the model generated by a triple, the exercise threshold, two-put static
// superhedges and their cost.

#include <optional>
#include <string>
#include <vector>

#include "lcurtain/curtain.hpp"
#include "lcurtain/measures.hpp"

namespace lcurtain {

struct PutPair {
  double k1 = 0.0;
  double k2 = 0.0;
};

/// Throws Error(InvalidStrikes) unless k2 < k1 and both are finite.
void validate(const PutPair& k);

/// One leg of a put portfolio: weight * (strike - x)^+.
struct PutLeg {
  double strike = 0.0;
  double weight = 0.0;
};

/// Two atoms of nu around a strike that is not itself an atom.
struct Bracket {
  double below = 0.0;
  double above = 0.0;
};

/// psi(x) = theta (s - x)^+ + (1 - theta)(r - x)^+. With a bracket, the put at
/// that strike is spread over the two atoms, keeping its weight and mean.
struct HedgePortfolio {
  double theta = 0.0;
  double strike_low = 0.0;   // r
  double strike_high = 0.0;  // s
  double cost = 0.0;         // dual value of the hedge
  std::optional<Bracket> low_bracket;
  std::optional<Bracket> high_bracket;

  std::vector<PutLeg> legs() const;
  double psi(double x) const;
};

struct PiecePrice {
  double immediate = 0.0;
  double continuation = 0.0;
  bool exercise = false;  // ties exercise
};

struct ModelPrice {
  double price = 0.0;
  std::vector<PiecePrice> pieces;
};

/// Optimal stopping value when the holder sees U at date 1.
ModelPrice model_price(const CouplingTriple& triple, const PutPair& k);

/// (u, A(u)) at every breakpoint, A(u) = value of exercising exactly on U <= u.
std::vector<std::pair<double, double>> threshold_profile(const CouplingTriple& triple, const PutPair& k);

/// Lambda(r, g, s) with signed-infinity conventions off its natural domain:
/// g >= K1 gives -inf, otherwise s <= K1 or r >= K2 or r == g gives +inf.
/// Positive means exercising at date 1 is strictly better than waiting.
double lambda_rgs(double r, double g, double s, const PutPair& k);

/// Lambda evaluated at (R(u), G(u), S(u)).
double lambda_bar(const CouplingTriple& triple, const PutPair& k, double u);

enum class Archetype { Root, AlwaysNegative, AlwaysPositive, Jump };

const char* to_string(Archetype a);

struct UStar {
  Archetype archetype = Archetype::AlwaysNegative;
  std::optional<double> u_star;  // the breakpoint where Lambda changes sign
  std::size_t piece = 0;          // first piece with Lambda <= 0
  // Touching point found inside the sign change; set for Archetype::Root.
  double r = 0.0;
  double g = 0.0;
  double s = 0.0;
  // Neighbouring pieces' atoms when r or s falls strictly between them.
  std::optional<Bracket> r_bracket;
  std::optional<Bracket> s_bracket;
};

UStar find_ustar(const CouplingTriple& triple, const PutPair& k);

/// The touching hedge from a root, with any bracketed strike spread over its
/// two atoms; throws Error(NoTwoPutHedge) otherwise.
HedgePortfolio build_hedge(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k, const UStar& ustar);

/// sum_mu ((K1 - x)^+ - psi(x))^+ + sum_nu psi(y) for psi a nonnegative put
/// portfolio. Throws Error(NotSuperhedge) unless psi >= (K2 - x)^+.
double dual_price(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k,
                  const std::vector<PutLeg>& psi);

/// Every member of the two-put family visited by dual_search, with costs.
std::vector<HedgePortfolio> two_put_candidates(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k);

/// Cheapest member of the two-put family over candidate strikes drawn from
/// the atoms of mu and nu and K2. OpenMP over the upper strike; the serial
/// version visits candidates in the same order and returns the same hedge.
HedgePortfolio dual_search(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k);
HedgePortfolio dual_search_serial(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k);

/// max{(K1 - w)^+, E_nu (K2 - Y)^+}.
double bhz_price_trivial(double w, const AtomicMeasure& nu, const PutPair& k);
/// As above for mu a point mass; throws Error(PointMassOnly) otherwise.
double bhz_price_trivial(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k);

struct PriceReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::optional<double> u_star;
  Archetype archetype = Archetype::AlwaysNegative;
  HedgePortfolio hedge;  // the cheapest hedge found
  std::optional<HedgePortfolio> root_hedge;
  std::optional<double> bhz;
  std::vector<bool> decisions;  // per piece, true = exercise at date 1
};

PriceReport price(const CouplingTriple& triple, const AtomicMeasure& mu, const AtomicMeasure& nu,
                  const PutPair& k);

}  // namespace lcurtain
