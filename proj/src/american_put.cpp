#include "lcurtain/american_put.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lcurtain/error.hpp"

namespace lcurtain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pos(double x) { return x > 0.0 ? x : 0.0; }

void require_certified(const CouplingTriple& t) {
  if (!t.certified()) throw Error(ErrorKind::Uncertified, "pricing needs a certified triple");
}

PiecePrice price_piece(const Piece& p, const PutPair& k) {
  PiecePrice out;
  out.immediate = pos(k.k1 - p.g);
  if (p.g == p.s) {
    out.continuation = pos(k.k2 - p.g);
  } else {
    out.continuation = (pos(k.k2 - p.r) * (p.s - p.g) + pos(k.k2 - p.s) * (p.g - p.r)) / (p.s - p.r);
  }
  out.exercise = out.immediate >= out.continuation;
  return out;
}

}  // namespace

void validate(const PutPair& k) {
  if (!std::isfinite(k.k1) || !std::isfinite(k.k2) || !(k.k2 < k.k1)) {
    std::ostringstream os;
    os << "strikes violate K2<K1 (K1 = " << k.k1 << ", K2 = " << k.k2 << ")";
    throw Error(ErrorKind::InvalidStrikes, os.str());
  }
}

namespace {

void push_leg(std::vector<PutLeg>& out, double strike, double weight, const std::optional<Bracket>& b) {
  if (!(weight > 0.0)) return;
  if (!b) {
    out.push_back({strike, weight});
    return;
  }
  const double lam = (b->above - strike) / (b->above - b->below);
  if (lam > 0.0) out.push_back({b->below, weight * lam});
  if (lam < 1.0) out.push_back({b->above, weight * (1.0 - lam)});
}

}  // namespace

std::vector<PutLeg> HedgePortfolio::legs() const {
  std::vector<PutLeg> out;
  push_leg(out, strike_high, theta, high_bracket);
  push_leg(out, strike_low, 1.0 - theta, low_bracket);
  return out;
}

double HedgePortfolio::psi(double x) const {
  double v = 0.0;
  for (const PutLeg& leg : legs()) v += leg.weight * pos(leg.strike - x);
  return v;
}

ModelPrice model_price(const CouplingTriple& triple, const PutPair& k) {
  validate(k);
  require_certified(triple);
  ModelPrice out;
  out.pieces.reserve(triple.pieces.size());
  for (const Piece& p : triple.pieces) {
    const PiecePrice pp = price_piece(p, k);
    out.price += p.length() * std::max(pp.immediate, pp.continuation);
    out.pieces.push_back(pp);
  }
  return out;
}

std::vector<std::pair<double, double>> threshold_profile(const CouplingTriple& triple, const PutPair& k) {
  validate(k);
  require_certified(triple);
  const std::size_t m = triple.pieces.size();
  std::vector<double> imm(m + 1, 0.0), cont(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const PiecePrice pp = price_piece(triple.pieces[i], k);
    imm[i + 1] = imm[i] + triple.pieces[i].length() * pp.immediate;
    cont[i + 1] = cont[i] + triple.pieces[i].length() * pp.continuation;
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(m + 1);
  out.emplace_back(0.0, cont[m]);
  for (std::size_t i = 0; i < m; ++i) {
    out.emplace_back(triple.pieces[i].u_hi, imm[i + 1] + (cont[m] - cont[i + 1]));
  }
  return out;
}

double lambda_rgs(double r, double g, double s, const PutPair& k) {
  if (g >= k.k1) return -kInf;
  if (s <= k.k1 || r >= k.k2 || r == g) return kInf;
  return (k.k1 - g) / (s - g) - ((k.k2 - r) - (k.k1 - g)) / (g - r);
}

double lambda_bar(const CouplingTriple& triple, const PutPair& k, double u) {
  validate(k);
  const Piece& p = triple.piece_at(u);
  return lambda_rgs(p.r, p.g, p.s, k);
}

const char* to_string(Archetype a) {
  switch (a) {
    case Archetype::Root: return "root";
    case Archetype::AlwaysNegative: return "always-negative";
    case Archetype::AlwaysPositive: return "always-positive";
    case Archetype::Jump: return "jump";
  }
  return "unknown";
}

UStar find_ustar(const CouplingTriple& triple, const PutPair& k) {
  validate(k);
  const auto& ps = triple.pieces;
  UStar out;
  std::vector<bool> positive(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) positive[i] = lambda_rgs(ps[i].r, ps[i].g, ps[i].s, k) > 0.0;

  const bool all_pos = std::all_of(positive.begin(), positive.end(), [](bool b) { return b; });
  const bool none_pos = std::none_of(positive.begin(), positive.end(), [](bool b) { return b; });
  if (all_pos) {
    out.archetype = Archetype::AlwaysPositive;
    out.piece = ps.size();
    return out;
  }
  if (none_pos) {
    out.archetype = Archetype::AlwaysNegative;
    return out;
  }
  if (!positive[0]) {
    out.archetype = Archetype::Jump;
    return out;
  }
  const std::size_t kk = static_cast<std::size_t>(std::find(positive.begin(), positive.end(), false) - positive.begin());
  out.piece = kk;
  out.u_star = ps[kk].u_lo;
  const Piece& a = ps[kk - 1];
  const Piece& b = ps[kk];
  if (a.g != b.g) {
    out.archetype = Archetype::Jump;
    return out;
  }

  // Inside one atom R decreases and S increases, and Lambda is decreasing in
  // s and increasing in r. Walk from (R_a, S_a) to (R_a, S_b), then to
  // (R_b, S_b); Lambda crosses zero on exactly one of the two legs.
  out.archetype = Archetype::Root;
  const double g = b.g;
  out.g = g;
  // The crossing rarely lands on an atom of nu; the hedge then spreads that
  // strike over the atoms of the two pieces around it.
  if (lambda_rgs(a.r, g, b.s, k) <= 0.0) {
    const double c_r = ((k.k2 - a.r) - (k.k1 - g)) / (g - a.r);
    out.r = a.r;
    out.s = std::clamp(g + (k.k1 - g) / c_r, a.s, b.s);
    if (out.s > a.s && out.s < b.s) out.s_bracket = Bracket{a.s, b.s};
  } else {
    const double c = (k.k1 - g) / (b.s - g);
    out.s = b.s;
    out.r = std::clamp(g - (k.k1 - k.k2) / (1.0 - c), b.r, std::min(a.r, k.k2));
    if (out.r > b.r && out.r < a.r) out.r_bracket = Bracket{b.r, a.r};
  }
  return out;
}

double dual_price(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k,
                  const std::vector<PutLeg>& psi) {
  validate(k);
  double total_weight = 0.0;
  double lowest = k.k2;
  double scale = std::abs(k.k2);
  for (const PutLeg& leg : psi) {
    if (!std::isfinite(leg.strike) || !std::isfinite(leg.weight) || leg.weight < 0.0) {
      throw Error(ErrorKind::NotSuperhedge, "put portfolio legs need finite strikes and nonnegative weights");
    }
    total_weight += leg.weight;
    lowest = std::min(lowest, leg.strike);
    scale = std::max(scale, std::abs(leg.strike));
  }
  auto value = [&psi](double x) {
    double v = 0.0;
    for (const PutLeg& leg : psi) v += leg.weight * pos(leg.strike - x);
    return v;
  };
  // psi and (K2 - x)^+ are piecewise linear with kinks at the strikes and K2;
  // checking there, one point further left and the slope at -infinity covers
  // the whole line.
  const double tol = 1e-10 * std::max(1.0, scale);
  std::vector<double> checks{k.k2, lowest - 1.0};
  for (const PutLeg& leg : psi) checks.push_back(leg.strike);
  for (double x : checks) {
    if (value(x) < pos(k.k2 - x) - tol) {
      std::ostringstream os;
      os << "psi(" << x << ") = " << value(x) << " is below (K2 - x)^+ = " << pos(k.k2 - x);
      throw Error(ErrorKind::NotSuperhedge, os.str());
    }
  }
  if (total_weight < 1.0 - 1e-12) throw Error(ErrorKind::NotSuperhedge, "psi grows slower than (K2 - x) on the left");

  double d = 0.0;
  for (const Atom& a : mu.atoms()) d += a.mass * pos(pos(k.k1 - a.position) - value(a.position));
  for (const Atom& a : nu.atoms()) d += a.mass * value(a.position);
  return d;
}

namespace {

struct SearchContext {
  const AtomicMeasure& mu;
  PutFunction pn;
  PutPair k;
  std::vector<double> positions;
};

SearchContext make_context(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k) {
  SearchContext ctx{mu, PutFunction(nu), k, {}};
  for (const Atom& a : mu.atoms()) ctx.positions.push_back(a.position);
  for (const Atom& a : nu.atoms()) ctx.positions.push_back(a.position);
  ctx.positions.push_back(k.k2);
  std::sort(ctx.positions.begin(), ctx.positions.end());
  ctx.positions.erase(std::unique(ctx.positions.begin(), ctx.positions.end()), ctx.positions.end());
  return ctx;
}

double family_cost(const SearchContext& c, double theta, double r, double s) {
  double d = theta * c.pn(s) + (1.0 - theta) * c.pn(r);
  for (const Atom& a : c.mu.atoms()) {
    const double psi = theta * pos(s - a.position) + (1.0 - theta) * pos(r - a.position);
    d += a.mass * pos(pos(c.k.k1 - a.position) - psi);
  }
  return d;
}

HedgePortfolio two_put(const SearchContext& c, double theta, double r, double s) {
  HedgePortfolio h;
  h.theta = theta;
  h.strike_low = r;
  h.strike_high = s;
  h.cost = family_cost(c, theta, r, s);
  return h;
}

HedgePortfolio canonical(const SearchContext& c) { return two_put(c, 1.0, c.k.k2, c.k.k2); }

// Candidates with upper strike positions[si], in a fixed order: touching at
// each lower strike r < K2, then touching at each atom g of mu below K1.
template <typename Visit>
void visit_upper_strike(const SearchContext& c, std::size_t si, Visit&& visit) {
  const double s = c.positions[si];
  if (s <= c.k.k2) return;
  for (double r : c.positions) {
    if (r >= c.k.k2) break;
    const double theta = (c.k.k2 - r) / (s - r);
    visit(two_put(c, theta, r, s));
  }
  if (s <= c.k.k1) return;
  for (const Atom& a : c.mu.atoms()) {
    const double g = a.position;
    if (g >= c.k.k1) break;
    const double theta = (c.k.k1 - g) / (s - g);
    if (!(theta < 1.0)) continue;
    const double r = (c.k.k2 - theta * s) / (1.0 - theta);
    visit(two_put(c, theta, r, s));
  }
}

}  // namespace

std::vector<HedgePortfolio> two_put_candidates(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k) {
  validate(k);
  const SearchContext c = make_context(mu, nu, k);
  std::vector<HedgePortfolio> out{canonical(c)};
  for (std::size_t si = 0; si < c.positions.size(); ++si) {
    visit_upper_strike(c, si, [&out](const HedgePortfolio& h) { out.push_back(h); });
  }
  return out;
}

HedgePortfolio dual_search_serial(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k) {
  validate(k);
  const SearchContext c = make_context(mu, nu, k);
  HedgePortfolio best = canonical(c);
  for (std::size_t si = 0; si < c.positions.size(); ++si) {
    visit_upper_strike(c, si, [&best](const HedgePortfolio& h) {
      if (h.cost < best.cost) best = h;
    });
  }
  return best;
}

HedgePortfolio dual_search(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k) {
  validate(k);
  const SearchContext c = make_context(mu, nu, k);
  const std::size_t n = c.positions.size();
  std::vector<HedgePortfolio> per_s(n);
  std::vector<char> has(n, 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
    const auto idx = static_cast<std::size_t>(si);
    visit_upper_strike(c, idx, [&](const HedgePortfolio& h) {
      if (!has[idx] || h.cost < per_s[idx].cost) {
        per_s[idx] = h;
        has[idx] = 1;
      }
    });
  }
  // Reduce in candidate order so ties resolve as in the serial search.
  HedgePortfolio best = canonical(c);
  for (std::size_t si = 0; si < n; ++si) {
    if (has[si] && per_s[si].cost < best.cost) best = per_s[si];
  }
  return best;
}

HedgePortfolio build_hedge(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k, const UStar& ustar) {
  validate(k);
  if (ustar.archetype != Archetype::Root) {
    throw Error(ErrorKind::NoTwoPutHedge, std::string("no two-put hedge; use dual_search (archetype ") +
                                               to_string(ustar.archetype) + ")");
  }
  HedgePortfolio h;
  h.theta = (k.k1 - ustar.g) / (ustar.s - ustar.g);
  h.strike_low = ustar.r;
  h.strike_high = ustar.s;
  h.low_bracket = ustar.r_bracket;
  h.high_bracket = ustar.s_bracket;
  h.cost = dual_price(mu, nu, k, h.legs());
  return h;
}

double bhz_price_trivial(double w, const AtomicMeasure& nu, const PutPair& k) {
  validate(k);
  return std::max(pos(k.k1 - w), PutFunction(nu)(k.k2));
}

double bhz_price_trivial(const AtomicMeasure& mu, const AtomicMeasure& nu, const PutPair& k) {
  if (mu.size() != 1) throw Error(ErrorKind::PointMassOnly, "BHZ implemented for point-mass mu only");
  return bhz_price_trivial(mu[0].position, nu, k);
}

PriceReport price(const CouplingTriple& triple, const AtomicMeasure& mu, const AtomicMeasure& nu,
                  const PutPair& k) {
  PriceReport rep;
  const ModelPrice mp = model_price(triple, k);
  rep.primal = mp.price;
  for (const PiecePrice& p : mp.pieces) rep.decisions.push_back(p.exercise);
  const UStar us = find_ustar(triple, k);
  rep.archetype = us.archetype;
  rep.u_star = us.u_star;
  rep.hedge = dual_search(mu, nu, k);
  if (us.archetype == Archetype::Root) {
    rep.root_hedge = build_hedge(mu, nu, k, us);
    if (rep.root_hedge->cost <= rep.hedge.cost) rep.hedge = *rep.root_hedge;
  }
  rep.dual = rep.hedge.cost;
  rep.gap = rep.dual - rep.primal;
  if (mu.size() == 1) rep.bhz = bhz_price_trivial(mu, nu, k);
  return rep;
}

}  // namespace lcurtain
