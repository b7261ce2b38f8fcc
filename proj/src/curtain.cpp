#include "lcurtain/curtain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "lcurtain/coupling.hpp"
#include "lcurtain/error.hpp"

namespace lcurtain {

std::size_t CouplingTriple::piece_index(double u) const {
  if (pieces.empty()) throw Error(ErrorKind::EmptyMeasure, "triple has no pieces");
  auto it = std::lower_bound(pieces.begin(), pieces.end(), u,
                             [](const Piece& p, double v) { return p.u_hi < v; });
  if (it == pieces.end()) return pieces.size() - 1;
  return static_cast<std::size_t>(it - pieces.begin());
}

const Piece& CouplingTriple::piece_at(double u) const { return pieces[piece_index(u)]; }

namespace {

AtomicMeasure tail(const AtomicMeasure& mu, std::size_t from) {
  std::vector<Atom> atoms(mu.atoms().begin() + static_cast<std::ptrdiff_t>(from), mu.atoms().end());
  return AtomicMeasure(std::move(atoms));
}

void require_probability(const AtomicMeasure& m, const char* name) {
  if (std::abs(m.total_mass() - 1.0) > 1e-12) {
    std::ostringstream os;
    os << name << " has total mass " << m.total_mass() << ", expected 1";
    throw Error(ErrorKind::InvalidMeasure, os.str());
  }
}

}  // namespace

CouplingTriple build_left_curtain(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  require_probability(mu, "mu");
  require_probability(nu, "nu");
  if (!convex_order_leq(mu, nu)) {
    throw Error(ErrorKind::ConvexOrder, "marginals not in convex order");
  }

  CouplingTriple t;
  AtomicMeasure residual = nu;
  double offset = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Atom& atom = mu[i];
    EmbeddingResult res;
    try {
      res = embed_point_mass(residual, atom.position, atom.mass, offset);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "atom " << i << " at " << atom.position << ": " << e.what();
      throw Error(e.kind(), os.str());
    }
    for (const Segment& s : res.segments) {
      t.pieces.push_back({s.u_lo, s.u_hi, s.r, atom.position, s.s});
    }
    EmbeddingAudit a;
    a.atom_index = i;
    a.x = atom.position;
    a.mass = atom.mass;
    a.u_lo = offset;
    a.u_hi = offset + atom.mass;
    a.r_star = res.r_star;
    a.s_star = res.s_star;
    a.lambda_low = res.lambda_low;
    a.lambda_high = res.lambda_high;
    a.embedded = std::move(res.embedded);
    a.residual = res.residual;
    a.residual_convex_order = convex_order_leq(tail(mu, i + 1), res.residual);
    t.audit.push_back(std::move(a));
    residual = std::move(res.residual);
    offset += atom.mass;
  }
  if (!t.pieces.empty() && std::abs(t.pieces.back().u_hi - 1.0) <= 1e-12) t.pieces.back().u_hi = 1.0;
  t.certificate = certify(t, mu, nu);
  return t;
}

Certificate certify(const CouplingTriple& triple, const AtomicMeasure& mu, const AtomicMeasure& nu) {
  Certificate c;
  auto fail = [&c](const std::string& msg) { c.failures.push_back(msg); };
  const auto& ps = triple.pieces;

  if (ps.empty()) {
    fail("no pieces");
    return c;
  }
  if (ps.front().u_lo != 0.0) fail("first piece does not start at 0");
  if (std::abs(ps.back().u_hi - 1.0) > 1e-12) fail("last piece does not end at 1");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!(ps[i].u_hi > ps[i].u_lo)) fail("piece " + std::to_string(i) + " has nonpositive length");
    if (i > 0 && ps[i].u_lo != ps[i - 1].u_hi) fail("pieces " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not contiguous");
  }

  // Positions within kMergeTol are the same atom: a stay piece sits at the
  // atom of mu, which may differ from the matching atom of nu by rounding.
  constexpr double tol = kMergeTol;
  c.ordering_ok = true;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!(ps[i].r <= ps[i].g + tol && ps[i].g <= ps[i].s + tol)) {
      c.ordering_ok = false;
      fail("piece " + std::to_string(i) + " violates R <= G <= S");
    }
    if (i > 0 && ps[i].s < ps[i - 1].s - tol) {
      c.ordering_ok = false;
      fail("S decreases at piece " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < ps.size() && c.ordering_ok; ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      if (ps[i].r + tol < ps[j].r && ps[j].r < ps[i].s - tol) {
        c.ordering_ok = false;
        fail("R of piece " + std::to_string(j) + " lies inside (R, S) of piece " + std::to_string(i));
        break;
      }
    }
  }

  if (std::abs(mu.total_mass() - 1.0) <= 1e-12) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double mid = 0.5 * (ps[i].u_lo + ps[i].u_hi);
      if (mid > 0.0 && mid < 1.0 && quantile(mu, mid) != ps[i].g) {
        fail("G of piece " + std::to_string(i) + " differs from the quantile of mu");
        break;
      }
    }
  }

  const JointLaw law = pushforward(ps);
  c.first_marginal_tv = total_variation(law.first_marginal(), mu);
  c.marginal_tv = total_variation(law.second_marginal(), nu);
  if (c.first_marginal_tv > 1e-9) fail("first marginal differs from mu");
  if (c.marginal_tv > 1e-9) fail("second marginal differs from nu");

  std::map<double, std::pair<double, double>> by_x;  // x -> (mass, sum y*mass)
  for (const JointAtom& a : law.atoms) {
    auto& e = by_x[a.x];
    e.first += a.mass;
    e.second += a.y * a.mass;
  }
  for (const auto& [x, e] : by_x) {
    c.max_martingale_error = std::max(c.max_martingale_error, std::abs(e.second / e.first - x));
  }
  if (c.max_martingale_error > 1e-10) fail("conditional mean of Y differs from X");

  if (!triple.audit.empty()) {
    c.final_residual_mass = triple.audit.back().residual.total_mass();
    if (c.final_residual_mass > 1e-10) fail("nu is not exhausted");
    for (const EmbeddingAudit& a : triple.audit) {
      if (!a.residual_convex_order) {
        fail("residual convex order fails after atom " + std::to_string(a.atom_index));
      }
    }
  }

  c.ok = c.failures.empty();
  return c;
}

MassMeanCheck check_mass_mean(const CouplingTriple& triple, const AtomicMeasure& mu,
                              const AtomicMeasure& nu, double u) {
  const std::size_t idx = triple.piece_index(u);
  const Piece& cur = triple.pieces[idx];
  const double r = cur.r, g = cur.g, s = cur.s;

  MassMeanCheck out;
  double below_g = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (a.position < g - kMergeTol) below_g += a.mass;
    if (a.position > r + kMergeTol && a.position < g - kMergeTol) {
      out.lhs_mass += a.mass;
      out.lhs_mean += a.mass * a.position;
    }
  }
  const double used = u - below_g;
  out.lhs_mass += used;
  out.lhs_mean += used * g;

  for (const Atom& a : nu.atoms()) {
    if (a.position > r + kMergeTol && a.position < s - kMergeTol) {
      out.rhs_mass += a.mass;
      out.rhs_mean += a.mass * a.position;
    }
  }
  auto land = [&](double y, double m) {
    if (y == r || y == s) {
      out.rhs_mass += m;
      out.rhs_mean += m * y;
    }
  };
  for (std::size_t k = 0; k <= idx; ++k) {
    const Piece& p = triple.pieces[k];
    if (!(p.g > r || p.g == g)) continue;
    const double len = (k == idx ? u : p.u_hi) - p.u_lo;
    if (len <= 0.0) continue;
    if (p.g == p.s) {
      land(p.g, len);
    } else {
      land(p.r, len * (p.s - p.g) / (p.s - p.r));
      land(p.s, len * (p.g - p.r) / (p.s - p.r));
    }
  }
  return out;
}

std::vector<FgEntry> fg_view(const CouplingTriple& triple) {
  std::vector<FgEntry> out;
  for (const Piece& p : triple.pieces) {
    if (out.empty() || out.back().x != p.g) out.push_back({p.g, {}});
    auto& fg = out.back().fg;
    const std::pair<double, double> rs{p.r, p.s};
    if (std::find(fg.begin(), fg.end(), rs) == fg.end()) fg.push_back(rs);
  }
  return out;
}

}  // namespace lcurtain
