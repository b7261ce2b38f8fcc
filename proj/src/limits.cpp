#include "lcurtain/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lcurtain/coupling.hpp"
#include "lcurtain/error.hpp"
#include "lcurtain/transport.hpp"

namespace lcurtain {

namespace {

// Right-continuous quantile G(u+): the smallest x with F(x) > u.
double quantile_right(const AtomicMeasure& mu, double u) {
  double cum = 0.0;
  for (const Atom& a : mu.atoms()) {
    cum += a.mass;
    if (cum > u) return a.position;
  }
  return mu.upper();
}

double line_gap_min(const PutFunction& p, double x0, double y0, double slope) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.kink_count(); ++i) {
    gap = std::min(gap, p.value_at_kink(i) - (y0 + slope * (p.kink(i) - x0)));
  }
  return gap;
}

// A line lies strictly below a put function of total mass one when its slope
// is in (0, 1) and it passes strictly below every kink.
bool strictly_below(const PutFunction& p, double x0, double y0, double slope) {
  if (!(slope > 0.0 && slope < p.total_mass())) return false;
  return line_gap_min(p, x0, y0, slope) > 0.0;
}

}  // namespace

double tangent_point_K(const PutFunction& p_mu, const PutFunction& p_nu, double k) {
  const double p = p_mu(k);
  double best = std::numeric_limits<double>::infinity();
  double arg = k;
  for (std::size_t i = 0; i < p_nu.kink_count(); ++i) {
    const double kappa = p_nu.kink(i);
    if (kappa <= k + kMergeTol) continue;
    const double ratio = (p_nu.value_at_kink(i) - p) / (kappa - k);
    if (ratio <= best + 1e-13 * std::max(1.0, std::abs(ratio))) {
      best = std::min(best, ratio);
      arg = kappa;
    }
  }
  return arg;
}

double bound_J(const AtomicMeasure& mu, const AtomicMeasure& nu, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorKind::Domain, "u outside (0,1)");
  return tangent_point_K(PutFunction(mu), PutFunction(nu), quantile_right(mu, u));
}

std::optional<double> bound_j(const AtomicMeasure& mu, const AtomicMeasure& nu, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorKind::Domain, "u outside (0,1)");
  const PutFunction pm(mu), pn(nu);
  const double g = quantile(mu, u);
  const double pg = pm(g);
  const double h = g - pg / u;  // where the slope-u tangent to P_mu meets zero

  double scale = 1.0;
  for (double k : pn.kinks()) scale = std::max(scale, std::abs(k));
  const double tol = 1e-12 * scale;
  if (line_gap_min(pn, g, pg, u) <= tol) return std::nullopt;

  double eps = pn(h);
  bool found = false;
  for (int it = 0; it < 60 && eps > 0.0; ++it, eps *= 0.5) {
    if (u + eps < 1.0 && strictly_below(pn, h, eps, u + eps)) {
      found = true;
      break;
    }
  }
  if (!found) return std::nullopt;

  std::vector<double> cand(pm.kinks().begin(), pm.kinks().end());
  cand.insert(cand.end(), pn.kinks().begin(), pn.kinks().end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  for (auto it = cand.rbegin(); it != cand.rend(); ++it) {
    const double j = *it;
    const double sm = pm.derivative_left(j);
    const double sn = pn.derivative_left(j);
    if (!(sm < eps && sn < eps && sm < u)) continue;
    // Crossing of the tangent to P_mu at j with the slope-u tangent.
    const double gamma = (pg - u * g - pm(j) + sm * j) / (sm - u);
    if (gamma < h - tol) continue;
    const double l4 = pn(j) + sn * (gamma - j);
    const double l3 = pm(j) + sm * (gamma - j);
    if (!(l4 < eps && l3 < eps)) continue;
    if (!strictly_below(pn, gamma, l4, u + sn - sm)) continue;
    return j;
  }
  return nu.lower();
}

EnvelopeReport envelopes(const CouplingTriple& triple, const AtomicMeasure& mu, const AtomicMeasure& nu) {
  EnvelopeReport rep;
  const PutFunction pm(mu), pn(nu);
  for (std::size_t i = 0; i < triple.pieces.size(); ++i) {
    const Piece& p = triple.pieces[i];
    EnvelopePoint pt;
    pt.u = 0.5 * (p.u_lo + p.u_hi);
    pt.s = p.s;
    pt.r = p.r;
    pt.j_plus = tangent_point_K(pm, pn, quantile_right(mu, pt.u));
    if (quantile_right(mu, pt.u) < pt.s) pt.j = bound_j(mu, nu, pt.u);
    if (pt.s > pt.j_plus) {
      std::ostringstream os;
      os << "piece " << i << ": S = " << pt.s << " exceeds J+ = " << pt.j_plus;
      rep.violations.push_back(os.str());
    }
    if (pt.j && pt.r < *pt.j) {
      std::ostringstream os;
      os << "piece " << i << ": R = " << pt.r << " is below j = " << *pt.j;
      rep.violations.push_back(os.str());
    }
    rep.points.push_back(pt);
  }
  return rep;
}

namespace {

// Largest jump of G or S across a breakpoint within 1e-12 of u, or 0.
double jump_at(const CouplingTriple& t, double u) {
  double jump = 0.0;
  for (std::size_t i = 0; i + 1 < t.pieces.size(); ++i) {
    if (std::abs(t.pieces[i].u_hi - u) <= 1e-12) {
      const Piece& a = t.pieces[i];
      const Piece& b = t.pieces[i + 1];
      jump = std::max({jump, std::abs(b.g - a.g), std::abs(b.s - a.s)});
    }
  }
  return jump;
}

}  // namespace

ProbeReport convergence_probe(const QuantileSource& mu, const AtomicMeasure& nu,
                              const std::vector<std::size_t>& ns, std::size_t grid) {
  if (grid == 0) throw Error(ErrorKind::Domain, "probe grid must be positive");
  std::vector<std::size_t> order = ns;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  ProbeReport rep;
  std::vector<AtomicMeasure> mus;
  std::vector<CouplingTriple> triples;
  std::vector<std::size_t> built;  // indices into rep.levels
  for (std::size_t n : order) {
    ProbeLevel lvl;
    lvl.n = n;
    try {
      AtomicMeasure mn = discretize(mu, n);
      if (!convex_order_leq(mn, nu)) {
        lvl.skipped = true;
        lvl.diagnostic = "discretized law is not below nu in convex order";
      } else {
        CouplingTriple t = build_left_curtain(mn, nu);
        if (!t.certified()) {
          lvl.skipped = true;
          lvl.diagnostic = "triple failed certification: " + t.certificate.failures.front();
        } else {
          lvl.pieces = t.pieces.size();
          mus.push_back(std::move(mn));
          triples.push_back(std::move(t));
          built.push_back(rep.levels.size());
        }
      }
    } catch (const Error& e) {
      lvl.skipped = true;
      lvl.diagnostic = e.what();
    }
    rep.levels.push_back(lvl);
  }
  if (triples.empty()) return rep;

  std::vector<double> us(grid);
  for (std::size_t k = 0; k < grid; ++k) us[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);

  // A jump of the finest triple counts as a jump of the limit when the next
  // finest triple jumps at the same level by a comparable amount.
  const CouplingTriple& finest = triples.back();
  std::vector<bool> excluded(grid, false);
  for (std::size_t k = 0; k < grid; ++k) {
    const double jf = jump_at(finest, us[k]);
    if (jf <= 1e-9) continue;
    if (triples.size() == 1) {
      excluded[k] = true;
    } else {
      const double js = jump_at(triples[triples.size() - 2], us[k]);
      excluded[k] = std::min(jf, js) >= 0.5 * std::max(jf, js);
    }
    if (excluded[k]) rep.excluded.push_back(us[k]);
  }

  for (std::size_t b = 0; b < triples.size(); ++b) {
    const CouplingTriple& t = triples[b];
    ProbeLevel& lvl = rep.levels[built[b]];
    const PutFunction pm(mus[b]), pn(nu);
    std::size_t counted = 0;
    for (std::size_t k = 0; k < grid; ++k) {
      const Piece& p = t.piece_at(us[k]);
      ProbeRow row;
      row.n = lvl.n;
      row.u = us[k];
      row.s = p.s;
      row.g = p.g;
      row.r = p.r;
      row.j_plus = tangent_point_K(pm, pn, quantile_right(mus[b], us[k]));
      if (quantile_right(mus[b], us[k]) < p.s) row.j = bound_j(mus[b], nu, us[k]);
      row.excluded = excluded[k];
      rep.rows.push_back(row);
      if (excluded[k]) continue;
      const double ds = std::abs(p.s - finest.S(us[k]));
      const double dg = std::abs(p.g - finest.G(us[k]));
      lvl.mean_dev_s += ds;
      lvl.mean_dev_g += dg;
      lvl.max_dev_s = std::max(lvl.max_dev_s, ds);
      lvl.max_dev_g = std::max(lvl.max_dev_g, dg);
      ++counted;
    }
    if (counted > 0) {
      lvl.mean_dev_s /= static_cast<double>(counted);
      lvl.mean_dev_g /= static_cast<double>(counted);
    }
  }

  for (std::size_t b = 0; b + 1 < triples.size(); ++b) {
    rep.levels[built[b]].w1_to_next = wasserstein1(joint_law(triples[b]), joint_law(triples[b + 1]));
  }
  constexpr double slack = 1.1;
  for (std::size_t b = 0; b + 2 < triples.size(); ++b) {
    const double w0 = *rep.levels[built[b]].w1_to_next;
    const double w1 = *rep.levels[built[b + 1]].w1_to_next;
    if (w1 > slack * w0 + 1e-12) rep.w1_nonincreasing = false;
  }
  for (std::size_t b = 0; b + 2 < triples.size(); ++b) {
    const ProbeLevel& a = rep.levels[built[b]];
    const ProbeLevel& c = rep.levels[built[b + 1]];
    if (c.mean_dev_s > slack * a.mean_dev_s + 1e-12 || c.mean_dev_g > slack * a.mean_dev_g + 1e-12) {
      rep.deviations_shrink = false;
    }
  }
  return rep;
}

}  // namespace lcurtain
