// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lcurtain/american_put.hpp"
#include "lcurtain/coupling.hpp"
#include "lcurtain/curtain.hpp"
#include "lcurtain/io.hpp"
#include "lcurtain/limits.hpp"
#include "support/oracles.hpp"

using namespace lcurtain;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Instance {
  oracle::Pair pair;
  CouplingTriple triple;
  PutPair strikes;
};

// E|Y - X| summed straight from the pieces.
double dispersion(const CouplingTriple& t) {
  double e = 0.0;
  for (const Piece& p : t.pieces) {
    if (p.s == p.g) continue;
    const double len = p.u_hi - p.u_lo;
    e += len * ((p.g - p.r) * (p.s - p.g) + (p.s - p.g) * (p.g - p.r)) / (p.s - p.r);
  }
  return e;
}

void uniform_instance() {
  const auto t0 = std::chrono::steady_clock::now();
  const AtomicMeasure mu = AtomicMeasure::point_mass(1);
  const AtomicMeasure nu = discretize(QuantileSource::uniform(0, 2), 2000);
  const PutPair k{1.25, 1.0};
  const CouplingTriple t = build_left_curtain(mu, nu);
  const ModelPrice mp = model_price(t, k);
  const UStar us = find_ustar(t, k);
  double dual = std::nan("");
  if (us.archetype == Archetype::Root) dual = build_hedge(mu, nu, k, us).cost;
  const double bhz = bhz_price_trivial(mu, nu, k);
  const double elapsed = seconds_since(t0);

  const double ustar = us.u_star ? *us.u_star : std::nan("");
  const bool ok = std::abs(mp.price - 0.3125) <= 0.002 && std::abs(dual - 0.3125) <= 0.002 &&
                  std::abs(ustar - 0.5) <= 0.002 && std::abs(bhz - 0.25) <= 0.002 && elapsed < 1.0;
  report(1, ok, "uniform put instance",
         "primal " + fmt17(mp.price) + ", dual " + fmt17(dual) + ", u* " + fmt17(ustar) + ", bhz " + fmt17(bhz) +
             ", " + num(elapsed) + "s");

  double dev_r = 0.0, dev_s = 0.0;
  for (const Piece& p : t.pieces) {
    const double u = 0.5 * (p.u_lo + p.u_hi);
    dev_r = std::max(dev_r, std::abs(p.r - (1 - u)));
    dev_s = std::max(dev_s, std::abs(p.s - (1 + u)));
  }
  report(2, dev_r <= 0.002 && dev_s <= 0.002, "closed-form R and S",
         "max |R - (1-u)| " + num(dev_r) + ", max |S - (1+u)| " + num(dev_s) + " over " +
             std::to_string(t.pieces.size()) + " pieces");
}

void random_instances() {
  std::mt19937_64 rng(20240601);
  std::vector<Instance> cases;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) {
    // Every fifth instance starts from a point mass.
    oracle::Pair pr = oracle::random_pair(rng, i % 2 == 0, i % 5 == 0 ? 1 : 10, 40);
    CouplingTriple t = build_left_curtain(pr.mu, pr.nu);
    std::uniform_real_distribution<double> pos(pr.nu.lower() - 0.5, pr.nu.upper() + 0.5);
    double a = pos(rng), b = pos(rng);
    if (a == b) b -= 0.25;
    cases.push_back({std::move(pr), std::move(t), {std::max(a, b), std::min(a, b)}});
  }
  double worst_tv = 0.0, worst_mart = 0.0;
  bool certified = true;
  std::size_t max_mu = 0, max_nu = 0;
  for (const Instance& c : cases) {
    certified = certified && c.triple.certified();
    worst_tv = std::max(worst_tv, oracle::tv(oracle::second_marginal(c.triple), c.pair.nu));
    worst_mart = std::max(worst_mart, oracle::max_martingale_error(c.triple));
    max_mu = std::max(max_mu, c.pair.mu.size());
    max_nu = std::max(max_nu, c.pair.nu.size());
  }
  const double elapsed = seconds_since(t0);
  report(3, certified && worst_tv <= 1e-9 && worst_mart <= 1e-10 && elapsed < 5.0, "marginal law",
         "100 pairs (mu <= " + std::to_string(max_mu) + ", nu <= " + std::to_string(max_nu) + " atoms), max TV " +
             num(worst_tv) + ", max |E[Y|X]-X| " + num(worst_mart) + ", " + num(elapsed) + "s");

  int monotone = 0;
  for (const Instance& c : cases) monotone += oracle::left_monotone(c.triple);
  report(4, monotone == 100, "left-monotonicity", std::to_string(monotone) + "/100 triples");

  int steps = 0, good_steps = 0;
  for (const Instance& c : cases) {
    for (const EmbeddingAudit& a : c.triple.audit) {
      ++steps;
      const auto& atoms = c.pair.mu.atoms();
      std::vector<Atom> rest(atoms.begin() + static_cast<std::ptrdiff_t>(a.atom_index + 1), atoms.end());
      const AtomicMeasure remaining(rest);
      good_steps += convex_order_leq(remaining, a.residual) && oracle::convex_leq(remaining, a.residual, 1e-10);
    }
  }
  report(5, steps > 0 && good_steps == steps, "residual convex order",
         std::to_string(good_steps) + "/" + std::to_string(steps) + " embedding steps");

  double worst_disp = 0.0, worst_point = 0.0;
  int point_masses = 0;
  for (const Instance& c : cases) {
    const double two_i = 2 * transport_cost(c.triple);
    worst_disp = std::max(worst_disp, std::abs(dispersion(c.triple) - two_i));
    worst_disp = std::max(worst_disp, std::abs(mean_abs_displacement(joint_law(c.triple)) - two_i));
    if (c.pair.mu.size() == 1) {
      ++point_masses;
      worst_point = std::max(worst_point, std::abs(two_i - 2 * oracle::put(c.pair.nu, c.pair.mu[0].position)));
    }
  }
  report(6, worst_disp <= 1e-10 && worst_point <= 1e-10 && point_masses > 0, "dispersion identity",
         "max |E|Y-X| - 2I| " + num(worst_disp) + "; " + std::to_string(point_masses) +
             " point-mass cases, max |2I - 2P(w)| " + num(worst_point));

  int s_checks = 0, s_bad = 0, r_checks = 0, r_bad = 0;
  for (const Instance& c : cases) {
    for (const Piece& p : c.triple.pieces) {
      const double u = 0.5 * (p.u_lo + p.u_hi);
      ++s_checks;
      s_bad += p.s > bound_J(c.pair.mu, c.pair.nu, u);
      if (p.g < p.s) {
        if (const auto j = bound_j(c.pair.mu, c.pair.nu, u)) {
          ++r_checks;
          r_bad += p.r < *j;
        }
      }
    }
  }
  report(7, s_bad == 0 && r_bad == 0 && r_checks > 0, "envelopes",
         "S <= J+ at " + std::to_string(s_checks - s_bad) + "/" + std::to_string(s_checks) + " midpoints, R >= j at " +
             std::to_string(r_checks - r_bad) + "/" + std::to_string(r_checks) + " applicable midpoints");

  double worst_weak = -std::numeric_limits<double>::infinity(), worst_root_gap = 0.0;
  int roots = 0, hedges = 0;
  for (const Instance& c : cases) {
    const double primal = model_price(c.triple, c.strikes).price;
    for (const HedgePortfolio& h : two_put_candidates(c.pair.mu, c.pair.nu, c.strikes)) {
      ++hedges;
      worst_weak = std::max(worst_weak, primal - dual_price(c.pair.mu, c.pair.nu, c.strikes, h.legs()));
    }
    const PriceReport rep = price(c.triple, c.pair.mu, c.pair.nu, c.strikes);
    worst_weak = std::max(worst_weak, primal - rep.dual);
    if (rep.archetype == Archetype::Root) {
      ++roots;
      worst_root_gap = std::max(worst_root_gap, rep.gap);
    }
  }
  report(8, worst_weak <= 1e-8 && worst_root_gap <= 1e-8 && roots > 0, "weak and strong duality",
         "max primal - dual " + num(worst_weak) + " over " + std::to_string(hedges) + " hedges; " +
             std::to_string(roots) + " root instances, max gap " + num(worst_root_gap));
}

void probe() {
  const AtomicMeasure nu = discretize(QuantileSource::uniform(-1, 3), 200);
  const ProbeReport rep = convergence_probe(QuantileSource::uniform(0, 2), nu, {10, 100, 1000}, 200);
  bool built = rep.levels.size() == 3;
  std::string detail;
  for (const ProbeLevel& l : rep.levels) {
    built = built && !l.skipped;
    detail += "n=" + std::to_string(l.n) + ": dev S " + num(l.mean_dev_s) + ", dev G " + num(l.mean_dev_g);
    if (l.w1_to_next) detail += ", W1 next " + num(*l.w1_to_next);
    detail += "; ";
  }
  const bool shrink = rep.levels.size() == 3 && rep.levels[0].mean_dev_s > rep.levels[1].mean_dev_s &&
                      rep.levels[0].mean_dev_g > rep.levels[1].mean_dev_g;
  detail += std::to_string(rep.excluded.size()) + " excluded grid points";
  report(9, built && rep.w1_nonincreasing && rep.deviations_shrink && shrink, "convergence probe", detail);
}

void monte_carlo() {
  const AtomicMeasure nu({{-2, 0.25}, {0, 0.5}, {2, 0.25}});
  const CouplingTriple t = build_left_curtain(AtomicMeasure::point_mass(0), nu);
  const std::size_t n = 1000000;
  const auto t0 = std::chrono::steady_clock::now();
  const auto draws = sample(t, 12345, n);
  std::size_t below[3] = {0, 0, 0};
  for (const auto& [x, y] : draws) {
    if (y == -2) ++below[0];
    else if (y == 0) ++below[1];
    else ++below[2];
  }
  const double elapsed = seconds_since(t0);
  const double p0 = static_cast<double>(below[1]) / static_cast<double>(n);
  // Empirical CDF against F_nu at its jumps (the sup is attained there).
  const double f1 = static_cast<double>(below[0]) / static_cast<double>(n);
  const double f2 = static_cast<double>(below[0] + below[1]) / static_cast<double>(n);
  const double ks = std::max(std::abs(f1 - 0.25), std::abs(f2 - 0.75));

  std::ostringstream a, b;
  write_samples_csv(a, draws);
  write_samples_csv(b, sample(t, 12345, n));
  const bool identical = a.str() == b.str();
  report(10, p0 >= 0.498 && p0 <= 0.502 && ks <= 0.005 && identical && elapsed < 2.0, "Monte Carlo",
         "P(Y=0) " + fmt17(p0) + ", sup CDF distance " + num(ks) + ", reruns " +
             (identical ? "byte-identical" : "differ") + ", " + num(elapsed) + "s");
}

}  // namespace

int main() {
  uniform_instance();
  random_instances();
  probe();
  monte_carlo();
  std::printf("%s\n", failures == 0 ? "ALL PASS" : (std::to_string(failures) + " FAILED").c_str());
  return failures == 0 ? 0 : 1;
}
