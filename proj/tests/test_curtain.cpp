#include <doctest.h>

#include <random>

#include "lcurtain/curtain.hpp"
#include "lcurtain/error.hpp"
#include "support/oracles.hpp"

using namespace lcurtain;
using doctest::Approx;

namespace {

const AtomicMeasure three({{-2, 0.25}, {0, 0.5}, {2, 0.25}});
const AtomicMeasure sym2({{-2, 0.5}, {2, 0.5}});
const AtomicMeasure sym1({{-1, 0.5}, {1, 0.5}});

void check_pieces(const CouplingTriple& t, const std::vector<Piece>& want) {
  REQUIRE(t.pieces.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(t.pieces[i].u_lo == Approx(want[i].u_lo));
    CHECK(t.pieces[i].u_hi == Approx(want[i].u_hi));
    CHECK(t.pieces[i].r == want[i].r);
    CHECK(t.pieces[i].g == want[i].g);
    CHECK(t.pieces[i].s == want[i].s);
  }
}

}  // namespace

TEST_CASE("fixtures") {
  SUBCASE("identity") {
    const CouplingTriple t = build_left_curtain(three, three);
    CHECK(t.certified());
    for (const Piece& p : t.pieces) {
      CHECK(p.r == p.g);
      CHECK(p.s == p.g);
    }
  }
  SUBCASE("point mass into three points") {
    const CouplingTriple t = build_left_curtain(AtomicMeasure::point_mass(0), three);
    CHECK(t.certified());
    check_pieces(t, {{0, 0.5, 0, 0, 0}, {0.5, 1, -2, 0, 2}});
  }
  SUBCASE("two atoms into two atoms") {
    const CouplingTriple t = build_left_curtain(sym1, sym2);
    CHECK(t.certified());
    check_pieces(t, {{0, 0.5, -2, -1, 2}, {0.5, 1, -2, 1, 2}});
    REQUIRE(t.audit.size() == 2);
    CHECK(total_variation(t.audit[0].residual, AtomicMeasure({{-2, 0.125}, {2, 0.375}})) <= 1e-12);
    CHECK(t.audit[1].residual.empty());
  }
  SUBCASE("not in convex order") {
    CHECK_THROWS_AS(build_left_curtain(sym2, sym1), Error);
    try {
      build_left_curtain(sym2, sym1);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConvexOrder);
    }
  }
}

TEST_CASE("check_mass_mean") {
  const CouplingTriple id = build_left_curtain(three, three);
  for (double u : {0.1, 0.5, 0.9}) {
    const MassMeanCheck c = check_mass_mean(id, three, three, u);
    CHECK(c.lhs_mass == Approx(c.rhs_mass));
    CHECK(c.lhs_mean == Approx(c.rhs_mean));
  }
  const AtomicMeasure d0 = AtomicMeasure::point_mass(0);
  const MassMeanCheck c3 = check_mass_mean(build_left_curtain(d0, three), d0, three, 0.75);
  // Used share of the atom at 0 is 3/4; on the right the open interval
  // (-2, 2) holds 1/2 and the endpoints have received 1/8 each so far.
  CHECK(c3.lhs_mass == Approx(0.75));
  CHECK(c3.rhs_mass == Approx(0.75));
  CHECK(c3.lhs_mean == Approx(0.0));
  CHECK(c3.rhs_mean == Approx(0.0));
  const MassMeanCheck c2 = check_mass_mean(build_left_curtain(sym1, sym2), sym1, sym2, 0.5);
  CHECK(std::abs(c2.lhs_mass - c2.rhs_mass) <= 1e-12);
  CHECK(std::abs(c2.lhs_mean - c2.rhs_mean) <= 1e-12);
}

TEST_CASE("fg_view") {
  const auto id = fg_view(build_left_curtain(three, three));
  for (const FgEntry& e : id) {
    REQUIRE(e.fg.size() == 1);
    CHECK(e.fg[0].first == e.x);
    CHECK(e.fg[0].second == e.x);
  }
  const auto v3 = fg_view(build_left_curtain(AtomicMeasure::point_mass(0), three));
  REQUIRE(v3.size() == 1);
  CHECK(v3[0].multivalued());
  CHECK(v3[0].fg == std::vector<std::pair<double, double>>{{0, 0}, {-2, 2}});
  const auto v2 = fg_view(build_left_curtain(sym1, sym2));
  REQUIRE(v2.size() == 2);
  CHECK(v2[0].fg == std::vector<std::pair<double, double>>{{-2, 2}});
  CHECK(v2[1].fg == std::vector<std::pair<double, double>>{{-2, 2}});
}

TEST_CASE("certify catches a broken triple") {
  CouplingTriple t = build_left_curtain(sym1, sym2);
  t.pieces[1].r = 0.5;  // inside (R, S) of piece 0
  const Certificate c = certify(t, sym1, sym2);
  CHECK_FALSE(c.ok);
  CHECK_FALSE(c.ordering_ok);
  CouplingTriple u = build_left_curtain(sym1, sym2);
  u.pieces[0].s = 3;
  CHECK_FALSE(certify(u, sym1, sym2).ok);
}

TEST_CASE("atoms of mu and nu that agree only up to rounding") {
  // 0.03 is an atom of both laws, computed along different routes.
  const AtomicMeasure mu = discretize(QuantileSource::uniform(0, 2), 100);
  const AtomicMeasure nu = discretize(QuantileSource::uniform(-1, 3), 200);
  const CouplingTriple t = build_left_curtain(mu, nu);
  CHECK(t.certified());
  CHECK(oracle::tv(oracle::second_marginal(t), nu) <= 1e-9);
}

TEST_CASE("random instances: invariants against oracles") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pr = oracle::random_pair(rng, trial % 2 == 0);
    const CouplingTriple t = build_left_curtain(pr.mu, pr.nu);
    CHECK(t.certified());
    CHECK(oracle::left_monotone(t));
    CHECK(oracle::tv(oracle::second_marginal(t), pr.nu) <= 1e-9);
    CHECK(oracle::max_martingale_error(t) <= 1e-10);
    // G is the quantile step function of mu.
    for (const Piece& p : t.pieces) CHECK(p.g == oracle::quantile(pr.mu, 0.5 * (p.u_lo + p.u_hi)));
    // Residual convex order after each atom, via the oracle.
    for (const EmbeddingAudit& a : t.audit) {
      std::vector<Atom> rest(pr.mu.atoms().begin() + static_cast<std::ptrdiff_t>(a.atom_index + 1), pr.mu.atoms().end());
      CHECK(oracle::convex_leq(AtomicMeasure(rest), a.residual, 1e-10));
    }
    const double scale = std::max({1.0, std::abs(pr.nu.lower()), std::abs(pr.nu.upper())});
    for (const Piece& p : t.pieces) {
      const MassMeanCheck c = check_mass_mean(t, pr.mu, pr.nu, 0.5 * (p.u_lo + p.u_hi));
      CHECK(std::abs(c.lhs_mass - c.rhs_mass) <= 1e-9);
      CHECK(std::abs(c.lhs_mean - c.rhs_mean) <= 1e-9 * scale);
    }
  }
}
