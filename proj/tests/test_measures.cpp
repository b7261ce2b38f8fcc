#include <doctest.h>

#include <random>

#include "lcurtain/error.hpp"
#include "lcurtain/measures.hpp"
#include "support/oracles.hpp"

using namespace lcurtain;
using doctest::Approx;

namespace {

const AtomicMeasure three({{-2, 0.25}, {0, 0.5}, {2, 0.25}});
const AtomicMeasure sym2({{-2, 0.5}, {2, 0.5}});
const AtomicMeasure sym1({{-1, 0.5}, {1, 0.5}});

bool same(const AtomicMeasure& a, const AtomicMeasure& b, double tol = 1e-12) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].position - b[i].position) > tol || std::abs(a[i].mass - b[i].mass) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("construction sorts, merges and drops null atoms") {
  const AtomicMeasure m({{1, 0.25}, {-1, 0.5}, {1 + 1e-13, 0.25}, {3, 0.0}});
  REQUIRE(m.size() == 2);
  CHECK(m[0].position == -1);
  CHECK(m[1].mass == Approx(0.5));
  CHECK_THROWS_AS(AtomicMeasure({{0, -0.1}}), Error);
  CHECK_THROWS_AS(AtomicMeasure({{0, 0.7}, {1, 0.7}}), Error);
  CHECK_THROWS_AS(AtomicMeasure({{std::nan(""), 0.5}}), Error);
}

TEST_CASE("put_value") {
  CHECK(put_value(AtomicMeasure::point_mass(0), 0) == 0.0);
  CHECK(put_value(sym2, 0) == Approx(1.0));
  CHECK(put_value(three, 2) == Approx(2.0));
  CHECK(put_value(three, -5) == 0.0);
  const PutFunction p(three);
  CHECK(p.derivative_left(0) == Approx(0.25));
  CHECK(p.derivative_right(0) == Approx(0.75));
  CHECK(p(10) == Approx(10.0));
}

TEST_CASE("barycentre") {
  CHECK(barycentre(AtomicMeasure::point_mass(3.5)) == 3.5);
  CHECK(barycentre(sym2) == Approx(0.0));
  CHECK(barycentre(AtomicMeasure({{-2, 0.125}, {2, 0.375}})) == Approx(1.0));
  CHECK_THROWS_AS(barycentre(AtomicMeasure()), Error);
}

TEST_CASE("quantile is left-continuous") {
  CHECK(quantile(AtomicMeasure::point_mass(4), 0.3) == 4);
  CHECK(quantile(sym1, 0.5) == -1);
  CHECK(quantile(sym1, 0.5000001) == 1);
  CHECK(quantile(three, 0.8) == 2);
  CHECK_THROWS_AS(quantile(three, 0.0), Error);
  CHECK_THROWS_AS(quantile(three, 1.0), Error);
}

TEST_CASE("convex order") {
  CHECK(convex_order_leq(three, three));
  CHECK(convex_order_leq(AtomicMeasure::point_mass(0), sym1));
  CHECK(convex_order_leq(sym1, sym2));
  CHECK_FALSE(convex_order_leq(sym2, sym1));
  CHECK_FALSE(convex_order_leq(AtomicMeasure::point_mass(0.1), sym1));
}

TEST_CASE("subtract") {
  CHECK(subtract(three, three).empty());
  CHECK(same(subtract(sym2, AtomicMeasure({{-2, 0.375}, {2, 0.125}})), AtomicMeasure({{-2, 0.125}, {2, 0.375}})));
  CHECK_THROWS_AS(subtract(AtomicMeasure::point_mass(0, 0.5), AtomicMeasure::point_mass(0, 1.0)), Error);
}

TEST_CASE("discretize") {
  CHECK(same(discretize(QuantileSource::measure(AtomicMeasure::point_mass(2)), 7), AtomicMeasure::point_mass(2)));
  CHECK(same(discretize(QuantileSource::uniform(0, 2), 2), AtomicMeasure({{0.5, 0.5}, {1.5, 0.5}})));
  CHECK(same(discretize(QuantileSource::uniform(0, 2), 4),
             AtomicMeasure({{0.25, 0.25}, {0.75, 0.25}, {1.25, 0.25}, {1.75, 0.25}})));
  // Quadrature route agrees with the closed form.
  const auto f = QuantileSource::function([](double u) { return 2.0 * u; });
  CHECK(same(discretize(f, 8), discretize(QuantileSource::uniform(0, 2), 8), 1e-10));
  CHECK_THROWS_AS(discretize(QuantileSource::function([](double u) { return 1.0 / u; }), 4), Error);
  const auto s = discretize(QuantileSource::samples({3, 1, 2, 4}), 2);
  CHECK(same(s, AtomicMeasure({{1.5, 0.5}, {3.5, 0.5}})));
}

TEST_CASE("discretize refines monotonically on nested bins") {
  const auto src = QuantileSource::function([](double u) { return std::log(u / (1 - u)); });
  AtomicMeasure prev = discretize(src, 1);
  for (std::size_t n = 2; n <= 256; n *= 2) {
    const AtomicMeasure next = discretize(src, n);
    CHECK(convex_order_leq(prev, next));
    CHECK(barycentre(next) == Approx(0.0).epsilon(1e-10));
    prev = next;
  }
}

TEST_CASE("put function properties on random measures") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pr = oracle::random_pair(rng, trial % 2 == 0);
    const AtomicMeasure& m = pr.nu;
    const PutFunction p(m);
    // Convex at consecutive kinks, and matches the defining sum.
    for (std::size_t i = 0; i + 2 < p.kink_count(); ++i) {
      const double s1 = (p.value_at_kink(i + 1) - p.value_at_kink(i)) / (p.kink(i + 1) - p.kink(i));
      const double s2 = (p.value_at_kink(i + 2) - p.value_at_kink(i + 1)) / (p.kink(i + 2) - p.kink(i + 1));
      CHECK(s1 <= s2 + 1e-12);
    }
    for (double k = m.lower() - 1; k <= m.upper() + 1; k += 0.37) CHECK(p(k) == Approx(oracle::put(m, k)).epsilon(1e-12));
    // Beyond the support P(k) = (k - mean)^+ exactly for a probability law.
    const double mean = barycentre(m);
    CHECK(std::abs(p(m.upper()) - (m.upper() - mean)) <= 1e-12 * std::max(1.0, std::abs(m.upper())));
    // Quantile / put duality: P(G(u)) against the partial-expectation sum.
    for (double u = 0.05; u < 1; u += 0.1) {
      const double g = quantile(m, u);
      CHECK(g == oracle::quantile(m, u));
      double partial = 0.0;
      for (const Atom& a : m.atoms()) if (a.position < g) partial += a.mass * (g - a.position);
      CHECK(p(g) == Approx(partial).epsilon(1e-12));
    }
    CHECK(convex_order_leq(pr.mu, pr.nu) == oracle::convex_leq(pr.mu, pr.nu));
  }
}
