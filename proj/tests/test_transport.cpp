#include <doctest.h>

#include <algorithm>
#include <random>

#include "lcurtain/error.hpp"
#include "lcurtain/transport.hpp"
#include "support/oracles.hpp"

using namespace lcurtain;
using doctest::Approx;

namespace {

// W1 on the line: integral of |F_a - F_b|.
double line_w1(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b) {
  std::vector<std::pair<double, double>> ev;
  for (const auto& p : a) ev.emplace_back(p.x, p.mass);
  for (const auto& p : b) ev.emplace_back(p.x, -p.mass);
  std::sort(ev.begin(), ev.end());
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    diff += ev[i].second;
    total += std::abs(diff) * (ev[i + 1].first - ev[i].first);
  }
  return total;
}

std::vector<WeightedPoint> random_cloud(std::mt19937_64& rng, std::size_t n, bool on_line) {
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<WeightedPoint> out;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({4 * unit(rng) - 2, on_line ? 0.0 : 4 * unit(rng) - 2, 0.1 + unit(rng)});
    total += out.back().mass;
  }
  for (auto& p : out) p.mass /= total;
  return out;
}

}  // namespace

TEST_CASE("points on a line match the closed form") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = random_cloud(rng, 1 + trial % 23, true);
    const auto b = random_cloud(rng, 1 + (trial * 7) % 31, true);
    CHECK(wasserstein1(a, b) == Approx(line_w1(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("equal masses in the plane match the best matching") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 6;
    std::uniform_real_distribution<double> unit(-1, 1);
    std::vector<std::pair<double, double>> pa, pb;
    std::vector<WeightedPoint> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      pa.emplace_back(unit(rng), unit(rng));
      pb.emplace_back(unit(rng), unit(rng));
      a.push_back({pa.back().first, pa.back().second, 1.0 / static_cast<double>(n)});
      b.push_back({pb.back().first, pb.back().second, 1.0 / static_cast<double>(n)});
    }
    CHECK(wasserstein1(a, b) == Approx(oracle::matching_w1(pa, pb)).epsilon(1e-10));
  }
}

TEST_CASE("plan is feasible and degenerate problems terminate") {
  // Many ties: integer grid points with equal masses.
  std::vector<WeightedPoint> a, b;
  for (int i = 0; i < 12; ++i) a.push_back({static_cast<double>(i % 4), static_cast<double>(i / 4), 1.0 / 12});
  for (int i = 0; i < 12; ++i) b.push_back({static_cast<double>((i + 1) % 4), static_cast<double>(i / 4), 1.0 / 12});
  std::vector<double> sa(12, 1.0 / 12), sb(12, 1.0 / 12);
  const TransportSolution sol = solve_transport(sa, sb, cost_matrix(a, b));
  std::vector<double> out(12, 0.0), in(12, 0.0);
  for (const auto& f : sol.plan) {
    out[f.src] += f.amount;
    in[f.dst] += f.amount;
  }
  for (int i = 0; i < 12; ++i) {
    CHECK(out[i] == Approx(1.0 / 12));
    CHECK(in[i] == Approx(1.0 / 12));
  }
  CHECK(sol.cost == Approx(wasserstein1(a, b)));
  CHECK(wasserstein1(a, a) == Approx(0.0));
}

TEST_CASE("cost matrix kernels agree") {
  std::mt19937_64 rng(3);
  const auto a = random_cloud(rng, 57, false);
  const auto b = random_cloud(rng, 43, false);
  CHECK(cost_matrix(a, b) == cost_matrix_serial(a, b));
}

TEST_CASE("input checks") {
  CHECK_THROWS_AS(solve_transport({0.5, 0.5}, {0.2}, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(solve_transport({0.5}, {0.5}, {1.0, 2.0}), Error);
}
