#include "lcurtain/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lcurtain/error.hpp"

namespace lcurtain {

AtomicMeasure JointLaw::first_marginal() const {
  std::vector<Atom> a;
  a.reserve(atoms.size());
  for (const JointAtom& j : atoms) a.push_back({j.x, j.mass});
  return AtomicMeasure(std::move(a));
}

AtomicMeasure JointLaw::second_marginal() const {
  std::vector<Atom> a;
  a.reserve(atoms.size());
  for (const JointAtom& j : atoms) a.push_back({j.y, j.mass});
  return AtomicMeasure(std::move(a));
}

double JointLaw::total_mass() const {
  double s = 0.0;
  for (const JointAtom& j : atoms) s += j.mass;
  return s;
}

double y_of(const CouplingTriple& triple, double u, double v) {
  const Piece& p = triple.piece_at(u);
  if (p.g == p.s) return p.g;
  return v <= (p.s - p.g) / (p.s - p.r) ? p.r : p.s;
}

JointLaw pushforward(const std::vector<Piece>& pieces) {
  JointLaw law;
  law.atoms.reserve(2 * pieces.size());
  for (const Piece& p : pieces) {
    const double len = p.length();
    if (p.g == p.s) {
      law.atoms.push_back({p.g, p.g, len});
      continue;
    }
    const double down = len * (p.s - p.g) / (p.s - p.r);
    const double up = len * (p.g - p.r) / (p.s - p.r);
    if (down > 0.0) law.atoms.push_back({p.g, p.r, down});
    if (up > 0.0) law.atoms.push_back({p.g, p.s, up});
  }
  std::sort(law.atoms.begin(), law.atoms.end(), [](const JointAtom& a, const JointAtom& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<JointAtom> merged;
  merged.reserve(law.atoms.size());
  for (const JointAtom& a : law.atoms) {
    if (!merged.empty() && merged.back().x == a.x && merged.back().y == a.y) {
      merged.back().mass += a.mass;
    } else {
      merged.push_back(a);
    }
  }
  law.atoms = std::move(merged);
  return law;
}

JointLaw joint_law(const CouplingTriple& triple) {
  if (!triple.certified()) throw Error(ErrorKind::Uncertified, "joint law requested for an uncertified triple");
  return pushforward(triple.pieces);
}

JointLaw joint_law(const CouplingTriple& triple, const AtomicMeasure& mu) {
  JointLaw law = joint_law(triple);
  if (total_variation(law.first_marginal(), mu) > 1e-9) {
    throw Error(ErrorKind::Uncertified, "triple does not have mu as first marginal");
  }
  return law;
}

double transport_cost(const CouplingTriple& triple) {
  double cost = 0.0;
  for (const Piece& p : triple.pieces) {
    if (p.s > p.g) cost += p.length() * (p.s - p.g) * (p.g - p.r) / (p.s - p.r);
  }
  return cost;
}

double mean_abs_displacement(const JointLaw& law) {
  double s = 0.0;
  for (const JointAtom& a : law.atoms) s += std::abs(a.y - a.x) * a.mass;
  return s;
}

namespace {

constexpr std::size_t kBlock = std::size_t{1} << 16;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_unit(std::uint64_t x) { return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53; }

void fill_block(const CouplingTriple& t, std::uint64_t seed, std::size_t block,
                std::vector<SamplePair>& out) {
  const std::size_t begin = block * kBlock;
  const std::size_t end = std::min(out.size(), begin + kBlock);
  std::mt19937_64 rng(splitmix64(seed + (static_cast<std::uint64_t>(block) + 1) * kGolden));
  for (std::size_t i = begin; i < end; ++i) {
    const double u = open_unit(rng());
    const double v = open_unit(rng());
    const Piece& p = t.piece_at(u);
    double y = p.g;
    if (p.g != p.s) y = v <= (p.s - p.g) / (p.s - p.r) ? p.r : p.s;
    out[i] = {p.g, y};
  }
}

}  // namespace

std::vector<SamplePair> sample_serial(const CouplingTriple& triple, std::uint64_t seed, std::size_t n) {
  std::vector<SamplePair> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  for (std::size_t b = 0; b < blocks; ++b) fill_block(triple, seed, b, out);
  return out;
}

std::vector<SamplePair> sample(const CouplingTriple& triple, std::uint64_t seed, std::size_t n) {
  std::vector<SamplePair> out(n);
  const auto blocks = static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) fill_block(triple, seed, static_cast<std::size_t>(b), out);
  return out;
}

}  // namespace lcurtain
