#include "lcurtain/single_atom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "lcurtain/error.hpp"
#include "lcurtain/io.hpp"

namespace lcurtain {

namespace {

constexpr double kTieTol = 1e-13;

struct Split {
  std::size_t below_end = 0;    // kinks [0, below_end) lie strictly below w
  std::size_t above_begin = 0;  // kinks [above_begin, n) lie strictly above w
  bool atom = false;
};

Split split_at(const PutFunction& put, double w) {
  const auto k = put.kinks();
  Split s;
  s.below_end = static_cast<std::size_t>(std::lower_bound(k.begin(), k.end(), w - kMergeTol) - k.begin());
  s.above_begin = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), w + kMergeTol) - k.begin());
  s.atom = s.above_begin > s.below_end;
  return s;
}

void check_p(const PutFunction& put, double w, double p) {
  const double pw = put(w);
  if (!(p >= -kMergeTol && p <= pw + kMergeTol * std::max(1.0, pw))) {
    std::ostringstream os;
    os << "p = " << p << " outside [0, P(w)] = [0, " << pw << "]";
    throw Error(ErrorKind::Domain, os.str());
  }
}

}  // namespace

Tangent tangent_right(const PutFunction& put, double w, double p) {
  check_p(put, w, p);
  const Split sp = split_at(put, w);
  const double pw = put(w);
  if (sp.atom && p >= pw - kMergeTol) return {w, put.slope_right(sp.above_begin - 1)};
  if (sp.above_begin == put.kink_count()) {
    throw Error(ErrorKind::TargetExhausted, "no target mass above w");
  }
  Tangent best{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = sp.above_begin; i < put.kink_count(); ++i) {
    const double k = put.kink(i);
    const double ratio = (put.value_at_kink(i) - p) / (k - w);
    if (ratio < best.slope - kTieTol * std::max(1.0, std::abs(ratio))) best = {k, ratio};
  }
  return best;
}

Tangent tangent_left(const PutFunction& put, double w, double p) {
  check_p(put, w, p);
  const Split sp = split_at(put, w);
  const double pw = put(w);
  if (sp.atom && p >= pw - kMergeTol) return {w, put.slope_left(sp.below_end)};
  if (sp.below_end == 0) {
    throw Error(ErrorKind::TargetExhausted, "no target mass below w");
  }
  Tangent best{0.0, -std::numeric_limits<double>::infinity()};
  for (std::size_t i = sp.below_end; i-- > 0;) {
    const double k = put.kink(i);
    const double ratio = (p - put.value_at_kink(i)) / (w - k);
    if (ratio > best.slope + kTieTol * std::max(1.0, std::abs(ratio))) best = {k, ratio};
  }
  return best;
}

UpsilonNode UpsilonTable::at(double p) const {
  if (nodes.size() == 1 || p >= nodes.back().p) return nodes.back();
  if (p <= nodes.front().p) return nodes.front();
  auto it = std::upper_bound(nodes.begin(), nodes.end(), p,
                             [](double v, const UpsilonNode& n) { return v < n.p; });
  const UpsilonNode& lo = *(it - 1);
  const UpsilonNode& hi = *it;
  const double t = (p - lo.p) / (hi.p - lo.p);
  UpsilonNode out = lo;
  out.p = p;
  out.a = lo.a + t * (hi.a - lo.a);
  out.b = lo.b + t * (hi.b - lo.b);
  out.upsilon = lo.upsilon + t * (hi.upsilon - lo.upsilon);
  return out;
}

UpsilonTable build_upsilon(const AtomicMeasure& target, double w) {
  if (!(target.total_mass() > 0.0)) throw Error(ErrorKind::EmptyMeasure, "empty target");
  if (w < target.lower() - kMergeTol || w > target.upper() + kMergeTol) {
    std::ostringstream os;
    os << "w = " << w << " outside the target support [" << target.lower() << ", " << target.upper() << "]";
    throw Error(ErrorKind::TargetExhausted, os.str());
  }
  const PutFunction put(target);
  const Split sp = split_at(put, w);
  const std::size_t n = put.kink_count();

  UpsilonTable t;
  t.w = w;
  t.p_max = put(w);
  t.atom_mass = sp.atom ? target[sp.below_end].mass : 0.0;
  const double slope_above = put.slope_left(sp.above_begin);  // P'(w+)
  const double slope_below = put.slope_left(sp.below_end);    // P'(w-)

  UpsilonNode end;
  end.p = t.p_max;
  end.alpha = sp.atom || sp.above_begin == n ? w : put.kink(sp.above_begin);
  end.beta = sp.atom || sp.below_end == 0 ? w : put.kink(sp.below_end - 1);
  end.a = slope_above;
  end.b = slope_below;
  end.upsilon = t.atom_mass;

  if (sp.below_end == 0 || sp.above_begin == n || !(t.p_max > 0.0)) {
    // Nothing to sweep on one side: only the atom at w can be embedded.
    t.nodes.push_back(end);
    return t;
  }

  // Intercepts at w of the left tangent at each kink above w (decreasing in
  // the kink) and of the right tangent at each kink below w. alpha = k_i on
  // [h_{i+1}, h_i) and beta = j_t on [g_{t+1}, g_t).
  const std::size_t m_above = n - sp.above_begin;
  const std::size_t m_below = sp.below_end;
  std::vector<double> h(m_above), g(m_below);
  for (std::size_t i = 0; i < m_above; ++i) {
    const std::size_t idx = sp.above_begin + i;
    h[i] = put.value_at_kink(idx) - put.slope_left(idx) * (put.kink(idx) - w);
  }
  for (std::size_t i = 0; i < m_below; ++i) {
    const std::size_t idx = sp.below_end - 1 - i;
    g[i] = put.value_at_kink(idx) + put.slope_right(idx) * (w - put.kink(idx));
  }
  h[0] = t.p_max;
  g[0] = t.p_max;

  // Collinear kinks give intercepts that agree up to rounding. Snap them to
  // one breakpoint (and to 0 or P(w) at the ends) so that ties resolve to the
  // kink nearest w, and keep both sequences nonincreasing.
  const double snap = 1e-14 * std::max({1.0, std::abs(target.lower()), std::abs(target.upper())});
  std::vector<double> ps{0.0};
  for (std::size_t i = 1; i < m_above; ++i) ps.push_back(h[i]);
  for (std::size_t i = 1; i < m_below; ++i) ps.push_back(g[i]);
  std::sort(ps.begin(), ps.end());
  std::vector<double> breaks{0.0};
  for (double p : ps) {
    if (p >= t.p_max - snap) break;
    if (p > breaks.back() + snap) breaks.push_back(p);
  }
  auto snapped = [&](double v) {
    if (v >= t.p_max - snap) return t.p_max;
    auto it = std::lower_bound(breaks.begin(), breaks.end(), v - snap);
    return it != breaks.end() && *it <= v + snap ? *it : v;
  };
  for (std::size_t i = 1; i < m_above; ++i) h[i] = std::min(snapped(h[i]), h[i - 1]);
  for (std::size_t i = 1; i < m_below; ++i) g[i] = std::min(snapped(g[i]), g[i - 1]);
  ps = std::move(breaks);

  std::size_t ia = m_above - 1;
  std::size_t ib = m_below - 1;
  t.nodes.reserve(ps.size() + 1);
  for (double p : ps) {
    while (ia > 0 && h[ia] <= p) --ia;
    while (ib > 0 && g[ib] <= p) --ib;
    const std::size_t ka = sp.above_begin + ia;
    const std::size_t kb = sp.below_end - 1 - ib;
    UpsilonNode node;
    node.p = p;
    node.alpha = put.kink(ka);
    node.beta = put.kink(kb);
    node.a = (put.value_at_kink(ka) - p) / (node.alpha - w);
    node.b = (p - put.value_at_kink(kb)) / (w - node.beta);
    node.upsilon = node.a - node.b;
    t.nodes.push_back(node);
  }
  t.nodes.push_back(end);
  for (std::size_t k = 1; k < t.nodes.size(); ++k) {
    t.nodes[k].upsilon = std::min(t.nodes[k].upsilon, t.nodes[k - 1].upsilon);
  }
  return t;
}

void write_upsilon_csv(std::ostream& os, const UpsilonTable& table) {
  os << "p,alpha,beta,a,b,upsilon\n";
  for (const UpsilonNode& n : table.nodes) {
    os << fmt17(n.p) << ',' << fmt17(n.alpha) << ',' << fmt17(n.beta) << ',' << fmt17(n.a) << ','
       << fmt17(n.b) << ',' << fmt17(n.upsilon) << '\n';
  }
}

namespace {

// Clips a boundary mass into [0, available] when it misses by rounding only.
double clip_boundary(double value, double available, const char* side) {
  constexpr double tol = 1e-10;
  if (value < -tol || value > available + tol) {
    std::ostringstream os;
    os << "boundary mass " << value << " at the " << side << " end is outside [0, " << available << "]";
    throw Error(ErrorKind::DegenerateBoundary, os.str());
  }
  return std::clamp(value, 0.0, available);
}

}  // namespace

EmbeddingResult embed_point_mass(const AtomicMeasure& target, double w, double lambda, double u_offset) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::Domain, "embedding weight must be positive");
  const UpsilonTable table = build_upsilon(target, w);

  EmbeddingResult res;
  res.upsilon_zero = table.upsilon_at_zero();
  if (lambda > res.upsilon_zero + 1e-9) {
    std::ostringstream os;
    os << "weight " << lambda << " at " << w << " exceeds the embeddable mass " << res.upsilon_zero;
    throw Error(ErrorKind::AtomTooHeavy, os.str());
  }

  std::vector<Segment> local;
  const double atom_end = std::max(0.0, table.upsilon_at_end());
  if (atom_end > 0.0) local.push_back({0.0, std::min(lambda, atom_end), w, w});
  for (std::size_t k = table.nodes.size() - 1; k-- > 0;) {
    const double lo = table.nodes[k + 1].upsilon;
    if (lo >= lambda) break;
    const double hi = std::min(table.nodes[k].upsilon, lambda);
    if (hi > lo) local.push_back({lo, hi, table.nodes[k].beta, table.nodes[k].alpha});
  }
  if (local.empty()) {
    throw Error(ErrorKind::AtomTooHeavy, "nothing in the target can absorb the atom");
  }
  // Upsilon(0) may undershoot lambda by rounding; the last run absorbs it.
  local.back().u_hi = lambda;

  // Runs shorter than the spacing of doubles near u_offset vanish once
  // shifted; their neighbour takes over the range.
  for (const Segment& s : local) {
    const double lo = res.segments.empty() ? u_offset : res.segments.back().u_hi;
    const double hi = u_offset + s.u_hi;
    if (hi > lo) res.segments.push_back({lo, hi, s.r, s.s});
  }
  if (res.segments.empty()) res.segments.push_back({u_offset, u_offset + lambda, local.back().r, local.back().s});
  res.segments.back().u_hi = u_offset + lambda;
  res.r_star = local.back().r;
  res.s_star = local.back().s;

  if (res.r_star == res.s_star) {
    const double available = target.mass_at(w);
    const double m = lambda > available && lambda - available <= 1e-10 ? available : lambda;
    res.lambda_low = m;
    res.lambda_high = 0.0;
    res.embedded = AtomicMeasure::point_mass(w, m);
  } else {
    std::vector<Atom> inside;
    double m0 = 0.0, m1 = 0.0;
    for (const Atom& a : target.atoms()) {
      if (a.position > res.r_star + kMergeTol && a.position < res.s_star - kMergeTol) {
        inside.push_back(a);
        m0 += a.mass;
        m1 += a.mass * a.position;
      }
    }
    // Mass and mean balance fix the two boundary masses.
    const double rem_mass = lambda - m0;
    const double rem_moment = lambda * w - m1;
    const double high = (rem_moment - rem_mass * res.r_star) / (res.s_star - res.r_star);
    const double low = rem_mass - high;
    res.lambda_high = clip_boundary(high, target.mass_at(res.s_star), "upper");
    res.lambda_low = clip_boundary(low, target.mass_at(res.r_star), "lower");
    if (res.lambda_low > 0.0) inside.push_back({res.r_star, res.lambda_low});
    if (res.lambda_high > 0.0) inside.push_back({res.s_star, res.lambda_high});
    res.embedded = AtomicMeasure(std::move(inside));
  }
  res.residual = subtract(target, res.embedded);
  return res;
}

}  // namespace lcurtain
