#include "lcurtain/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lcurtain/error.hpp"

namespace lcurtain {

namespace {

// Mass and moment comparisons scale with the size of the numbers involved,
// otherwise measures living far from the origin fail on rounding alone.
double scaled_tol(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.position) || !std::isfinite(a.mass) || a.mass < 0.0) {
      std::ostringstream os;
      os << "atom (" << a.position << ", " << a.mass << ") is not a finite nonnegative mass";
      throw Error(ErrorKind::InvalidMeasure, os.str());
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& l, const Atom& r) { return l.position < r.position; });
  atoms_.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (a.mass == 0.0) continue;
    if (!atoms_.empty() && a.position - atoms_.back().position <= kMergeTol) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
  if (total_mass() > 1.0 + 1e-12) {
    throw Error(ErrorKind::InvalidMeasure, "total mass exceeds one");
  }
}

AtomicMeasure AtomicMeasure::point_mass(double position, double mass) {
  return AtomicMeasure({{position, mass}});
}

double AtomicMeasure::total_mass() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.mass;
  return s;
}

double AtomicMeasure::first_moment() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.position * a.mass;
  return s;
}

double AtomicMeasure::lower() const {
  if (atoms_.empty()) throw Error(ErrorKind::EmptyMeasure, "lower() of an empty measure");
  return atoms_.front().position;
}

double AtomicMeasure::upper() const {
  if (atoms_.empty()) throw Error(ErrorKind::EmptyMeasure, "upper() of an empty measure");
  return atoms_.back().position;
}

double AtomicMeasure::mass_at(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x - kMergeTol,
                             [](const Atom& a, double v) { return a.position < v; });
  if (it != atoms_.end() && std::abs(it->position - x) <= kMergeTol) return it->mass;
  return 0.0;
}

PutFunction::PutFunction(const AtomicMeasure& measure) {
  const std::size_t n = measure.size();
  kinks_.resize(n);
  values_.resize(n);
  cum_mass_.assign(n + 1, 0.0);
  cum_moment_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = measure[i];
    kinks_[i] = a.position;
    cum_mass_[i + 1] = cum_mass_[i] + a.mass;
    cum_moment_[i + 1] = cum_moment_[i] + a.mass * a.position;
  }
  // Accumulate values kink to kink; this avoids the cancellation in
  // x*M - X when the support sits far from the origin.
  for (std::size_t i = 1; i < n; ++i) {
    values_[i] = values_[i - 1] + cum_mass_[i] * (kinks_[i] - kinks_[i - 1]);
  }
}

double PutFunction::operator()(double k) const {
  auto j = static_cast<std::size_t>(std::upper_bound(kinks_.begin(), kinks_.end(), k) - kinks_.begin());
  if (j == 0) return 0.0;
  return values_[j - 1] + cum_mass_[j] * (k - kinks_[j - 1]);
}

double PutFunction::derivative_left(double k) const {
  auto j = std::lower_bound(kinks_.begin(), kinks_.end(), k) - kinks_.begin();
  return cum_mass_[static_cast<std::size_t>(j)];
}

double PutFunction::derivative_right(double k) const {
  auto j = std::upper_bound(kinks_.begin(), kinks_.end(), k) - kinks_.begin();
  return cum_mass_[static_cast<std::size_t>(j)];
}

double put_value(const AtomicMeasure& measure, double k) {
  double s = 0.0;
  for (const Atom& a : measure.atoms()) {
    if (a.position < k) s += a.mass * (k - a.position);
  }
  return s;
}

double barycentre(const AtomicMeasure& measure) {
  const double m = measure.total_mass();
  if (!(m > 0.0)) throw Error(ErrorKind::EmptyMeasure, "barycentre of an empty measure");
  return measure.first_moment() / m;
}

double quantile(const AtomicMeasure& measure, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorKind::Domain, "quantile level outside (0,1)");
  if (std::abs(measure.total_mass() - 1.0) > 1e-12) {
    throw Error(ErrorKind::Domain, "quantile of a measure without unit mass");
  }
  double cum = 0.0;
  for (const Atom& a : measure.atoms()) {
    cum += a.mass;
    if (cum >= u) return a.position;
  }
  return measure.upper();
}

bool convex_order_leq(const AtomicMeasure& eta, const AtomicMeasure& chi) {
  if (eta.empty() && chi.empty()) return true;
  const double m_eta = eta.total_mass();
  const double m_chi = chi.total_mass();
  if (std::abs(m_eta - m_chi) > 1e-12) return false;
  if (eta.empty() || chi.empty()) return m_eta <= 1e-12 && m_chi <= 1e-12;

  double scale = 0.0;
  for (const Atom& a : eta.atoms()) scale = std::max(scale, std::abs(a.position));
  for (const Atom& a : chi.atoms()) scale = std::max(scale, std::abs(a.position));
  if (std::abs(eta.first_moment() - chi.first_moment()) > scaled_tol(1e-12, scale)) return false;

  const PutFunction pe(eta);
  const PutFunction pc(chi);
  const double tol = scaled_tol(1e-12, scale);
  for (double k : pe.kinks()) {
    if (pe(k) > pc(k) + tol) return false;
  }
  for (double k : pc.kinks()) {
    if (pe(k) > pc(k) + tol) return false;
  }
  return true;
}

AtomicMeasure subtract(const AtomicMeasure& eta, const AtomicMeasure& zeta) {
  std::vector<Atom> out;
  out.reserve(eta.size());
  std::size_t j = 0;
  for (const Atom& a : eta.atoms()) {
    while (j < zeta.size() && zeta[j].position < a.position - kMergeTol) {
      if (zeta[j].mass > kMergeTol) {
        std::ostringstream os;
        os << "subtracted mass " << zeta[j].mass << " at " << zeta[j].position << " has no atom to absorb it";
        throw Error(ErrorKind::NotDominated, os.str());
      }
      ++j;
    }
    double m = a.mass;
    if (j < zeta.size() && std::abs(zeta[j].position - a.position) <= kMergeTol) {
      m -= zeta[j].mass;
      ++j;
    }
    if (m < -kMergeTol) {
      std::ostringstream os;
      os << "subtracted mass exceeds available mass at " << a.position;
      throw Error(ErrorKind::NotDominated, os.str());
    }
    if (m > kMergeTol) out.push_back({a.position, m});
  }
  for (; j < zeta.size(); ++j) {
    if (zeta[j].mass > kMergeTol) {
      std::ostringstream os;
      os << "subtracted mass " << zeta[j].mass << " at " << zeta[j].position << " has no atom to absorb it";
      throw Error(ErrorKind::NotDominated, os.str());
    }
  }
  return AtomicMeasure(std::move(out));
}

double total_variation(const AtomicMeasure& eta, const AtomicMeasure& chi) {
  double tv = 0.0;
  std::size_t i = 0, j = 0;
  while (i < eta.size() || j < chi.size()) {
    if (j == chi.size() || (i < eta.size() && eta[i].position < chi[j].position - kMergeTol)) {
      tv += eta[i++].mass;
    } else if (i == eta.size() || chi[j].position < eta[i].position - kMergeTol) {
      tv += chi[j++].mass;
    } else {
      tv += std::abs(eta[i++].mass - chi[j++].mass);
    }
  }
  return tv;
}

// ---------------------------------------------------------------------------
// Quantile sources

struct QuantileSource::Impl {
  virtual ~Impl() = default;
  virtual double quantile(double u) const = 0;
  virtual double integral(double lo, double hi) const = 0;
  // Conditional mean of bin i out of n; sources with a closed form override.
  virtual double bin_mean(std::size_t i, std::size_t n) const {
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    return integral(lo, hi) * static_cast<double>(n);
  }
};

namespace {

struct UniformSource final : QuantileSource::Impl {
  double a, b;
  UniformSource(double a_, double b_) : a(a_), b(b_) {}
  double quantile(double u) const override { return a + (b - a) * u; }
  double integral(double lo, double hi) const override {
    return a * (hi - lo) + 0.5 * (b - a) * (hi * hi - lo * lo);
  }
  double bin_mean(std::size_t i, std::size_t n) const override {
    return a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  }
};

// Step quantile with levels cum[j] (cum[0]=0, cum.back()=1) and values v[j].
struct StepSource final : QuantileSource::Impl {
  std::vector<double> cum;
  std::vector<double> values;

  double quantile(double u) const override {
    auto it = std::lower_bound(cum.begin() + 1, cum.end(), u);
    if (it == cum.end()) return values.back();
    return values[static_cast<std::size_t>(it - cum.begin() - 1)];
  }

  double integral(double lo, double hi) const override {
    // Direct summation over the overlapped steps; differencing primitives
    // would lose digits for narrow bins.
    double s = 0.0;
    auto first = std::upper_bound(cum.begin(), cum.end(), lo) - cum.begin();
    for (auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(first - 1, 0)); j < values.size(); ++j) {
      const double l = std::max(lo, cum[j]);
      const double h = std::min(hi, cum[j + 1]);
      if (l >= hi) break;
      if (h > l) s += values[j] * (h - l);
    }
    return s;
  }
};

// Empirical law of m sorted samples; bin integrals from prefix sums.
struct SampleSource final : QuantileSource::Impl {
  std::vector<double> values;
  std::vector<double> prefix;  // prefix[j] = sum of values[0..j-1]

  double quantile(double u) const override {
    const double m = static_cast<double>(values.size());
    auto j = static_cast<std::size_t>(std::ceil(u * m));
    j = std::clamp<std::size_t>(j, 1, values.size());
    return values[j - 1];
  }

  double primitive(double t) const {
    const double m = static_cast<double>(values.size());
    const double pos = t * m;
    auto j = static_cast<std::size_t>(std::floor(pos));
    if (j >= values.size()) return prefix.back() / m;
    return (prefix[j] + (pos - static_cast<double>(j)) * values[j]) / m;
  }

  double integral(double lo, double hi) const override { return primitive(hi) - primitive(lo); }
};

struct FunctionSource final : QuantileSource::Impl {
  std::function<double(double)> fn;

  double quantile(double u) const override { return fn(u); }

  double integral(double lo, double hi) const override {
    // tanh-sinh never evaluates the endpoints and copes with the integrable
    // blow-ups quantile functions typically have at 0 and 1.
    double err = 0.0, v = 0.0;
    try {
      static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
      v = integrator.integrate(fn, lo, hi, 1e-12, &err);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::NonIntegrable, std::string("quantile integral failed: ") + e.what());
    }
    const double scale = std::max(1.0, std::abs(v));
    if (!std::isfinite(v) || !std::isfinite(err) || err > 1e-6 * scale) {
      std::ostringstream os;
      os << "quantile integral over [" << lo << ", " << hi << "] did not converge (estimate " << v
         << ", error " << err << ")";
      throw Error(ErrorKind::NonIntegrable, os.str());
    }
    return v;
  }
};

}  // namespace

QuantileSource QuantileSource::uniform(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || b < a) {
    throw Error(ErrorKind::InvalidMeasure, "uniform source needs finite a <= b");
  }
  return QuantileSource(std::make_shared<UniformSource>(a, b));
}

QuantileSource QuantileSource::samples(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyMeasure, "empty sample list");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonIntegrable, "non-finite sample value");
  }
  auto impl = std::make_shared<SampleSource>();
  std::sort(values.begin(), values.end());
  impl->prefix.assign(values.size() + 1, 0.0);
  for (std::size_t j = 0; j < values.size(); ++j) impl->prefix[j + 1] = impl->prefix[j] + values[j];
  impl->values = std::move(values);
  return QuantileSource(impl);
}

QuantileSource QuantileSource::measure(const AtomicMeasure& measure) {
  if (measure.empty() || std::abs(measure.total_mass() - 1.0) > 1e-12) {
    throw Error(ErrorKind::Domain, "quantile source needs a probability measure");
  }
  auto impl = std::make_shared<StepSource>();
  impl->cum.push_back(0.0);
  for (const Atom& a : measure.atoms()) {
    impl->cum.push_back(impl->cum.back() + a.mass);
    impl->values.push_back(a.position);
  }
  impl->cum.back() = 1.0;
  return QuantileSource(impl);
}

QuantileSource QuantileSource::function(std::function<double(double)> quantile) {
  auto impl = std::make_shared<FunctionSource>();
  impl->fn = std::move(quantile);
  return QuantileSource(impl);
}

double QuantileSource::quantile(double u) const { return impl_->quantile(u); }

double QuantileSource::integral(double lo, double hi) const { return impl_->integral(lo, hi); }

double QuantileSource::bin_mean(std::size_t i, std::size_t n) const { return impl_->bin_mean(i, n); }

AtomicMeasure discretize(const QuantileSource& source, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::Domain, "discretize needs n >= 1");
  std::vector<Atom> atoms(n);
  const double mass = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    atoms[i] = {source.bin_mean(i, n), mass};
    if (!std::isfinite(atoms[i].position)) {
      throw Error(ErrorKind::NonIntegrable, "divergent bin mean");
    }
  }
  return AtomicMeasure(std::move(atoms));
}

}  // namespace lcurtain
