#include "lcurtain/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lcurtain/error.hpp"

namespace lcurtain {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorKind::Parse, "measure spec: " + what); }

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_error(std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t count(const Json& spec) {
  if (!spec.contains("n")) parse_error("missing \"n\"");
  const Json& n = spec["n"];
  if (!n.is_number_integer() || n.get<long long>() < 1) parse_error("\"n\" must be a positive integer");
  return static_cast<std::size_t>(n.get<long long>());
}

}  // namespace

AtomicMeasure parse_measure(const Json& spec) {
  if (!spec.is_object()) parse_error("expected a JSON object");
  if (spec.contains("atoms")) {
    const Json& atoms = spec["atoms"];
    if (!atoms.is_array() || atoms.empty()) parse_error("\"atoms\" must be a nonempty array");
    std::vector<Atom> out;
    for (const Json& a : atoms) {
      if (!a.is_array() || a.size() != 2) parse_error("each atom must be [position, mass]");
      out.push_back({number(a[0], "position"), number(a[1], "mass")});
    }
    try {
      return AtomicMeasure(std::move(out));
    } catch (const Error& e) {
      parse_error(e.what());
    }
  }
  if (spec.contains("uniform")) {
    const Json& ab = spec["uniform"];
    if (!ab.is_array() || ab.size() != 2) parse_error("\"uniform\" must be [a, b]");
    const double a = number(ab[0], "a"), b = number(ab[1], "b");
    if (!(a <= b)) parse_error("\"uniform\" needs a <= b");
    return discretize(QuantileSource::uniform(a, b), count(spec));
  }
  if (spec.contains("samples")) {
    const Json& xs = spec["samples"];
    if (!xs.is_array() || xs.empty()) parse_error("\"samples\" must be a nonempty array");
    std::vector<double> v;
    for (const Json& x : xs) v.push_back(number(x, "sample"));
    return discretize(QuantileSource::samples(std::move(v)), count(spec));
  }
  parse_error("expected one of \"atoms\", \"uniform\", \"samples\"");
}

QuantileSource parse_source(const Json& spec) {
  if (!spec.is_object()) parse_error("expected a JSON object");
  if (spec.contains("atoms")) {
    const AtomicMeasure m = parse_measure(spec);
    if (std::abs(m.total_mass() - 1.0) > 1e-12) parse_error("a source law must have total mass 1");
    return QuantileSource::measure(m);
  }
  if (spec.contains("uniform")) {
    const Json& ab = spec["uniform"];
    if (!ab.is_array() || ab.size() != 2) parse_error("\"uniform\" must be [a, b]");
    const double a = number(ab[0], "a"), b = number(ab[1], "b");
    if (!(a <= b)) parse_error("\"uniform\" needs a <= b");
    return QuantileSource::uniform(a, b);
  }
  if (spec.contains("samples")) {
    const Json& xs = spec["samples"];
    if (!xs.is_array() || xs.empty()) parse_error("\"samples\" must be a nonempty array");
    std::vector<double> v;
    for (const Json& x : xs) v.push_back(number(x, "sample"));
    return QuantileSource::samples(std::move(v));
  }
  parse_error("expected one of \"atoms\", \"uniform\", \"samples\"");
}

namespace {

template <typename Parse>
auto load_with(const std::string& path, Parse&& parse) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  Json spec;
  try {
    spec = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
  try {
    return parse(spec);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw Error(ErrorKind::Parse, path + ": " + e.what());
    throw;
  }
}

}  // namespace

AtomicMeasure load_measure(const std::string& path) { return load_with(path, parse_measure); }

QuantileSource load_source(const std::string& path) { return load_with(path, parse_source); }

namespace {

void write_value(std::ostream& os, const Json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << Json(it.key()).dump() << ": ";
        write_value(os, it.value(), indent + 1);
      }
      os << '\n' << pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(v.begin(), v.end(), [](const Json& e) { return e.is_structured(); });
      os << '[';
      bool first = true;
      for (const Json& e : v) {
        if (!first) os << (flat ? ", " : ",");
        first = false;
        if (!flat) os << '\n' << inner;
        write_value(os, e, indent + 1);
      }
      if (!flat) os << '\n' << pad;
      os << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      os << (std::isfinite(x) ? fmt17(x) : "null");
      return;
    }
    default:
      os << v.dump();
  }
}

Json opt(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

}  // namespace

void write_json(std::ostream& os, const Json& value) {
  write_value(os, value, 0);
  os << '\n';
}

Json to_json(const AtomicMeasure& m) {
  Json atoms = Json::array();
  for (const Atom& a : m.atoms()) atoms.push_back(Json::array({a.position, a.mass}));
  return Json{{"atoms", atoms}};
}

Json to_json(const CouplingTriple& t) {
  Json pieces = Json::array();
  for (const Piece& p : t.pieces) pieces.push_back(Json::array({p.u_lo, p.u_hi, p.r, p.g, p.s}));
  Json audit = Json::array();
  for (const EmbeddingAudit& a : t.audit) {
    audit.push_back(Json{{"atom_index", a.atom_index},
                         {"x", a.x},
                         {"mass", a.mass},
                         {"u_lo", a.u_lo},
                         {"u_hi", a.u_hi},
                         {"r_star", a.r_star},
                         {"s_star", a.s_star},
                         {"lambda_low", a.lambda_low},
                         {"lambda_high", a.lambda_high},
                         {"embedded", to_json(a.embedded)["atoms"]},
                         {"residual", to_json(a.residual)["atoms"]},
                         {"residual_convex_order", a.residual_convex_order}});
  }
  const Certificate& c = t.certificate;
  return Json{{"columns", Json::array({"u_lo", "u_hi", "R", "G", "S"})},
              {"pieces", pieces},
              {"certificate",
               {{"ok", c.ok},
                {"marginal_tv", c.marginal_tv},
                {"first_marginal_tv", c.first_marginal_tv},
                {"max_martingale_error", c.max_martingale_error},
                {"final_residual_mass", c.final_residual_mass},
                {"ordering_ok", c.ordering_ok},
                {"failures", c.failures}}},
              {"audit", audit}};
}

namespace {

// theta, r and s describe the portfolio unless a strike is spread over two
// atoms; only then are the actual legs listed.
Json hedge_json(const HedgePortfolio& h) {
  Json out{{"theta", h.theta}, {"r", h.strike_low}, {"s", h.strike_high}};
  if (h.low_bracket || h.high_bracket) {
    Json legs = Json::array();
    for (const PutLeg& leg : h.legs()) legs.push_back(Json::array({leg.strike, leg.weight}));
    out["legs"] = legs;
  }
  return out;
}

}  // namespace

Json to_json(const PriceReport& r) {
  Json decisions = Json::array();
  for (bool d : r.decisions) decisions.push_back(d);
  Json out{{"primal", r.primal},
           {"dual", r.dual},
           {"gap", r.gap},
           {"u_star", opt(r.u_star)},
           {"archetype", to_string(r.archetype)},
           {"hedge", hedge_json(r.hedge)},
           {"bhz", opt(r.bhz)},
           {"decisions", decisions}};
  if (r.root_hedge) {
    out["root_hedge"] = hedge_json(*r.root_hedge);
    out["root_hedge"]["cost"] = r.root_hedge->cost;
  }
  return out;
}

Json to_json(const ProbeReport& r) {
  Json levels = Json::array();
  for (const ProbeLevel& l : r.levels) {
    levels.push_back(Json{{"n", l.n},
                          {"skipped", l.skipped},
                          {"diagnostic", l.diagnostic},
                          {"pieces", l.pieces},
                          {"mean_dev_s", l.mean_dev_s},
                          {"max_dev_s", l.max_dev_s},
                          {"mean_dev_g", l.mean_dev_g},
                          {"max_dev_g", l.max_dev_g},
                          {"w1_to_next", opt(l.w1_to_next)}});
  }
  return Json{{"levels", levels},
              {"excluded", r.excluded},
              {"w1_nonincreasing", r.w1_nonincreasing},
              {"deviations_shrink", r.deviations_shrink}};
}

void write_triple_csv(std::ostream& os, const CouplingTriple& t) {
  os << "u_lo,u_hi,R,G,S\n";
  for (const Piece& p : t.pieces) {
    os << fmt17(p.u_lo) << ',' << fmt17(p.u_hi) << ',' << fmt17(p.r) << ',' << fmt17(p.g) << ',' << fmt17(p.s)
       << '\n';
  }
}

CouplingTriple read_triple_csv(std::istream& is) {
  CouplingTriple t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("u_lo", 0) == 0) continue;
    std::istringstream row(line);
    std::string cell;
    double v[5];
    int k = 0;
    while (k < 5 && std::getline(row, cell, ',')) {
      std::size_t used = 0;
      try {
        v[k] = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw Error(ErrorKind::Parse, "triple csv line " + std::to_string(lineno) + ": bad number");
      ++k;
    }
    if (k != 5) throw Error(ErrorKind::Parse, "triple csv line " + std::to_string(lineno) + ": expected 5 columns");
    t.pieces.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  if (t.pieces.empty()) throw Error(ErrorKind::Parse, "triple csv has no pieces");
  return t;
}

void write_joint_csv(std::ostream& os, const JointLaw& law) {
  os << "x,y,mass\n";
  for (const JointAtom& a : law.atoms) os << fmt17(a.x) << ',' << fmt17(a.y) << ',' << fmt17(a.mass) << '\n';
}

void write_samples_csv(std::ostream& os, const std::vector<SamplePair>& samples) {
  os << "x,y\n";
  std::string buf;
  for (const auto& [x, y] : samples) {
    buf = fmt17(x);
    buf += ',';
    buf += fmt17(y);
    buf += '\n';
    os << buf;
  }
}

void write_probe_csv(std::ostream& os, const ProbeReport& r) {
  os << "n,u,S_n,G_n,R_n,J_plus,j\n";
  for (const ProbeRow& row : r.rows) {
    os << row.n << ',' << fmt17(row.u) << ',' << fmt17(row.s) << ',' << fmt17(row.g) << ',' << fmt17(row.r) << ','
       << fmt17(row.j_plus) << ',' << (row.j ? fmt17(*row.j) : "") << '\n';
  }
}

}  // namespace lcurtain
