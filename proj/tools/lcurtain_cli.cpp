// lcurtain: build, verify, sample and price left-curtain couplings from the
// command line.
//
// Exit codes: 0 ok, 1 other error, 2 bad input, 3 marginals not in convex
// order, 4 certification failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "lcurtain/american_put.hpp"
#include "lcurtain/coupling.hpp"
#include "lcurtain/curtain.hpp"
#include "lcurtain/error.hpp"
#include "lcurtain/io.hpp"
#include "lcurtain/limits.hpp"
#include "lcurtain/single_atom.hpp"

using namespace lcurtain;

namespace {

constexpr int kExitOther = 1;
constexpr int kExitParse = 2;
constexpr int kExitConvexOrder = 3;
constexpr int kExitUncertified = 4;

struct Options {
  std::string mu, nu, out, triple, joint, upsilon_csv;
  std::uint64_t seed = 1;
  std::size_t n = 1000;
  double k1 = 0.0, k2 = 0.0;
  std::size_t grid = 64;
  std::vector<std::size_t> ns{10, 100, 1000};
};

// Writes to the file at path, or stdout when path is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorKind::Domain, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

CouplingTriple build_checked(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  CouplingTriple t = build_left_curtain(mu, nu);
  if (!t.certified()) {
    std::cerr << "triple failed certification:\n";
    for (const std::string& f : t.certificate.failures) std::cerr << "  " << f << '\n';
    throw Error(ErrorKind::Uncertified, "certification failed");
  }
  return t;
}

int run_build(const Options& o) {
  const AtomicMeasure mu = load_measure(o.mu), nu = load_measure(o.nu);
  if (!o.upsilon_csv.empty()) {
    // Table for the lowest atom of mu against the whole of nu.
    Output up(o.upsilon_csv);
    write_upsilon_csv(up.stream(), build_upsilon(nu, mu[0].position));
  }
  const CouplingTriple t = build_checked(mu, nu);
  Output out(o.out);
  if (ends_with(o.out, ".json")) {
    write_json(out.stream(), to_json(t));
  } else {
    write_triple_csv(out.stream(), t);
  }
  if (!o.joint.empty()) {
    Output joint(o.joint);
    write_joint_csv(joint.stream(), joint_law(t, mu));
  }
  return 0;
}

int run_verify(const Options& o) {
  const AtomicMeasure mu = load_measure(o.mu), nu = load_measure(o.nu);
  if (!convex_order_leq(mu, nu)) throw Error(ErrorKind::ConvexOrder, "marginals not in convex order");
  CouplingTriple t;
  if (o.triple.empty()) {
    t = build_left_curtain(mu, nu);
  } else {
    std::ifstream in(o.triple);
    if (!in) throw Error(ErrorKind::Parse, "cannot open " + o.triple);
    t = read_triple_csv(in);
    t.certificate = certify(t, mu, nu);
  }

  std::vector<std::string> failures = t.certificate.failures;
  if (t.certified()) {
    const EnvelopeReport env = envelopes(t, mu, nu);
    failures.insert(failures.end(), env.violations.begin(), env.violations.end());
    const double scale = std::max({1.0, std::abs(nu.lower()), std::abs(nu.upper())});
    for (const Piece& p : t.pieces) {
      const double u = 0.5 * (p.u_lo + p.u_hi);
      const MassMeanCheck c = check_mass_mean(t, mu, nu, u);
      if (std::abs(c.lhs_mass - c.rhs_mass) > 1e-9 || std::abs(c.lhs_mean - c.rhs_mean) > 1e-9 * scale) {
        failures.push_back("mass/mean balance fails at u = " + fmt17(u));
      }
    }
  }

  Output out(o.out);
  std::ostream& os = out.stream();
  os << "pieces " << t.pieces.size() << '\n'
     << "marginal_tv " << fmt17(t.certificate.marginal_tv) << '\n'
     << "first_marginal_tv " << fmt17(t.certificate.first_marginal_tv) << '\n'
     << "max_martingale_error " << fmt17(t.certificate.max_martingale_error) << '\n';
  for (const std::string& f : failures) os << "FAIL " << f << '\n';
  os << (failures.empty() ? "OK" : "FAILED") << '\n';
  return failures.empty() ? 0 : kExitUncertified;
}

int run_sample(const Options& o) {
  const AtomicMeasure mu = load_measure(o.mu), nu = load_measure(o.nu);
  const CouplingTriple t = build_checked(mu, nu);
  Output out(o.out);
  write_samples_csv(out.stream(), sample(t, o.seed, o.n));
  return 0;
}

int run_price(const Options& o) {
  const AtomicMeasure mu = load_measure(o.mu), nu = load_measure(o.nu);
  const PutPair k{o.k1, o.k2};
  validate(k);
  const CouplingTriple t = build_checked(mu, nu);
  Output out(o.out);
  write_json(out.stream(), to_json(price(t, mu, nu, k)));
  return 0;
}

int run_probe(const Options& o) {
  const QuantileSource mu = load_source(o.mu);
  const AtomicMeasure nu = load_measure(o.nu);
  const ProbeReport rep = convergence_probe(mu, nu, o.ns, o.grid);
  if (!o.out.empty()) {
    Output out(o.out);
    write_probe_csv(out.stream(), rep);
  }
  write_json(std::cout, to_json(rep));
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::InvalidMeasure:
    case ErrorKind::InvalidStrikes:
      return kExitParse;
    case ErrorKind::ConvexOrder:
      return kExitConvexOrder;
    case ErrorKind::Uncertified:
      return kExitUncertified;
    default:
      return kExitOther;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Left-curtain martingale couplings and robust two-date American put bounds"};
  app.require_subcommand(1);
  Options o;

  auto marginals = [&o](CLI::App* sub) {
    sub->add_option("--mu", o.mu, "initial law (JSON spec)")->required();
    sub->add_option("--nu", o.nu, "terminal law (JSON spec)")->required();
    sub->add_option("--out", o.out, "output path (stdout if omitted)");
  };

  CLI::App* build = app.add_subcommand("build", "build the triple; CSV, or JSON when --out ends in .json");
  marginals(build);
  build->add_option("--joint", o.joint, "also write the joint law as CSV");
  build->add_option("--upsilon-csv", o.upsilon_csv, "also write the Upsilon table of the lowest atom of mu");

  CLI::App* verify = app.add_subcommand("verify", "run every certification; exit 4 on failure");
  marginals(verify);
  verify->add_option("--triple", o.triple, "check this triple CSV instead of building one");

  CLI::App* samp = app.add_subcommand("sample", "write n seeded draws of (X, Y) as CSV");
  marginals(samp);
  samp->add_option("--seed", o.seed, "RNG seed");
  samp->add_option("--n", o.n, "number of draws")->check(CLI::PositiveNumber);

  CLI::App* pr = app.add_subcommand("price", "price the put pair and report the superhedge as JSON");
  marginals(pr);
  pr->add_option("--k1", o.k1, "strike at date 1")->required();
  pr->add_option("--k2", o.k2, "strike at date 2 (below K1)")->required();

  CLI::App* probe = app.add_subcommand("probe", "convergence probe; CSV rows to --out, JSON summary to stdout");
  marginals(probe);
  probe->add_option("--ns", o.ns, "discretization sizes")->expected(1, -1);
  probe->add_option("--grid", o.grid, "number of u grid points")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  try {
    if (*build) return run_build(o);
    if (*verify) return run_verify(o);
    if (*samp) return run_sample(o);
    if (*pr) return run_price(o);
    if (*probe) return run_probe(o);
  } catch (const Error& e) {
    std::cerr << "lcurtain: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lcurtain: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}
