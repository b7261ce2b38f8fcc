#pragma once

// Text formats: measure specs in JSON, triples, laws, samples and reports as
// CSV or JSON. Every float goes out with 17 significant digits so files
// round-trip exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcurtain/american_put.hpp"
#include "lcurtain/coupling.hpp"
#include "lcurtain/curtain.hpp"
#include "lcurtain/limits.hpp"
#include "lcurtain/measures.hpp"

namespace lcurtain {

using Json = nlohmann::ordered_json;

std::string fmt17(double x);

/// {"atoms": [[x, m], ...]}, {"uniform": [a, b], "n": N} or
/// {"samples": [...], "n": N}. Throws Error(Parse) on anything else.
AtomicMeasure parse_measure(const Json& spec);
AtomicMeasure load_measure(const std::string& path);
/// The same specs as laws to discretize later; "n" is ignored.
QuantileSource parse_source(const Json& spec);
QuantileSource load_source(const std::string& path);

/// Deterministic JSON writer: %.17g numbers, null for non-finite values,
/// two-space indentation.
void write_json(std::ostream& os, const Json& value);

Json to_json(const AtomicMeasure& m);
Json to_json(const CouplingTriple& t);
Json to_json(const PriceReport& r);
Json to_json(const ProbeReport& r);

/// Rows u_lo,u_hi,R,G,S.
void write_triple_csv(std::ostream& os, const CouplingTriple& t);
/// Reads the CSV above; the triple comes back uncertified and without audit.
CouplingTriple read_triple_csv(std::istream& is);

void write_joint_csv(std::ostream& os, const JointLaw& law);
void write_samples_csv(std::ostream& os, const std::vector<SamplePair>& samples);
/// Rows n,u,S_n,G_n,R_n,J_plus,j with j empty where it does not apply.
void write_probe_csv(std::ostream& os, const ProbeReport& r);

}  // namespace lcurtain
