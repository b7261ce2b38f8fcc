#include "lcurtain/error.hpp"

namespace lcurtain {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyMeasure: return "empty measure";
    case ErrorKind::InvalidMeasure: return "invalid measure";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::NotDominated: return "not dominated";
    case ErrorKind::NonIntegrable: return "non-integrable source";
    case ErrorKind::TargetExhausted: return "target exhausted";
    case ErrorKind::AtomTooHeavy: return "atom too heavy";
    case ErrorKind::DegenerateBoundary: return "degenerate boundary";
    case ErrorKind::ConvexOrder: return "marginals not in convex order";
    case ErrorKind::Uncertified: return "uncertified triple";
    case ErrorKind::InvalidStrikes: return "strikes violate K2<K1";
    case ErrorKind::NotSuperhedge: return "not a superhedge";
    case ErrorKind::NoTwoPutHedge: return "no two-put hedge; use dual_search";
    case ErrorKind::PointMassOnly: return "BHZ implemented for point-mass mu only";
    case ErrorKind::Parse: return "parse error";
  }
  return "unknown error";
}

}  // namespace lcurtain
