#pragma once

#include <stdexcept>
#include <string>

namespace lcurtain {

enum class ErrorKind {
  EmptyMeasure,
  InvalidMeasure,
  Domain,
  NotDominated,
  NonIntegrable,
  TargetExhausted,
  AtomTooHeavy,
  DegenerateBoundary,
  ConvexOrder,
  Uncertified,
  InvalidStrikes,
  NotSuperhedge,
  NoTwoPutHedge,
  PointMassOnly,
  Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lcurtain
