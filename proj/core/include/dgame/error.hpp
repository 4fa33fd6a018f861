#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dgame {

/// Failure classes raised by the toolkit. The CLI maps these onto exit codes.
enum class ErrorKind {
  kInvalidArgument,
  kNotSymmetric,
  kSingularLyapunov,
  kNoConvergence,
  kIrregularPencil,
  kImpulsiveModes,
  kNotStabilizable,
  kNotIndexPreserving,
  kUnstableLoop,
  kInconsistentState,
  kDegenerateData,
  kNumericalRank,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dgame
