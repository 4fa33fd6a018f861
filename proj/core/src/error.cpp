#include "dgame/error.hpp"

namespace dgame {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kNotSymmetric: return "matrix not symmetric";
    case ErrorKind::kSingularLyapunov: return "non-unique/no Lyapunov solution";
    case ErrorKind::kNoConvergence: return "no convergence";
    case ErrorKind::kIrregularPencil: return "irregular pencil";
    case ErrorKind::kImpulsiveModes: return "impulsive modes present";
    case ErrorKind::kNotStabilizable: return "not stabilizable";
    case ErrorKind::kNotIndexPreserving: return "not index-preserving";
    case ErrorKind::kUnstableLoop: return "unstable loop";
    case ErrorKind::kInconsistentState: return "inconsistent initial state";
    case ErrorKind::kDegenerateData: return "degenerate data";
    case ErrorKind::kNumericalRank: return "numerical rank";
  }
  return "unknown";
}

}  // namespace dgame
