#pragma once

#include <stdexcept>
#include <string>

namespace hedge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// lp_core
struct MalformedProblem : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };
struct ExactModeTooLarge : Error { using Error::Error; };

// tree_model
struct ParamOutOfRange : Error { using Error::Error; };
struct NonPositivePrice : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };

// wealth / hedging
struct UnknownModel : Error { using Error::Error; };
struct UnknownNode : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct FreeLunch : Error { using Error::Error; };

// dual_cps
struct InvalidPart : Error { using Error::Error; };
struct BoundsOutOfOrder : Error { using Error::Error; };

} // namespace hedge
