#pragma once
#include <stdexcept>
#include <string>

namespace hhri {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failures (exit code 3 in the CLI).
struct NumericalError : Error {
    using Error::Error;
};

/// File / format problems (exit code 4 in the CLI).
struct FormatError : Error {
    using Error::Error;
};

struct NotASaddle : NumericalError { using NumericalError::NumericalError; };
struct StepSizeUnderflow : NumericalError { using NumericalError::NumericalError; };
struct NonFiniteState : NumericalError { using NumericalError::NumericalError; };
struct EventNotFound : NumericalError { using NumericalError::NumericalError; };
struct NoConvergence : NumericalError { using NumericalError::NumericalError; };
struct SingularCorrection : NumericalError { using NumericalError::NumericalError; };
struct EnergyNotBracketed : NumericalError { using NumericalError::NumericalError; };
struct EnergyBelowSaddle : NumericalError { using NumericalError::NumericalError; };
struct NoCrossing : NumericalError { using NumericalError::NumericalError; };
struct IncompleteIsland : NumericalError { using NumericalError::NumericalError; };
struct EmptySection : NumericalError { using NumericalError::NumericalError; };
struct OutsideEnergyBoundary : NumericalError { using NumericalError::NumericalError; };
struct DimensionMismatch : NumericalError { using NumericalError::NumericalError; };
struct SingleClass : NumericalError { using NumericalError::NumericalError; };
struct ProposalExhausted : NumericalError { using NumericalError::NumericalError; };

} // namespace hhri
