#pragma once

#include <stdexcept>
#include <string>

namespace qcrb {

/// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define QCRB_DEFINE_ERROR(Name) \
  struct Name : Error {         \
    using Error::Error;         \
  }

QCRB_DEFINE_ERROR(DimensionError);      // shape mismatch between operands
QCRB_DEFINE_ERROR(DomainError);         // parameter outside a model/chart domain
QCRB_DEFINE_ERROR(NumericalError);      // invalid numerics (negative prob mass, bad sqrt, ...)
QCRB_DEFINE_ERROR(SingularStateError);  // operation needs a full-rank state
QCRB_DEFINE_ERROR(SingularModelError);  // zero-probability outcome with nonzero derivative
QCRB_DEFINE_ERROR(SingularError);       // singular matrix where an inverse is required
QCRB_DEFINE_ERROR(InfeasibleError);     // constraint set empty (rank-deficient derivatives)
QCRB_DEFINE_ERROR(ConvergenceError);    // iterative solver exhausted its budget
QCRB_DEFINE_ERROR(ResourceError);       // problem size beyond the configured ceiling
QCRB_DEFINE_ERROR(DegeneracyError);     // spectrum too degenerate for the requested map
QCRB_DEFINE_ERROR(DegenerateDataError); // dataset cannot identify the parameter
QCRB_DEFINE_ERROR(DegenerateBoundError);// bound collapsed to a trivial value
QCRB_DEFINE_ERROR(DivergenceError);     // integral grows without bound under refinement
QCRB_DEFINE_ERROR(PriorError);          // prior fails normalization/support requirements
QCRB_DEFINE_ERROR(UncertaintyError);    // covariance violates the uncertainty relation

#undef QCRB_DEFINE_ERROR

}  // namespace qcrb
