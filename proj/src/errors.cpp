#include "csm/errors.hpp"

namespace csm {

QuadratureError::QuadratureError(const std::string& what, double estimate, double error_estimate)
    : NumericalError(what + " (estimate " + std::to_string(estimate) + ", error estimate " +
                     std::to_string(error_estimate) + ")"),
      estimate_(estimate),
      error_(error_estimate) {}

InputError::InputError(const std::string& what, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

SamplerError::SamplerError(const std::string& what, long iteration)
    : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

}  // namespace csm
