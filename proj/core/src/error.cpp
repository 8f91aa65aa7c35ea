#include "etstl/error.hpp"

namespace etstl {

ParseError::ParseError(const std::string& message, std::size_t position)
    : Error(message + " (at offset " + std::to_string(position) + ")"),
      position_(position) {}

FunnelViolation::FunnelViolation(const std::string& message, double xi,
                                 double time)
    : Error(message), xi_(xi), time_(time) {}

TaskFailure::TaskFailure(const std::string& message, double time)
    : Error(message), time_(time) {}

}  // namespace etstl
