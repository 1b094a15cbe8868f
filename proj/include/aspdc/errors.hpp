#pragma once

#include <stdexcept>
#include <string>

namespace aspdc {

/// Base of every error raised by the simulator. Callers that only need to
/// distinguish "bad input" from "physics failed" can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndexError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class SamplingError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class MetricError : public Error { using Error::Error; };
class UnderdeterminedError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class BudgetError : public Error { using Error::Error; };
class CalibrationError : public Error { using Error::Error; };

} // namespace aspdc
