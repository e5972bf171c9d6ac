#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nwave {

// Stable numeric values: these are surfaced unchanged through the C API.
enum class ErrorCode : int {
    Dimension = 1,
    Validation = 2,
    Numerical = 3,
    StepUnderflow = 4,
    Domain = 5,
    Convergence = 6,
    BranchPoint = 7,
    NoMotion = 8,
    Consistency = 9,
    Config = 10,
    Io = 11,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(ErrorCode::Dimension, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorCode::Validation, what) {}
};

// Carries the coordinates at which the failure was observed, when there is one.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, std::vector<double> point = {})
        : Error(ErrorCode::Numerical, what), point_(std::move(point)) {}
    const std::vector<double>& point() const noexcept { return point_; }

protected:
    NumericalError(ErrorCode code, const std::string& what, std::vector<double> point)
        : Error(code, what), point_(std::move(point)) {}

private:
    std::vector<double> point_;
};

class StepUnderflowError : public NumericalError {
public:
    StepUnderflowError(const std::string& what, double last_good_time, std::vector<double> state)
        : NumericalError(ErrorCode::StepUnderflow, what, std::move(state)),
          last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate)
        : NumericalError(ErrorCode::Convergence, what, std::move(last_iterate)) {}
};

// Jacobian of an implicit equation became singular or changed sign.
// `location` is the continuation parameter where it happened (or -1).
class BranchPointError : public NumericalError {
public:
    BranchPointError(const std::string& what, std::vector<double> last_iterate, double location = -1.0)
        : NumericalError(ErrorCode::BranchPoint, what, std::move(last_iterate)), location_(location) {}
    double location() const noexcept { return location_; }

private:
    double location_;
};

class NoMotionError : public Error {
public:
    explicit NoMotionError(const std::string& what) : Error(ErrorCode::NoMotion, what) {}
};

class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& what) : Error(ErrorCode::Consistency, what) {}
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(ErrorCode::Config, "config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::StepUnderflow: return "step_underflow";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::BranchPoint: return "branch_point";
    case ErrorCode::NoMotion: return "no_motion";
    case ErrorCode::Consistency: return "consistency";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

} // namespace nwave
