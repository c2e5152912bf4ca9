#pragma once

#include <stdexcept>
#include <string>

namespace archery {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidInput,
    InvalidConfig,
    DetectionFailed,
    CalibrationFailed,
    DrawInfeasible,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& what) : Error(ErrorKind::InvalidConfig, what) {}
};

class DetectionFailed : public Error {
public:
    explicit DetectionFailed(const std::string& what) : Error(ErrorKind::DetectionFailed, what) {}
};

class CalibrationFailed : public Error {
public:
    explicit CalibrationFailed(const std::string& what) : Error(ErrorKind::CalibrationFailed, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

// Raised when the right arm cannot follow the draw vector; `waypoint` is the
// index of the first waypoint whose IK solve did not converge.
class DrawInfeasible : public Error {
public:
    DrawInfeasible(std::size_t waypoint, const std::string& what)
        : Error(ErrorKind::DrawInfeasible, what), waypoint_(waypoint) {}
    std::size_t waypoint() const noexcept { return waypoint_; }

private:
    std::size_t waypoint_;
};

}  // namespace archery
