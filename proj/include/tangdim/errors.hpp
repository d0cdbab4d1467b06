#pragma once

#include <stdexcept>
#include <string>

namespace tangdim {

// Bad run parameters: windows too small, invalid flags, malformed points.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed schedule text or step invariant violations.
class ScheduleParseError : public std::runtime_error {
public:
    explicit ScheduleParseError(const std::string& what) : std::runtime_error(what) {}
};

// Point resolved too coarsely for the requested certainty. Never absorbed
// silently; callers either deepen the resolution or abort.
class ResolutionError : public std::runtime_error {
public:
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

// Estimator preconditions: too few samples, insufficient h coverage.
class EstimatorError : public std::runtime_error {
public:
    explicit EstimatorError(const std::string& what) : std::runtime_error(what) {}
};

}
