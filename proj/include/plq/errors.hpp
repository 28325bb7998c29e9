#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace plq {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidProblemError : public Error {
public:
    using Error::Error;
};

class GridMismatchError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

// Adaptive step size collapsed (or the step budget ran out) at `time`.
class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

// 1 is (numerically) a Floquet multiplier of the period map.
class ResolventViolationError : public Error {
public:
    using Error::Error;
};

// The closed loop required to be exponentially stable is not.
class StabilityViolationError : public Error {
public:
    using Error::Error;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class OracleFailureError : public Error {
public:
    OracleFailureError(const std::string& what, double final_defect)
        : Error(what), final_defect_(final_defect) {}
    double final_defect() const { return final_defect_; }

private:
    double final_defect_;
};

class DegeneratePeriodicityError : public Error {
public:
    using Error::Error;
};

class InvalidTrajectoryError : public Error {
public:
    using Error::Error;
};

class InvalidScenarioError : public Error {
public:
    using Error::Error;
};

}  // namespace plq
