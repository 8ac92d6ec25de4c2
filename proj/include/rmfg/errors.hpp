#pragma once

#include <stdexcept>
#include <string>

namespace rmfg {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoSignChange : SolverError {
    using SolverError::SolverError;
};

struct UnboundedSearch : SolverError {
    using SolverError::SolverError;
};

// Riccati escape; `upward` tells which way the slope left the admissible band
struct BlowUp : SolverError {
    double x;
    bool upward;
    BlowUp(const std::string& what, double at, bool up) : SolverError(what), x(at), upward(up) {}
};

struct SignLoss : SolverError {
    double x;
    SignLoss(const std::string& what, double at) : SolverError(what), x(at) {}
};

struct BracketInvalid : SolverError {
    using SolverError::SolverError;
};

struct BracketCollapsed : SolverError {
    using SolverError::SolverError;
};

struct NormalizationDiverged : SolverError {
    using SolverError::SolverError;
};

struct InnerStall : SolverError {
    using SolverError::SolverError;
};

struct MaxIterExceeded : SolverError {
    double best_theta;
    MaxIterExceeded(const std::string& what, double best) : SolverError(what), best_theta(best) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rmfg
