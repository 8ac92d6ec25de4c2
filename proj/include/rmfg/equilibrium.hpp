#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rmfg/ergodic.hpp"
#include "rmfg/model.hpp"
#include "rmfg/shooting.hpp"

namespace rmfg {

enum class EquilibriumMethod { damped_fixed_point, bisection_on_g, policy_iteration };

const char* to_string(EquilibriumMethod m);

struct ThetaBracket {
    double lo = 0.0;
    double hi = 0.0;
    double robust_lo = 0.0;     // F(<f, robust stationary law>)
    double robust_hi = 0.0;     // F(f(beta(robust_lo)))
    double beta_robust = 0.0;
    bool repaired = false;
    std::string note;
};

struct TraceRow {
    std::size_t iteration = 0;
    double theta = 0.0;
    double T = 0.0;
    double beta = 0.0;
    double residual = 0.0;
    std::string note;
};

struct EquilibriumOptions {
    SolverOptions solver;
    double rho = 0.5;
    std::size_t max_iter = 200;       // damped and bisection
    std::size_t pia_inner_stalls = 50;
    std::size_t pia_outer = 200;
    std::size_t pia_inner_steps = 5000;
    std::size_t pia_nodes = 1200;
    double tol_pia = 0.0;             // 0 -> 1e-4 * c_hi
    std::optional<ThetaBracket> bracket;  // user override
};

struct EquilibriumResult {
    double theta_star = 0.0;
    double beta_star = 0.0;
    double lambda_star = 0.0;
    double residual = 0.0;            // T(theta_star) - theta_star
    ThetaBracket bracket;
    std::vector<TraceRow> trace;
    EquilibriumMethod method = EquilibriumMethod::bisection_on_g;
    std::size_t iterations = 0;
};

// thread-safe memo of T keyed by theta; bound to one spec and one set of options
class ConsistencyEvaluator {
public:
    ConsistencyEvaluator(ProblemSpec spec, SolverOptions opt);
    ConsistencyEval operator()(double theta) const;
    const ProblemSpec& spec() const { return spec_; }
    const SolverOptions& options() const { return opt_; }
    std::size_t evaluations() const;

private:
    ProblemSpec spec_;
    SolverOptions opt_;
    mutable std::mutex mu_;
    mutable std::map<double, ConsistencyEval> memo_;
};

// robust construction; throws BracketCollapsed if hi < lo
ThetaBracket theta_bracket(const ProblemSpec& spec, const SolverOptions& opt = {});

// widens a bracket until g = T - theta is >= 0 at lo and <= 0 at hi
ThetaBracket secure_bracket(const ConsistencyEvaluator& T, ThetaBracket br, std::size_t max_steps = 60);

EquilibriumResult find_equilibrium_bisection(const ProblemSpec& spec, const EquilibriumOptions& opt = {});
EquilibriumResult find_equilibrium_damped(const ProblemSpec& spec, const EquilibriumOptions& opt = {},
                                          std::optional<double> start = std::nullopt);
EquilibriumResult policy_iteration(const ProblemSpec& spec, const EquilibriumOptions& opt = {});

struct InnerResult {
    double beta = 0.0;
    std::size_t accepted = 0;
    std::size_t stalls = 0;
    std::vector<double> betas;  // accepted boundaries in order
    std::string stop;
};

// inner boundary update of the policy iteration at fixed theta, started at `beta0`
InnerResult pia_inner(const ProblemSpec& spec, double theta, double beta0, const EquilibriumOptions& opt);

struct ScanRow {
    double theta;
    double T;
    double g;
    double beta;
    double lambda;
};

// T on `n` equally spaced points of [lo, hi], evaluated in parallel
std::vector<ScanRow> scan_consistency(const ConsistencyEvaluator& T, double lo, double hi, std::size_t n);
std::size_t sign_changes(const std::vector<ScanRow>& rows);

}  // namespace rmfg
