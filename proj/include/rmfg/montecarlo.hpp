#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rmfg/ergodic.hpp"
#include "rmfg/model.hpp"
#include "rmfg/shooting.hpp"

namespace rmfg {

struct McConfig {
    double dt = 1e-3;
    double horizon = 1e4;
    double burn_in = 100.0;
    std::size_t n_paths = 8;
    std::uint64_t seed = 20240601;
    double x0 = 0.0;            // 0 -> start at the boundary
    bool record_path = false;   // keep (t, x, xi_cum) of path 0
    std::size_t record_stride = 1000;

    void validate() const;
};

struct PathPoint {
    double t;
    double x;
    double xi_cum;
};

struct McEstimate {
    double ergodic_payoff = 0.0;
    double payoff_se = 0.0;
    double moment_f = 0.0;
    double moment_se = 0.0;
    std::vector<double> cdf_grid;
    std::vector<double> cdf;
    double ks_distance_vs_analytic = 0.0;   // filled by compare_distribution
    double control_rate = 0.0;
    std::size_t steps = 0;
    std::size_t resamples = 0;
    bool resample_flag = false;             // resamples above 1% of steps
    double max_state = 0.0;
    double min_state = 0.0;
    double initial_jump = 0.0;
    std::vector<double> path_payoffs;
    std::vector<PathPoint> path;
};

// Girsanov kernel psi(x); the drift under the simulated measure is b + sigma * psi
using Kernel = std::function<double(double)>;

Kernel worst_case_kernel(const ProblemSpec& spec, const FreeBoundarySolution& fbs);

// one Euler step with projection at beta; returns the new state and adds the push to *dxi
double reflected_step(const ProblemSpec& spec, const Kernel& psi, double beta, double x, double dt, double z,
                      double* dxi);

McEstimate simulate_reflected(const ProblemSpec& spec, const FreeBoundarySolution& fbs, const McConfig& cfg,
                              const Kernel& psi = {});

// sup over the analytic grid of |empirical CDF - analytic CDF|
double compare_distribution(const McEstimate& est, const StationaryDistribution& dist);

// comparison of two kernels on a shared Gaussian stream; returns max of x1 - x2 over the path
double comparison_gap(const ProblemSpec& spec, double beta, const Kernel& psi1, const Kernel& psi2, double x0,
                      double dt, std::size_t steps, std::uint64_t seed);

}  // namespace rmfg
