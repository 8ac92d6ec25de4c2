#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rmfg/model.hpp"
#include "rmfg/numerics.hpp"

namespace rmfg {

struct SolverOptions {
    double tol_ode = 1e-10;
    double tol_beta = 1e-9;
    double tol_gap_rel = 1e-8;   // tol_gap = tol_gap_rel * (1 + c_hi)
    double tol_quad = 1e-8;
    double tol_fp = 1e-7;
    double x_lo_rel = 1e-6;      // x_lo = max(x_min, x_lo_rel * beta)
    std::size_t n_geometric = 400;
    std::size_t n_uniform = 1200;
    double split_rel = 0.05;     // geometric nodes below split_rel * beta
    double match_amplification = 10.0;

    double tol_gap(const ProblemSpec& s) const { return tol_gap_rel * (1.0 + s.cost.c_hi); }
};

struct GridConfig {
    double x_lo = 0.0;  // 0 -> default from SolverOptions
    std::vector<double> nodes;  // explicit nodes on [x_lo, beta]; empty -> default layout
};

enum class BvpMethod { riccati_direct, cole_hopf };

const char* to_string(BvpMethod m);

struct BvpSolution {
    double beta = 0.0;
    double gamma = 0.0;
    double theta = 0.0;
    std::vector<double> x;
    std::vector<double> phi;
    std::vector<double> phi_x;
    BvpMethod method = BvpMethod::riccati_direct;
    double x_match = std::numeric_limits<double>::quiet_NaN();  // join of forward and backward sweeps
    double match_gap = 0.0;
};

// backward Riccati data from beta down to a stop point; ascending in x
struct BackwardProfile {
    std::vector<double> x;
    std::vector<double> phi;
    std::string outcome;   // "completed", "escape_up", "escape_down"
    double stop_x = 0.0;
};

struct Membership {
    bool member = false;
    double witness_x = 0.0;
    double witness_gap = 0.0;   // min of phi + c
    std::string outcome;        // "completed", "escape_up", "below_band", "escape_down"
};

struct FreeBoundarySolution {
    double theta = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    BvpSolution bvp;
    std::vector<double> V;
    std::vector<double> psi_star;
    EllLandmarks landmarks;
    double beta_nonmember = 0.0;  // largest nonmember seen by the bisection
    std::size_t bisection_steps = 0;
    double epsilon = 1.0;

    double x_lo() const { return bvp.x.front(); }
    // V_x with V_x = -c beyond beta and constant extension below x_lo
    double vx(double x) const;
    double potential(double x) const;
    void build_interpolants(const ProblemSpec& spec);

private:
    MonotoneCubic vx_curve_;
    HermiteCurve v_curve_;
    double c_beta_ = 0.0;
};

struct ViRow {
    double x;
    double ode_branch;
    double gradient_branch;
    double violation;
};

struct ViReport {
    std::vector<ViRow> rows;
    double max_violation = 0.0;
    double smooth_fit_residual = 0.0;       // phi_x(beta) from the ODE identity + c_x(beta)
    double smooth_fit_residual_fd = 0.0;    // one-sided difference of phi at beta + c_x(beta)
};

struct PerturbationRow {
    double gamma;
    double gap;
    double ratio;
};

std::vector<double> default_nodes(double x_lo, double beta, const SolverOptions& opt);
double default_x_lo(const ProblemSpec& spec, double beta, const EllLandmarks& L, const SolverOptions& opt);

// Riccati right-hand side phi_x(x) for boundary beta, perturbation gamma
double riccati_rhs(const ProblemSpec& spec, double lambda, double gamma, double theta, double x, double phi);

// (|lambda| + pi(beta)) * m((0, beta)) with the speed measure referenced at beta
double boundedness_constant(const ProblemSpec& spec, double beta, double theta);

BvpSolution solve_bvp(const ProblemSpec& spec, double beta, double gamma, double theta,
                      const GridConfig& grid = {}, const SolverOptions& opt = {});
BvpSolution solve_bvp_cole_hopf(const ProblemSpec& spec, double beta, double gamma, double theta,
                                const GridConfig& grid = {}, const SolverOptions& opt = {});

BackwardProfile backward_profile(const ProblemSpec& spec, double beta, double theta, const std::vector<double>& nodes,
                                 const SolverOptions& opt = {});

Membership in_B(const ProblemSpec& spec, double beta, double theta, const SolverOptions& opt = {});

// bounded solution at beta: forward implicit sweep from x_lo joined to the backward sweep
BvpSolution solve_separatrix(const ProblemSpec& spec, double beta, double gamma, double theta,
                             const GridConfig& grid = {}, const SolverOptions& opt = {});

// V with V(beta) = 0 from the nodal slope (trapezoid with end corrections)
std::vector<double> integrate_potential(const BvpSolution& sol);
// psi* = -eps sigma V_x at the nodes
std::vector<double> worst_case_kernel_values(const ProblemSpec& spec, const BvpSolution& sol);

FreeBoundarySolution compute_beta(const ProblemSpec& spec, double theta, const SolverOptions& opt = {});
FreeBoundarySolution assemble_free_boundary(const ProblemSpec& spec, double theta, double beta,
                                            const EllLandmarks& L, const SolverOptions& opt = {});

ViReport check_variational_inequality(const ProblemSpec& spec, const FreeBoundarySolution& fbs);

// backward amplification floor: smallest node above which exp(-int r) stays <= limit
double amplification_floor(const ProblemSpec& spec, const BvpSolution& sol, double limit);

std::vector<PerturbationRow> perturbation_gap(const ProblemSpec& spec, double beta, double theta,
                                              const std::vector<double>& gammas, double x_floor,
                                              const SolverOptions& opt = {});

}  // namespace rmfg
