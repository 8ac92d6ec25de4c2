#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rmfg/model.hpp"
#include "rmfg/shooting.hpp"

namespace rmfg {

class StationaryDistribution {
public:
    double theta = 0.0;
    double beta = 0.0;
    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> cdf;
    double norm_constant = 0.0;   // integral of the unnormalized density, scaled by exp(-log_shift)
    double log_shift = 0.0;
    double truncation_mass = 0.0; // bound on the mass below grid.front()
    double tol_quad = 1e-8;
    std::string tolerance_tag;

    double density_at(double x) const;
    // normalized integral of g * m over [grid.front(), beta]; cached when tag is nonempty
    double moment(const ScalarField& g, const std::string& tag = "") const;
    double mode() const;

private:
    friend StationaryDistribution stationary_density(const ProblemSpec&, const FreeBoundarySolution&,
                                                     const SolverOptions&);
    double log_unnormalized(double x) const;

    std::shared_ptr<const ProblemSpec> spec_;
    HermiteCurve S_;       // int_x^beta 2b/sigma^2
    HermiteCurve V_;
    double epsilon_ = 1.0;
    mutable std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
    mutable std::shared_ptr<std::map<std::string, double>> cache_ = std::make_shared<std::map<std::string, double>>();
};

StationaryDistribution stationary_density(const ProblemSpec& spec, const FreeBoundarySolution& fbs,
                                          const SolverOptions& opt = {});

double moment(const StationaryDistribution& dist, const ScalarField& g, const std::string& tag = "");

// max over interior nodes of |d/dx[sigma^2 m / 2] - (b - eps sigma^2 V_x) m| / max m
double stationarity_residual(const ProblemSpec& spec, const FreeBoundarySolution& fbs,
                             const StationaryDistribution& dist);

// independent normalization check: composite Simpson on a refined node set
double renormalize_check(const StationaryDistribution& dist, int refine = 8);

struct ConsistencyEval {
    double theta = 0.0;
    double T = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    double moment = 0.0;
};

ConsistencyEval evaluate_consistency(const ProblemSpec& spec, double theta, const SolverOptions& opt = {});
double consistency_map(const ProblemSpec& spec, double theta, const SolverOptions& opt = {});

std::string tolerance_tag(const SolverOptions& opt);

}  // namespace rmfg
