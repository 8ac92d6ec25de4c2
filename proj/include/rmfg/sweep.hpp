#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "rmfg/equilibrium.hpp"
#include "rmfg/model.hpp"

namespace rmfg {

enum class SweepParameter { epsilon, sigma };

const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& s);

struct SweepConfig {
    SweepParameter parameter = SweepParameter::epsilon;
    std::vector<double> values;
    CaseStudyParams base;
    ModelKind model = ModelKind::extraction;
    std::string outputs;   // directory; empty -> no files
    EquilibriumOptions equilibrium;

    void validate() const;
};

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    double theta = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    std::size_t iterations = 0;
    double wall_seconds = 0.0;
    std::string failure;
};

struct SweepResult {
    SweepParameter parameter = SweepParameter::epsilon;
    std::vector<SweepRow> rows;
    bool theta_nonincreasing = false;
    bool beta_nonincreasing = false;
};

SweepResult run_sweep(const SweepConfig& cfg);

// rows as CSV; wall time is left out so files are reproducible
void write_sweep_csv(std::ostream& out, const SweepResult& res);
void write_sweep_summary(std::ostream& out, const SweepResult& res);

struct DensityProfile {
    double value = 0.0;
    bool ok = false;
    double theta = 0.0;
    double beta = 0.0;
    double mode = 0.0;
    double trapezoid_mass = 0.0;
    std::vector<double> x;
    std::vector<double> density;
    std::vector<double> cdf;
    std::string file;
    std::string failure;
};

struct DensityProfiles {
    std::vector<DensityProfile> profiles;
    bool mode_nonincreasing = false;
    bool compared = false;   // false for a single value
};

// equilibrium density per epsilon; writes density_eps_<value>.csv into cfg.outputs when set
DensityProfiles emit_density_profiles(const SweepConfig& cfg);

ProblemSpec build_sweep_spec(const SweepConfig& cfg, double value);

}  // namespace rmfg
