#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rmfg {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

// function of the state with optional analytic derivatives; missing ones fall
// back to central differences
struct ScalarField {
    Fn1 value;
    Fn1 derivative;
    Fn1 second;

    double operator()(double x) const { return value(x); }
    double d(double x) const;
    double dd(double x) const;
    bool analytic() const { return static_cast<bool>(derivative); }

    static ScalarField constant(double v);
};

struct DiffusionSpec {
    ScalarField b;
    ScalarField sigma;
    double growth_exponent = 1.0;
};

struct CostSpec {
    ScalarField c;
    double c_lo = 0.0;
    double c_hi = 0.0;
};

struct ProfitSpec {
    Fn2 pi;
    Fn2 pi_x;
    Fn2 pi_xtheta;
    ScalarField kappa;
    double lipschitz_delta = 0.5;
    double lipschitz_C = 1.0;
};

struct InteractionSpec {
    ScalarField f;
    ScalarField F;
    double delta = 0.5;
};

struct CaseStudyParams {
    double kappa = 1.0;
    double alpha = 1.0;
    double sigma = 1.0;
    double eta = 1.0;
    double cost = 1.0;
    double delta = 0.6;
    double epsilon = 1.0;

    void validate() const;
};

enum class ModelKind { extraction, logistic, custom };

struct ProblemSpec {
    DiffusionSpec diffusion;
    CostSpec cost;
    ProfitSpec profit;
    InteractionSpec interaction;
    double epsilon = 1.0;
    double x_min_rel = 1e-8;     // domain floor relative to the maximizer of ell
    double tol_root = 1e-10;
    double scale = 1.0;          // characteristic state size for bracket searches
    ModelKind kind = ModelKind::custom;
    std::optional<CaseStudyParams> params;
    bool robust = false;

    double b(double x) const { return diffusion.b(x); }
    double sigma(double x) const { return diffusion.sigma(x); }
    double c(double x) const { return cost.c(x); }
    double pi(double x, double theta) const { return profit.pi(x, theta); }
};

struct EllLandmarks {
    double xhat = 0.0;
    double xhat_lower = 0.0;
    double ell_at_zero = 0.0;
    double x_min = 0.0;
};

struct ValidationEntry {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    bool all_passed() const;
};

ProblemSpec build_extraction_model(const CaseStudyParams& p);
ProblemSpec build_logistic_model(const CaseStudyParams& p);

// profit replaced by its robust limit kappa (theta drops out)
ProblemSpec robust_spec(const ProblemSpec& spec);

double eval_ell(const ProblemSpec& spec, double x, double theta);
double eval_ell_x(const ProblemSpec& spec, double x, double theta);
double eval_ell_robust(const ProblemSpec& spec, double x);

EllLandmarks find_landmarks(const ProblemSpec& spec, double theta);
EllLandmarks find_robust_landmarks(const ProblemSpec& spec);

double scale_density(const ProblemSpec& spec, double x, double x0);
// m((a, b)) with scale reference x0
double speed_measure(const ProblemSpec& spec, double a, double b, double x0);

ValidationReport validate_assumptions(const ProblemSpec& spec, const std::vector<double>& theta_grid,
                                      const std::vector<double>& x_grid);
std::vector<double> default_theta_grid();
std::vector<double> default_x_grid(const ProblemSpec& spec);

}  // namespace rmfg
