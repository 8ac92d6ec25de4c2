#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmfg {

struct StepUnderflow : std::runtime_error {
    double x;
    StepUnderflow(const std::string& what, double at) : std::runtime_error(what), x(at) {}
};

struct QuadratureError : std::runtime_error {
    double estimate;
    double requested;
    QuadratureError(const std::string& what, double est, double req)
        : std::runtime_error(what), estimate(est), requested(req) {}
};

// step-size controller settings shared by the one-step integrators
struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0.0;  // 0 -> picked from span
    double h_min = 1e-14;
    std::size_t max_steps = 2000000;
};

// Dormand-Prince 5(4), direction taken from sign(x1 - x0). Every entry of
// `stops` strictly between x0 and x1 is hit exactly. The observer sees each
// accepted point (including stops) and may return false to halt.
template <std::size_t N>
class DormandPrince {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;
    using Observer = std::function<bool(double, const State&, const State&)>;

    explicit DormandPrince(StepControl ctl) : ctl_(ctl) {}

    // returns the abscissa where integration ended
    double integrate(const Rhs& f, double x0, State y, double x1,
                     const std::vector<double>& stops, const Observer& obs) const;

private:
    StepControl ctl_;
};

// two-stage Radau IIA for scalar stiff problems with step doubling error control
class RadauScalar {
public:
    using Rhs = std::function<double(double, double)>;
    using Observer = std::function<bool(double, double)>;

    explicit RadauScalar(StepControl ctl) : ctl_(ctl) {}

    double integrate(const Rhs& f, const Rhs& dfdy, double x0, double y, double x1,
                     const std::vector<double>& stops, const Observer& obs) const;

private:
    bool step(const Rhs& f, const Rhs& dfdy, double x, double y, double h, double& out) const;
    StepControl ctl_;
};

// cubic Hermite interpolant through (x_i, y_i, dy_i)
class HermiteCurve {
public:
    HermiteCurve() = default;
    HermiteCurve(std::vector<double> x, std::vector<double> y, std::vector<double> dy);
    double operator()(double t) const;
    double derivative(double t) const;
    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::size_t locate(double t) const;
    std::vector<double> x_, y_, dy_;
};

// Fritsch-Carlson monotone piecewise cubic
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;

private:
    std::vector<double> x_, y_, m_;
};

// adaptive Gauss-Kronrod (QUADPACK qag, 21-point) on [a, b], relative tolerance; throws QuadratureError on failure
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double tol, double* error = nullptr, double tol_abs = 0.0);

// same, after splitting [a, b] into pieces with endpoint ratio <= 2 (a > 0)
double integrate_log_split(const std::function<double(double)>& f, double a, double b, double tol);

// bisection for a sign change of f on [a, b]; fa, fb must have opposite signs
double bisect_root(const std::function<double(double)>& f, double a, double b, double tol);

std::vector<double> geometric_nodes(double a, double b, std::size_t n);
std::vector<double> uniform_nodes(double a, double b, std::size_t n);

double central_difference(const std::function<double(double)>& f, double x);

}  // namespace rmfg

#include "rmfg/numerics_impl.hpp"
