#include "rmfg/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmfg/errors.hpp"

namespace rmfg {

std::string tolerance_tag(const SolverOptions& o) {
    std::ostringstream os;
    os.precision(6);
    os << "ode=" << o.tol_ode << ";beta=" << o.tol_beta << ";gap=" << o.tol_gap_rel << ";quad=" << o.tol_quad
       << ";xlo=" << o.x_lo_rel << ";n=" << o.n_geometric << "/" << o.n_uniform;
    return os.str();
}

double StationaryDistribution::log_unnormalized(double x) const {
    double sg = spec_->sigma(x);
    return std::log(2.0 / (sg * sg)) - S_(x) - 2.0 * epsilon_ * V_(x) - log_shift;
}

double StationaryDistribution::density_at(double x) const {
    if (x < grid.front() || x > beta) return 0.0;
    return std::exp(log_unnormalized(x)) / norm_constant;
}

double StationaryDistribution::mode() const {
    auto it = std::max_element(density.begin(), density.end());
    return grid[static_cast<std::size_t>(it - density.begin())];
}

double StationaryDistribution::moment(const ScalarField& g, const std::string& tag) const {
    std::string key;
    if (!tag.empty()) {
        key = tag + "|" + tolerance_tag;
        std::lock_guard<std::mutex> lk(*cache_mutex_);
        auto it = cache_->find(key);
        if (it != cache_->end()) return it->second;
    }
    double total = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        scale = std::max(scale, std::abs(g(grid[i + 1])) * density[i + 1]);
    for (std::size_t i = grid.size() - 1; i-- > 0;) {
        total += integrate_gk([&](double x) { return g(x) * density_at(x); }, grid[i], grid[i + 1], 1e-2 * tol_quad,
                              nullptr, 1e-3 * tol_quad * scale * (grid[i + 1] - grid[i]));
    }
    if (!key.empty()) {
        std::lock_guard<std::mutex> lk(*cache_mutex_);
        cache_->emplace(key, total);
    }
    return total;
}

double moment(const StationaryDistribution& dist, const ScalarField& g, const std::string& tag) {
    return dist.moment(g, tag);
}

StationaryDistribution stationary_density(const ProblemSpec& spec, const FreeBoundarySolution& fbs,
                                          const SolverOptions& opt) {
    StationaryDistribution d;
    d.theta = fbs.theta;
    d.beta = fbs.beta;
    d.grid = fbs.bvp.x;
    d.tol_quad = opt.tol_quad;
    d.tolerance_tag = tolerance_tag(opt);
    d.epsilon_ = spec.epsilon;
    d.spec_ = std::make_shared<const ProblemSpec>(spec);
    const auto& x = d.grid;
    const std::size_t n = x.size();

    auto ratio = [&](double y) {
        double sg = spec.sigma(y);
        return 2.0 * spec.b(y) / (sg * sg);
    };
    std::vector<double> S(n, 0.0), dS(n);
    for (std::size_t i = n - 1; i-- > 0;) S[i] = S[i + 1] + integrate_gk(ratio, x[i], x[i + 1], 1e-13);
    for (std::size_t i = 0; i < n; ++i) dS[i] = -ratio(x[i]);
    d.S_ = HermiteCurve(x, S, dS);
    d.V_ = HermiteCurve(x, fbs.V, fbs.bvp.phi);

    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double sg = spec.sigma(x[i]);
        shift = std::max(shift, std::log(2.0 / (sg * sg)) - S[i] - 2.0 * spec.epsilon * fbs.V[i]);
    }
    d.log_shift = shift;
    d.norm_constant = 1.0;

    std::vector<double> cum(n, 0.0);
    try {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double piece = integrate_gk([&](double t) { return d.density_at(t); }, x[i], x[i + 1], 1e-2 * opt.tol_quad,
                                        nullptr, 1e-3 * opt.tol_quad * (x[i + 1] - x[i]));
            cum[i + 1] = cum[i] + piece;
        }
    } catch (const QuadratureError& e) {
        throw NormalizationDiverged(std::string("density normalization failed: ") + e.what());
    }
    double Z = cum.back();
    if (!(Z > 0) || !std::isfinite(Z)) throw NormalizationDiverged("density normalization is not positive/finite");
    d.norm_constant = Z;
    d.density.resize(n);
    d.cdf.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.density[i] = d.density_at(x[i]);
        d.cdf[i] = cum[i] / Z;
    }
    d.cdf.back() = 1.0;
    d.truncation_mass = d.density.front() * x.front();
    return d;
}

double stationarity_residual(const ProblemSpec& spec, const FreeBoundarySolution& fbs,
                             const StationaryDistribution& dist) {
    double mmax = *std::max_element(dist.density.begin(), dist.density.end());
    double worst = 0.0;
    const auto& x = dist.grid;
    auto flux = [&](double t) {
        double sg = spec.sigma(t);
        return 0.5 * sg * sg * dist.density_at(t);
    };
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        double h = std::min(1e-4 * x[i], 0.5 * std::min(x[i] - x[i - 1], x[i + 1] - x[i]));
        double lhs = (flux(x[i] + h) - flux(x[i] - h)) / (2 * h);
        double sg = spec.sigma(x[i]);
        double rhs = (spec.b(x[i]) - spec.epsilon * sg * sg * fbs.bvp.phi[i]) * dist.density[i];
        worst = std::max(worst, std::abs(lhs - rhs) / mmax);
    }
    return worst;
}

double renormalize_check(const StationaryDistribution& dist, int refine) {
    const auto& x = dist.grid;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        int m = 2 * refine;
        double h = (x[i + 1] - x[i]) / m;
        double acc = dist.density_at(x[i]) + dist.density_at(x[i + 1]);
        for (int k = 1; k < m; ++k) acc += (k % 2 ? 4.0 : 2.0) * dist.density_at(x[i] + k * h);
        total += acc * h / 3.0;
    }
    return total;
}

ConsistencyEval evaluate_consistency(const ProblemSpec& spec, double theta, const SolverOptions& opt) {
    auto fbs = compute_beta(spec, theta, opt);
    auto dist = stationary_density(spec, fbs, opt);
    ConsistencyEval e;
    e.theta = theta;
    e.beta = fbs.beta;
    e.lambda = fbs.lambda;
    e.moment = dist.moment(spec.interaction.f, "f");
    e.T = spec.interaction.F(e.moment);
    return e;
}

double consistency_map(const ProblemSpec& spec, double theta, const SolverOptions& opt) {
    return evaluate_consistency(spec, theta, opt).T;
}

}  // namespace rmfg
