#include "rmfg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rmfg/parallel.hpp"

namespace rmfg {

void McConfig::validate() const {
    if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be > 0");
    if (dt > horizon / 1000.0) throw std::invalid_argument("dt must be <= horizon/1000");
    if (!(burn_in >= 0 && burn_in < horizon)) throw std::invalid_argument("burn_in must lie in [0, horizon)");
    if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (x0 < 0) throw std::invalid_argument("x0 must be >= 0");
    if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

Kernel worst_case_kernel(const ProblemSpec& spec, const FreeBoundarySolution& fbs) {
    return [&spec, &fbs](double x) { return -spec.epsilon * spec.sigma(x) * fbs.vx(x); };
}

double reflected_step(const ProblemSpec& spec, const Kernel& psi, double beta, double x, double dt, double z,
                      double* dxi) {
    double sg = spec.sigma(x);
    double y = x + (spec.b(x) + sg * psi(x)) * dt + sg * std::sqrt(dt) * z;
    if (y > beta) {
        *dxi += y - beta;
        y = beta;
    }
    return y;
}

namespace {

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return std::mt19937_64(seq);
}

struct PathResult {
    double payoff = 0.0;
    double moment = 0.0;
    double xi = 0.0;
    std::vector<double> hist;
    std::size_t steps = 0;
    std::size_t resamples = 0;
    double max_state = 0.0;
    double min_state = 0.0;
    std::vector<PathPoint> path;
};

// pairwise sum in fixed order
double pairwise(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    std::size_t h = n / 2;
    return pairwise(v, h) + pairwise(v + h, n - h);
}

}  // namespace

McEstimate simulate_reflected(const ProblemSpec& spec, const FreeBoundarySolution& fbs, const McConfig& cfg,
                              const Kernel& psi_in) {
    cfg.validate();
    const Kernel psi = psi_in ? psi_in : worst_case_kernel(spec, fbs);
    const double beta = fbs.beta;
    const double x_lo = fbs.x_lo();
    const double theta = fbs.theta;
    const double eps = spec.epsilon;
    const auto& grid = fbs.bvp.x;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    const std::size_t n_burn = static_cast<std::size_t>(std::llround(cfg.burn_in / cfg.dt));
    const double start = cfg.x0 > 0 ? cfg.x0 : beta;

    McEstimate est;
    est.initial_jump = std::max(0.0, start - beta);
    std::vector<PathResult> res(cfg.n_paths);

    parallel_for(cfg.n_paths, [&](std::size_t p) {
        auto eng = path_engine(cfg.seed, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        PathResult& r = res[p];
        r.hist.assign(grid.size(), 0.0);
        double x = std::min(start, beta);
        double xi_cum = est.initial_jump;
        r.max_state = x;
        r.min_state = x;
        double sum_pi = 0.0, sum_f = 0.0, sum_cost = 0.0;
        if (cfg.record_path && p == 0) r.path.push_back({0.0, x, xi_cum});
        for (std::size_t k = 0; k < n_steps; ++k) {
            double dxi = 0.0;
            double y = reflected_step(spec, psi, beta, x, cfg.dt, normal(eng), &dxi);
            for (int tries = 0; y <= x_lo && tries < 100; ++tries) {
                ++r.resamples;
                dxi = 0.0;
                y = reflected_step(spec, psi, beta, x, cfg.dt, normal(eng), &dxi);
            }
            if (y <= x_lo) y = x;
            if (k >= n_burn) {
                double ps = psi(x);
                sum_pi += spec.pi(x, theta) + ps * ps / (2.0 * eps);
                sum_f += spec.interaction.f(x);
                sum_cost += spec.c(x) * dxi;
                r.xi += dxi;
                auto it = std::lower_bound(grid.begin(), grid.end(), y);
                std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - grid.begin()), grid.size() - 1);
                r.hist[j] += 1.0;
            }
            xi_cum += dxi;
            x = y;
            r.max_state = std::max(r.max_state, x);
            r.min_state = std::min(r.min_state, x);
            if (cfg.record_path && p == 0 && (k + 1) % cfg.record_stride == 0)
                r.path.push_back({(k + 1) * cfg.dt, x, xi_cum});
        }
        double n_avg = static_cast<double>(n_steps - n_burn);
        double t_avg = n_avg * cfg.dt;
        r.payoff = sum_pi / n_avg - sum_cost / t_avg;
        r.moment = sum_f / n_avg;
        r.xi /= t_avg;
        r.steps = n_steps;
    });

    const std::size_t P = cfg.n_paths;
    std::vector<double> pay(P), mom(P), xi(P);
    for (std::size_t p = 0; p < P; ++p) {
        pay[p] = res[p].payoff;
        mom[p] = res[p].moment;
        xi[p] = res[p].xi;
        est.steps += res[p].steps;
        est.resamples += res[p].resamples;
        est.max_state = p == 0 ? res[p].max_state : std::max(est.max_state, res[p].max_state);
        est.min_state = p == 0 ? res[p].min_state : std::min(est.min_state, res[p].min_state);
    }
    auto mean_se = [P](const std::vector<double>& v, double* se) {
        double m = pairwise(v.data(), P) / static_cast<double>(P);
        if (P < 2) {
            *se = 0.0;
            return m;
        }
        std::vector<double> d(P);
        for (std::size_t i = 0; i < P; ++i) d[i] = (v[i] - m) * (v[i] - m);
        *se = std::sqrt(pairwise(d.data(), P) / static_cast<double>(P - 1) / static_cast<double>(P));
        return m;
    };
    est.ergodic_payoff = mean_se(pay, &est.payoff_se);
    est.moment_f = mean_se(mom, &est.moment_se);
    est.control_rate = pairwise(xi.data(), P) / static_cast<double>(P);
    est.path_payoffs = pay;
    est.resample_flag = est.resamples > est.steps / 100;

    est.cdf_grid = grid;
    est.cdf.assign(grid.size(), 0.0);
    std::vector<double> col(P);
    double total = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        for (std::size_t p = 0; p < P; ++p) col[p] = res[p].hist[j];
        total += pairwise(col.data(), P);
        est.cdf[j] = total;
    }
    for (auto& v : est.cdf) v /= total;
    est.cdf.back() = 1.0;
    if (cfg.record_path) est.path = std::move(res[0].path);
    return est;
}

double compare_distribution(const McEstimate& est, const StationaryDistribution& dist) {
    double worst = 0.0;
    for (std::size_t i = 0; i < dist.grid.size(); ++i) {
        double x = dist.grid[i];
        auto it = std::upper_bound(est.cdf_grid.begin(), est.cdf_grid.end(), x);
        double F = it == est.cdf_grid.begin() ? 0.0 : est.cdf[static_cast<std::size_t>(it - est.cdf_grid.begin()) - 1];
        worst = std::max(worst, std::abs(F - dist.cdf[i]));
    }
    return worst;
}

double comparison_gap(const ProblemSpec& spec, double beta, const Kernel& psi1, const Kernel& psi2, double x0,
                      double dt, std::size_t steps, std::uint64_t seed) {
    auto eng = path_engine(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double x1 = x0, x2 = x0, worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < steps; ++k) {
        double z = normal(eng);
        double d1 = 0.0, d2 = 0.0;
        x1 = reflected_step(spec, psi1, beta, x1, dt, z, &d1);
        x2 = reflected_step(spec, psi2, beta, x2, dt, z, &d2);
        worst = std::max(worst, x1 - x2);
    }
    return worst;
}

}  // namespace rmfg
