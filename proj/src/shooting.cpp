#include "rmfg/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmfg/errors.hpp"

namespace rmfg {

const char* to_string(BvpMethod m) { return m == BvpMethod::cole_hopf ? "cole_hopf" : "riccati_direct"; }

std::vector<double> default_nodes(double x_lo, double beta, const SolverOptions& opt) {
    double split = opt.split_rel * beta;
    std::vector<double> out;
    if (x_lo < split) {
        out = geometric_nodes(x_lo, split, opt.n_geometric);
        auto u = uniform_nodes(split, beta, opt.n_uniform);
        out.insert(out.end(), u.begin() + 1, u.end());
    } else {
        out = uniform_nodes(x_lo, beta, opt.n_uniform);
    }
    return out;
}

double default_x_lo(const ProblemSpec&, double beta, const EllLandmarks& L, const SolverOptions& opt) {
    return std::max(L.x_min, opt.x_lo_rel * beta);
}

double riccati_rhs(const ProblemSpec& s, double lambda, double gamma, double theta, double x, double phi) {
    double sg = s.sigma(x);
    double s2 = sg * sg;
    double q = lambda - s.pi(x, theta) + gamma;
    return 2.0 * (q - s.b(x) * phi + 0.5 * s.epsilon * s2 * phi * phi) / s2;
}

namespace {

double riccati_jac(const ProblemSpec& s, double x, double phi) {
    double sg = s.sigma(x);
    return (-2.0 * s.b(x) + 2.0 * s.epsilon * sg * sg * phi) / (sg * sg);
}

StepControl control(const SolverOptions& opt) {
    StepControl c;
    c.rtol = opt.tol_ode;
    c.atol = opt.tol_ode;
    return c;
}

std::vector<double> resolve_nodes(const ProblemSpec& s, double beta, double theta, const GridConfig& g,
                                  const SolverOptions& opt, double* x_lo_out) {
    if (!g.nodes.empty()) {
        if (x_lo_out) *x_lo_out = g.nodes.front();
        return g.nodes;
    }
    double x_lo = g.x_lo;
    if (x_lo <= 0) {
        EllLandmarks L;
        try {
            L = find_landmarks(s, theta);
        } catch (const SolverError&) {
            L.x_min = s.x_min_rel * beta;
        }
        x_lo = default_x_lo(s, beta, L, opt);
    }
    if (!(x_lo > 0 && x_lo < beta)) throw std::invalid_argument("grid: need 0 < x_lo < beta");
    if (x_lo_out) *x_lo_out = x_lo;
    return default_nodes(x_lo, beta, opt);
}

enum class SweepEnd { completed, escape_up, escape_down, below_band };

struct Sweep {
    std::vector<double> x;    // descending
    std::vector<double> phi;
    SweepEnd end = SweepEnd::completed;
    double stop_x = 0.0;
    double min_gap = std::numeric_limits<double>::infinity();
    double min_x = 0.0;
};

// backward Riccati sweep from beta; records values at `nodes` (ascending input)
Sweep backward_sweep(const ProblemSpec& s, double beta, double gamma, double theta, double x_lo,
                     const std::vector<double>& nodes, const SolverOptions& opt, bool band_exit) {
    const double lambda = eval_ell(s, beta, theta);
    const double tol_gap = opt.tol_gap(s);
    Sweep sw;
    std::vector<double> desc(nodes.rbegin(), nodes.rend());
    std::size_t k = 0;
    while (k < desc.size() && desc[k] >= beta) ++k;
    double phi_b = -s.c(beta);
    sw.x.push_back(beta);
    sw.phi.push_back(phi_b);
    sw.min_gap = 0.0;
    sw.min_x = beta;

    const double pre = std::abs(lambda) + std::abs(s.pi(beta, theta)) + 1.0;
    double bound = -1.0;

    DormandPrince<1> dp(control(opt));
    auto rhs = [&](double x, const std::array<double, 1>& y) {
        return std::array<double, 1>{riccati_rhs(s, lambda, gamma, theta, x, y[0])};
    };
    auto obs = [&](double x, const std::array<double, 1>& y, const std::array<double, 1>&) {
        double gap = y[0] + s.c(x);
        if (gap < sw.min_gap) {
            sw.min_gap = gap;
            sw.min_x = x;
        }
        while (k < desc.size() && desc[k] > x) ++k;
        if (k < desc.size() && desc[k] == x) {
            sw.x.push_back(x);
            sw.phi.push_back(y[0]);
            ++k;
        }
        if (band_exit && gap < -tol_gap) {
            sw.end = SweepEnd::below_band;
            sw.stop_x = x;
            return false;
        }
        if (std::abs(y[0]) > pre) {
            if (bound < 0) {
                double m = speed_measure(s, 1e-6 * beta, beta, beta);
                bound = 1e3 * std::max(pre * m, pre);
            }
            if (std::abs(y[0]) > bound) {
                sw.end = y[0] > 0 ? SweepEnd::escape_up : SweepEnd::escape_down;
                sw.stop_x = x;
                return false;
            }
        }
        return true;
    };
    double xe = dp.integrate(rhs, beta, {phi_b}, x_lo, nodes, obs);
    if (sw.end == SweepEnd::completed) sw.stop_x = xe;
    return sw;
}

BvpSolution pack(const ProblemSpec& s, double beta, double gamma, double theta, std::vector<double> xd,
                 std::vector<double> pd, BvpMethod m) {
    BvpSolution out;
    out.beta = beta;
    out.gamma = gamma;
    out.theta = theta;
    out.method = m;
    std::reverse(xd.begin(), xd.end());
    std::reverse(pd.begin(), pd.end());
    out.x = std::move(xd);
    out.phi = std::move(pd);
    const double lambda = eval_ell(s, beta, theta);
    out.phi_x.resize(out.x.size());
    for (std::size_t i = 0; i < out.x.size(); ++i)
        out.phi_x[i] = riccati_rhs(s, lambda, gamma, theta, out.x[i], out.phi[i]);
    return out;
}

}  // namespace

double boundedness_constant(const ProblemSpec& s, double beta, double theta) {
    double lambda = eval_ell(s, beta, theta);
    return (std::abs(lambda) + s.pi(beta, theta)) * speed_measure(s, 1e-6 * beta, beta, beta);
}

BvpSolution solve_bvp(const ProblemSpec& s, double beta, double gamma, double theta, const GridConfig& grid,
                      const SolverOptions& opt) {
    if (!(beta > 0)) throw std::invalid_argument("solve_bvp: beta must be > 0");
    double x_lo = 0.0;
    auto nodes = resolve_nodes(s, beta, theta, grid, opt, &x_lo);
    Sweep sw = backward_sweep(s, beta, gamma, theta, x_lo, nodes, opt, false);
    if (sw.end == SweepEnd::escape_up || sw.end == SweepEnd::escape_down) {
        std::ostringstream os;
        os << "Riccati escape " << (sw.end == SweepEnd::escape_up ? "upward" : "downward") << " at x=" << sw.stop_x
           << " (beta=" << beta << ")";
        throw BlowUp(os.str(), sw.stop_x, sw.end == SweepEnd::escape_up);
    }
    return pack(s, beta, gamma, theta, std::move(sw.x), std::move(sw.phi), BvpMethod::riccati_direct);
}

BvpSolution solve_bvp_cole_hopf(const ProblemSpec& s, double beta, double gamma, double theta,
                                const GridConfig& grid, const SolverOptions& opt) {
    if (!(beta > 0)) throw std::invalid_argument("solve_bvp_cole_hopf: beta must be > 0");
    double x_lo = 0.0;
    auto nodes = resolve_nodes(s, beta, theta, grid, opt, &x_lo);
    const double lambda = eval_ell(s, beta, theta);
    const double eps = s.epsilon;
    auto rhs = [&](double x, const std::array<double, 2>& y) {
        double sg = s.sigma(x);
        double q = lambda - s.pi(x, theta) + gamma;
        return std::array<double, 2>{y[1], -2.0 * (s.b(x) * y[1] + eps * q * y[0]) / (sg * sg)};
    };
    DormandPrince<2> dp(control(opt));
    std::vector<double> desc(nodes.rbegin(), nodes.rend());
    std::vector<double> xd{beta}, pd{-s.c(beta)};
    std::array<double, 2> y{1.0 / s.c(beta), eps};
    double x = beta;
    for (double target : desc) {
        if (target >= beta) continue;
        // renormalize: phi only sees the ratio y_x / y
        double n = std::abs(y[0]);
        y = {y[0] / n, y[1] / n};
        std::array<double, 2> last = y;
        double sign = y[0] > 0 ? 1.0 : -1.0;
        dp.integrate(rhs, x, y, target, {}, [&](double xx, const std::array<double, 2>& v, const std::array<double, 2>&) {
            if (v[0] * sign <= 0) throw SignLoss("Cole-Hopf variable changed sign near x=" + std::to_string(xx), xx);
            last = v;
            return true;
        });
        y = last;
        x = target;
        xd.push_back(x);
        pd.push_back(-y[1] / (eps * y[0]));
    }
    auto out = pack(s, beta, gamma, theta, std::move(xd), std::move(pd), BvpMethod::cole_hopf);
    return out;
}

BackwardProfile backward_profile(const ProblemSpec& s, double beta, double theta, const std::vector<double>& nodes,
                                 const SolverOptions& opt) {
    if (nodes.empty() || !(nodes.front() < beta)) throw std::invalid_argument("backward_profile: need nodes below beta");
    Sweep sw = backward_sweep(s, beta, 0.0, theta, nodes.front(), nodes, opt, false);
    BackwardProfile out;
    out.x.assign(sw.x.rbegin(), sw.x.rend());
    out.phi.assign(sw.phi.rbegin(), sw.phi.rend());
    out.stop_x = sw.stop_x;
    out.outcome = sw.end == SweepEnd::escape_up     ? "escape_up"
                  : sw.end == SweepEnd::escape_down ? "escape_down"
                                                    : "completed";
    return out;
}

Membership in_B(const ProblemSpec& s, double beta, double theta, const SolverOptions& opt) {
    EllLandmarks L;
    try {
        L = find_landmarks(s, theta);
    } catch (const SolverError&) {
        L.x_min = s.x_min_rel * beta;
    }
    double x_lo = default_x_lo(s, beta, L, opt);
    Sweep sw = backward_sweep(s, beta, 0.0, theta, x_lo, {}, opt, true);
    Membership m;
    m.witness_x = sw.min_x;
    m.witness_gap = sw.min_gap;
    switch (sw.end) {
        case SweepEnd::completed:
            m.member = sw.min_gap >= -opt.tol_gap(s);
            m.outcome = "completed";
            break;
        case SweepEnd::escape_up:
            m.member = true;
            m.outcome = "escape_up";
            break;
        case SweepEnd::escape_down:
            m.member = false;
            m.outcome = "escape_down";
            break;
        case SweepEnd::below_band:
            m.member = false;
            m.outcome = "below_band";
            break;
    }
    return m;
}

double amplification_floor(const ProblemSpec& s, const BvpSolution& sol, double limit) {
    const std::size_t n = sol.x.size();
    if (n < 2) return sol.x.empty() ? 0.0 : sol.x.front();
    const double cap = std::log(limit);
    double a = 0.0, amin = 0.0;
    double r_prev = riccati_jac(s, sol.x[n - 1], sol.phi[n - 1]);
    for (std::size_t j = n - 1; j-- > 0;) {
        double r = riccati_jac(s, sol.x[j], sol.phi[j]);
        a -= 0.5 * (r + r_prev) * (sol.x[j + 1] - sol.x[j]);
        r_prev = r;
        amin = std::min(amin, a);
        if (a - amin > cap) return sol.x[j + 1];
    }
    return sol.x.front();
}

BvpSolution solve_separatrix(const ProblemSpec& s, double beta, double gamma, double theta, const GridConfig& grid,
                             const SolverOptions& opt) {
    double x_lo = 0.0;
    auto nodes = resolve_nodes(s, beta, theta, grid, opt, &x_lo);
    const std::size_t N = nodes.size();
    Sweep sw = backward_sweep(s, beta, gamma, theta, x_lo, nodes, opt, false);
    BvpSolution bwd = pack(s, beta, gamma, theta, std::move(sw.x), std::move(sw.phi), BvpMethod::riccati_direct);
    const std::size_t kb = N - bwd.x.size();  // bwd covers nodes[kb .. N-1]

    const double lambda = eval_ell(s, beta, theta);
    const double eps = s.epsilon;
    double b0 = s.b(x_lo), sg0 = s.sigma(x_lo);
    double q0 = lambda - s.pi(x_lo, theta) + gamma;
    double disc = b0 * b0 - 2.0 * eps * sg0 * sg0 * q0;
    if (!(b0 > 0) || disc < 0) return bwd;
    double phi0 = 2.0 * q0 / (b0 + std::sqrt(disc));

    // forward implicit sweep from the slow root; covers nodes[0 .. kf-1]
    std::vector<double> pf{phi0};
    std::size_t k = 1;
    const double huge = 1e8 * (1.0 + std::abs(lambda) + std::abs(phi0));
    RadauScalar rad(control(opt));
    try {
        rad.integrate([&](double x, double p) { return riccati_rhs(s, lambda, gamma, theta, x, p); },
                      [&](double x, double p) { return riccati_jac(s, x, p); }, x_lo, phi0, beta, nodes,
                      [&](double x, double p) {
                          if (std::abs(p) > huge) return false;
                          while (k < N && nodes[k] < x) ++k;
                          if (k < N && nodes[k] == x) {
                              pf.push_back(p);
                              ++k;
                          }
                          return true;
                      });
    } catch (const StepUnderflow&) {
    }
    const std::size_t kf = pf.size();

    // error made at y reaches x amplified by exp(int_y^x r) forward, exp(-int_x^y r) backward
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> back(N, inf), fwd(N, inf);
    {
        double C = 0.0, cmax = 0.0, worst = 0.0;
        back[N - 1] = 0.0;
        for (std::size_t i = N - 1; i-- > kb;) {
            double r0 = riccati_jac(s, nodes[i], bwd.phi[i - kb]);
            double r1 = riccati_jac(s, nodes[i + 1], bwd.phi[i + 1 - kb]);
            C += 0.5 * (r0 + r1) * (nodes[i + 1] - nodes[i]);  // int_x^beta r
            cmax = std::max(cmax, C);
            worst = std::max(worst, cmax - C);
            back[i] = worst;
        }
    }
    {
        double B = 0.0, bmin = 0.0, worst = 0.0;
        fwd[0] = 0.0;
        for (std::size_t i = 1; i < kf; ++i) {
            double r0 = riccati_jac(s, nodes[i - 1], pf[i - 1]), r1 = riccati_jac(s, nodes[i], pf[i]);
            B += 0.5 * (r0 + r1) * (nodes[i] - nodes[i - 1]);  // int_{x_lo}^x r
            bmin = std::min(bmin, B);
            worst = std::max(worst, B - bmin);
            fwd[i] = worst;
        }
    }
    const double cap = std::log(opt.match_amplification);
    std::size_t jm = N;
    double best = inf;
    for (std::size_t j = 0; j < N; ++j) {
        double cost = std::max(back[j], fwd[j]);
        if (cost <= cap) {
            jm = j;
            break;
        }
        if (cost < best) {
            best = cost;
            jm = j;
        }
    }
    if (jm == N || jm == 0) return bwd;
    if (jm == N - 1) --jm;  // keep the terminal node on the backward side

    BvpSolution out;
    out.beta = beta;
    out.gamma = gamma;
    out.theta = theta;
    out.method = BvpMethod::riccati_direct;
    out.x.assign(nodes.begin(), nodes.end());
    out.phi.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.phi[i] = i < jm ? pf[i] : bwd.phi[i - kb];
    out.x_match = nodes[jm];
    out.match_gap = std::abs(pf[jm] - bwd.phi[jm - kb]);
    out.phi_x.resize(N);
    for (std::size_t i = 0; i < N; ++i) out.phi_x[i] = riccati_rhs(s, lambda, gamma, theta, out.x[i], out.phi[i]);
    return out;
}

double FreeBoundarySolution::vx(double x) const {
    if (x >= beta) return -c_beta_;
    return vx_curve_(x);
}

double FreeBoundarySolution::potential(double x) const {
    if (x >= beta) return -c_beta_ * (x - beta);
    if (x <= bvp.x.front()) return V.front() + bvp.phi.front() * (x - bvp.x.front());
    return v_curve_(x);
}

void FreeBoundarySolution::build_interpolants(const ProblemSpec& s) {
    vx_curve_ = MonotoneCubic(bvp.x, bvp.phi);
    v_curve_ = HermiteCurve(bvp.x, V, bvp.phi);
    c_beta_ = s.c(beta);
}

std::vector<double> integrate_potential(const BvpSolution& sol) {
    const auto& x = sol.x;
    const auto& p = sol.phi;
    const auto& px = sol.phi_x;
    const std::size_t n = x.size();
    std::vector<double> V(n, 0.0);
    for (std::size_t i = n - 1; i-- > 0;) {
        double h = x[i + 1] - x[i];
        V[i] = V[i + 1] - (0.5 * h * (p[i] + p[i + 1]) + h * h / 12.0 * (px[i] - px[i + 1]));
    }
    return V;
}

std::vector<double> worst_case_kernel_values(const ProblemSpec& s, const BvpSolution& sol) {
    std::vector<double> out(sol.x.size());
    for (std::size_t i = 0; i < sol.x.size(); ++i) out[i] = -s.epsilon * s.sigma(sol.x[i]) * sol.phi[i];
    return out;
}

FreeBoundarySolution assemble_free_boundary(const ProblemSpec& s, double theta, double beta, const EllLandmarks& L,
                                            const SolverOptions& opt) {
    FreeBoundarySolution f;
    f.theta = theta;
    f.beta = beta;
    f.lambda = eval_ell(s, beta, theta);
    f.landmarks = L;
    f.epsilon = s.epsilon;
    GridConfig g;
    g.x_lo = default_x_lo(s, beta, L, opt);
    f.bvp = solve_separatrix(s, beta, 0.0, theta, g, opt);
    f.V = integrate_potential(f.bvp);
    f.psi_star = worst_case_kernel_values(s, f.bvp);
    f.build_interpolants(s);
    return f;
}

FreeBoundarySolution compute_beta(const ProblemSpec& s, double theta, const SolverOptions& opt) {
    EllLandmarks L = find_landmarks(s, theta);
    Membership top = in_B(s, L.xhat_lower, theta, opt);
    if (!top.member) {
        std::ostringstream os;
        os << "upper landmark " << L.xhat_lower << " is not in B (gap " << top.witness_gap << " at "
           << top.witness_x << ")";
        throw BracketInvalid(os.str());
    }
    double lo = L.xhat, hi = L.xhat_lower;
    std::size_t steps = 0;
    if (in_B(s, lo, theta, opt).member) {
        hi = lo;
    } else {
        while (hi - lo > opt.tol_beta) {
            double mid = 0.5 * (lo + hi);
            if (in_B(s, mid, theta, opt).member) hi = mid;
            else lo = mid;
            ++steps;
        }
    }
    FreeBoundarySolution f = assemble_free_boundary(s, theta, hi, L, opt);
    f.beta_nonmember = lo;
    f.bisection_steps = steps;
    return f;
}

namespace {

// derivative at xs[at] of the interpolating polynomial through the given points
double lagrange_derivative(const double* xs, const double* ys, int n, int at) {
    double x0 = xs[at];
    double out = 0.0;
    for (int j = 0; j < n; ++j) {
        double w = 0.0;
        for (int m = 0; m < n; ++m) {
            if (m == j) continue;
            double term = 1.0 / (xs[j] - xs[m]);
            for (int k = 0; k < n; ++k) {
                if (k == j || k == m) continue;
                term *= (x0 - xs[k]) / (xs[j] - xs[k]);
            }
            w += term;
        }
        out += w * ys[j];
    }
    return out;
}

}  // namespace

ViReport check_variational_inequality(const ProblemSpec& s, const FreeBoundarySolution& f) {
    ViReport rep;
    const auto& x = f.bvp.x;
    const auto& p = f.bvp.phi;
    const int n = static_cast<int>(x.size());
    const double eps = s.epsilon;
    auto row = [&](double xx, double b1, double b2) {
        double v = std::max({b1, b2, std::min(std::abs(b1), std::abs(b2)), 0.0});
        rep.rows.push_back({xx, b1, b2, v});
        rep.max_violation = std::max(rep.max_violation, v);
    };
    for (int i = 1; i < n; ++i) {
        int start = std::clamp(i - 2, 0, n - 5);
        double vxx = lagrange_derivative(&x[start], &p[start], 5, i - start);
        double sg = s.sigma(x[i]);
        double b1 = 0.5 * sg * sg * vxx + s.b(x[i]) * p[i] - 0.5 * eps * sg * sg * p[i] * p[i] +
                    s.pi(x[i], f.theta) - f.lambda;
        double b2 = -p[i] - s.c(x[i]);
        row(x[i], b1, b2);
    }
    for (int k = 1; k <= 200; ++k) {
        double xx = f.beta * (1.0 + k / 200.0);
        row(xx, eval_ell(s, xx, f.theta) - f.lambda, 0.0);
    }
    rep.smooth_fit_residual = f.bvp.phi_x.back() + s.cost.c.d(f.beta);
    rep.smooth_fit_residual_fd = lagrange_derivative(&x[n - 5], &p[n - 5], 5, 4) + s.cost.c.d(f.beta);
    return rep;
}

std::vector<PerturbationRow> perturbation_gap(const ProblemSpec& s, double beta, double theta,
                                              const std::vector<double>& gammas, double x_floor,
                                              const SolverOptions& opt) {
    GridConfig g;
    g.x_lo = x_floor;
    BvpSolution base = solve_bvp(s, beta, 0.0, theta, g, opt);
    std::vector<PerturbationRow> out;
    for (double gm : gammas) {
        BvpSolution pert = solve_bvp(s, beta, gm, theta, g, opt);
        double gap = 0.0;
        for (std::size_t i = 0; i < base.x.size(); ++i) gap = std::max(gap, std::abs(pert.phi[i] - base.phi[i]));
        out.push_back({gm, gap, gm == 0.0 ? 0.0 : gap / std::abs(gm)});
    }
    return out;
}

}  // namespace rmfg
