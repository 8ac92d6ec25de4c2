#include "rmfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rmfg/errors.hpp"
#include "rmfg/parallel.hpp"

namespace rmfg {

const char* to_string(EquilibriumMethod m) {
    switch (m) {
        case EquilibriumMethod::damped_fixed_point: return "damped_fixed_point";
        case EquilibriumMethod::bisection_on_g: return "bisection_on_g";
        case EquilibriumMethod::policy_iteration: return "policy_iteration";
    }
    return "unknown";
}

ConsistencyEvaluator::ConsistencyEvaluator(ProblemSpec spec, SolverOptions opt)
    : spec_(std::move(spec)), opt_(opt) {}

ConsistencyEval ConsistencyEvaluator::operator()(double theta) const {
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = memo_.find(theta);
        if (it != memo_.end()) return it->second;
    }
    ConsistencyEval e = evaluate_consistency(spec_, theta, opt_);
    std::lock_guard<std::mutex> lk(mu_);
    memo_.emplace(theta, e);
    return e;
}

std::size_t ConsistencyEvaluator::evaluations() const {
    std::lock_guard<std::mutex> lk(mu_);
    return memo_.size();
}

ThetaBracket theta_bracket(const ProblemSpec& spec, const SolverOptions& opt) {
    ProblemSpec rob = robust_spec(spec);
    FreeBoundarySolution fr = compute_beta(rob, 1.0, opt);
    StationaryDistribution dr = stationary_density(rob, fr, opt);
    ThetaBracket br;
    br.beta_robust = fr.beta;
    br.robust_lo = spec.interaction.F(dr.moment(spec.interaction.f, "f"));
    FreeBoundarySolution fl = compute_beta(spec, br.robust_lo, opt);
    br.robust_hi = spec.interaction.F(spec.interaction.f(fl.beta));
    if (!(std::isfinite(br.robust_lo) && std::isfinite(br.robust_hi)) || br.robust_lo <= 0.0 ||
        br.robust_hi < br.robust_lo - opt.tol_fp) {
        std::ostringstream os;
        os.precision(12);
        os << "theta bracket collapsed: lo=" << br.robust_lo << " hi=" << br.robust_hi;
        throw BracketCollapsed(os.str());
    }
    br.lo = br.robust_lo;
    br.hi = std::max(br.robust_hi, br.robust_lo);
    return br;
}

ThetaBracket secure_bracket(const ConsistencyEvaluator& T, ThetaBracket br, std::size_t max_steps) {
    const double tol = T.options().tol_fp;
    std::ostringstream note;
    note.precision(12);
    auto g = [&](double th) {
        auto e = T(th);
        return e.T - th;
    };
    std::size_t k = 0;
    while (g(br.lo) < -tol) {
        if (++k > max_steps) throw NoSignChange("g stays negative while lowering the bracket");
        br.lo *= 0.5;
        br.repaired = true;
    }
    if (br.repaired) {
        double hi2 = T.spec().interaction.F(T.spec().interaction.f(compute_beta(T.spec(), br.lo, T.options()).beta));
        note << "lo lowered to " << br.lo << "; ";
        if (hi2 > br.hi) {
            br.hi = hi2;
            note << "hi raised to " << br.hi << "; ";
        }
    }
    k = 0;
    while (g(br.hi) > tol) {
        if (++k > max_steps) throw NoSignChange("g stays positive while raising the bracket");
        br.hi *= 2.0;
        br.repaired = true;
        note << "hi doubled to " << br.hi << "; ";
    }
    br.note = note.str();
    if (!br.note.empty()) br.note.resize(br.note.size() - 2);
    return br;
}

namespace {

ThetaBracket working_bracket(const ConsistencyEvaluator& T, const EquilibriumOptions& opt) {
    ThetaBracket br = opt.bracket ? *opt.bracket : theta_bracket(T.spec(), T.options());
    if (opt.bracket) return br;
    return secure_bracket(T, br);
}

void finish(EquilibriumResult& r, const ConsistencyEvaluator& T) {
    auto e = T(r.theta_star);
    r.beta_star = e.beta;
    r.lambda_star = e.lambda;
    r.residual = e.T - r.theta_star;
}

}  // namespace

EquilibriumResult find_equilibrium_bisection(const ProblemSpec& spec, const EquilibriumOptions& opt) {
    ConsistencyEvaluator T(spec, opt.solver);
    EquilibriumResult r;
    r.method = EquilibriumMethod::bisection_on_g;
    r.bracket = working_bracket(T, opt);
    const double tol = opt.solver.tol_fp;
    double lo = r.bracket.lo, hi = r.bracket.hi;
    auto elo = T(lo), ehi = T(hi);
    double glo = elo.T - lo, ghi = ehi.T - hi;
    r.trace.push_back({0, lo, elo.T, elo.beta, glo, "lo"});
    r.trace.push_back({0, hi, ehi.T, ehi.beta, ghi, "hi"});
    if (glo < -tol && ghi < -tol) throw NoSignChange("g < 0 at both bracket ends");
    if (glo > tol && ghi > tol) throw NoSignChange("g > 0 at both bracket ends");
    double best = std::abs(glo) <= std::abs(ghi) ? lo : hi;
    double best_g = std::min(std::abs(glo), std::abs(ghi));
    std::size_t it = 0;
    if (best_g > 0.5 * tol) {
        while (it < opt.max_iter) {
            ++it;
            double mid = 0.5 * (lo + hi);
            auto e = T(mid);
            double g = e.T - mid;
            r.trace.push_back({it, mid, e.T, e.beta, g, ""});
            if (std::abs(g) < best_g) {
                best_g = std::abs(g);
                best = mid;
            }
            if (std::abs(g) <= 0.5 * tol) break;
            if (g > 0) lo = mid;
            else hi = mid;
            if (hi - lo <= 1e-3 * tol * std::max(1.0, std::abs(mid))) break;
        }
        if (it >= opt.max_iter && best_g > tol) throw MaxIterExceeded("bisection did not converge", best);
    }
    r.theta_star = best;
    r.iterations = it;
    finish(r, T);
    return r;
}

EquilibriumResult find_equilibrium_damped(const ProblemSpec& spec, const EquilibriumOptions& opt,
                                          std::optional<double> start) {
    if (!(opt.rho > 0.0 && opt.rho <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
    ConsistencyEvaluator T(spec, opt.solver);
    EquilibriumResult r;
    r.method = EquilibriumMethod::damped_fixed_point;
    r.bracket = working_bracket(T, opt);
    const double tol = opt.solver.tol_fp;
    double rho = opt.rho;
    double th = start ? std::clamp(*start, r.bracket.lo, r.bracket.hi) : r.bracket.lo;
    double best = th, best_g = std::numeric_limits<double>::infinity();
    double prev_g = 0.0;
    int alternations = 0;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        auto e = T(th);
        double g = e.T - th;
        std::string note;
        if (std::abs(g) < best_g) {
            best_g = std::abs(g);
            best = th;
        }
        if (it > 0 && g * prev_g < 0) ++alternations;
        else alternations = 0;
        if (rho == 1.0 && alternations >= 2) {
            rho = 0.5;
            note = "oscillation: damping reset to 0.5";
        }
        r.trace.push_back({it, th, e.T, e.beta, g, note});
        if (std::abs(g) <= tol) {
            r.theta_star = th;
            r.iterations = it + 1;
            finish(r, T);
            return r;
        }
        prev_g = g;
        th = std::clamp((1.0 - rho) * th + rho * e.T, r.bracket.lo, r.bracket.hi);
    }
    throw MaxIterExceeded("damped iteration did not converge", best);
}

namespace {

// second derivative of phi + c at beta along the Riccati flow
double curvature_at_boundary(const ProblemSpec& s, double beta, double theta) {
    double lambda = eval_ell(s, beta, theta);
    double phi = -s.c(beta);
    double h = 1e-5 * (1.0 + std::abs(beta));
    double fx = (riccati_rhs(s, lambda, 0.0, theta, beta + h, phi) - riccati_rhs(s, lambda, 0.0, theta, beta - h, phi)) /
                (2 * h);
    double sg = s.sigma(beta);
    double fphi = (-2.0 * s.b(beta) + 2.0 * s.epsilon * sg * sg * phi) / (sg * sg);
    double phix = riccati_rhs(s, lambda, 0.0, theta, beta, phi);
    return fx + fphi * phix + s.cost.c.dd(beta);
}

}  // namespace

InnerResult pia_inner(const ProblemSpec& s, double theta, double beta0, const EquilibriumOptions& opt) {
    const EllLandmarks L = find_landmarks(s, theta);
    const SolverOptions& so = opt.solver;
    const double tau0 = opt.tol_pia > 0 ? opt.tol_pia : 1e-4 * std::max(s.cost.c_hi, 1e-12);
    const double delta_floor = 0.1 * so.tol_beta;
    InnerResult res;
    double beta = beta0;
    double tau = tau0;
    res.betas.push_back(beta);
    while (res.accepted + res.stalls < opt.pia_inner_steps) {
        if (res.stalls >= opt.pia_inner_stalls) {
            res.stop = "stall limit";
            break;
        }
        if (!(beta > L.xhat)) {
            res.stop = "reached lower landmark";
            break;
        }
        auto nodes = uniform_nodes(L.xhat, beta, opt.pia_nodes);
        BackwardProfile prof = backward_profile(s, beta, theta, nodes, so);
        // largest crossing of phi + c = tau below beta
        double cross = std::numeric_limits<double>::quiet_NaN();
        const std::size_t n = prof.x.size();
        for (std::size_t j = n - 1; j-- > 0;) {
            double gj = prof.phi[j] + s.c(prof.x[j]);
            if (gj >= tau) {
                if (j == n - 2) {
                    double k = curvature_at_boundary(s, beta, theta);
                    double d = k > 0 ? std::sqrt(2.0 * tau / k) : prof.x[n - 1] - prof.x[j];
                    cross = beta - std::min(d, prof.x[n - 1] - prof.x[j]);
                } else {
                    double g1 = prof.phi[j + 1] + s.c(prof.x[j + 1]);
                    double w = (tau - g1) / (gj - g1);
                    cross = prof.x[j + 1] + w * (prof.x[j] - prof.x[j + 1]);
                }
                break;
            }
        }
        if (std::isnan(cross)) {
            if (in_B(s, beta, theta, so).member) {
                res.stop = "no crossing; boundary is a member";
                break;
            }
            std::ostringstream os;
            os.precision(12);
            os << "policy iteration inner loop: no crossing at beta=" << beta << " theta=" << theta
               << " and beta is not a member (sweep " << prof.outcome << " at " << prof.stop_x << ")";
            throw InnerStall(os.str());
        }
        if (beta - cross < delta_floor) {
            res.stop = "update below resolution";
            break;
        }
        if (in_B(s, cross, theta, so).member) {
            beta = cross;
            ++res.accepted;
            res.betas.push_back(beta);
        } else {
            tau *= 0.25;
            ++res.stalls;
        }
    }
    if (res.stop.empty()) res.stop = "step limit";
    res.beta = beta;
    return res;
}

EquilibriumResult policy_iteration(const ProblemSpec& spec, const EquilibriumOptions& opt) {
    ConsistencyEvaluator T(spec, opt.solver);
    EquilibriumResult r;
    r.method = EquilibriumMethod::policy_iteration;
    r.bracket = working_bracket(T, opt);
    const SolverOptions& so = opt.solver;
    double theta = r.bracket.lo;
    double beta_prev = std::numeric_limits<double>::quiet_NaN();
    int calm = 0;
    for (std::size_t n = 0; n < opt.pia_outer; ++n) {
        EllLandmarks L = find_landmarks(spec, theta);
        InnerResult in = pia_inner(spec, theta, L.xhat_lower, opt);
        FreeBoundarySolution fbs = assemble_free_boundary(spec, theta, in.beta, L, so);
        StationaryDistribution dist = stationary_density(spec, fbs, so);
        double tv = spec.interaction.F(dist.moment(spec.interaction.f, "f"));
        std::ostringstream note;
        note << "inner " << in.accepted << " accepted, " << in.stalls << " stalls, " << in.stop;
        double next = theta;
        if (tv >= r.bracket.lo && tv <= r.bracket.hi) next = tv;
        else note << "; update outside bracket, theta kept";
        r.trace.push_back({n, theta, tv, in.beta, tv - theta, note.str()});
        double dth = std::abs(next - theta);
        double dbe = std::isnan(beta_prev) ? std::numeric_limits<double>::infinity() : std::abs(in.beta - beta_prev);
        calm = (dth <= so.tol_fp && dbe <= 10.0 * so.tol_beta) ? calm + 1 : 0;
        beta_prev = in.beta;
        if (calm >= 2) {
            r.theta_star = theta;
            r.beta_star = in.beta;
            r.lambda_star = fbs.lambda;
            r.residual = tv - theta;
            r.iterations = n + 1;
            return r;
        }
        theta = next;
    }
    throw MaxIterExceeded("policy iteration did not settle", theta);
}

std::vector<ScanRow> scan_consistency(const ConsistencyEvaluator& T, double lo, double hi, std::size_t n) {
    std::vector<ScanRow> rows(n);
    parallel_for(n, [&](std::size_t i) {
        double th = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        auto e = T(th);
        rows[i] = {th, e.T, e.T - th, e.beta, e.lambda};
    });
    return rows;
}

std::size_t sign_changes(const std::vector<ScanRow>& rows) {
    std::size_t k = 0;
    int prev = 0;
    for (const auto& r : rows) {
        int s = r.g > 0 ? 1 : (r.g < 0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++k;
        prev = s;
    }
    return k;
}

}  // namespace rmfg
