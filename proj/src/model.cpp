#include "rmfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmfg/errors.hpp"
#include "rmfg/numerics.hpp"

namespace rmfg {

double ScalarField::d(double x) const {
    if (derivative) return derivative(x);
    return central_difference(value, x);
}

double ScalarField::dd(double x) const {
    if (second) return second(x);
    return central_difference([this](double t) { return d(t); }, x);
}

ScalarField ScalarField::constant(double v) {
    return {[v](double) { return v; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

void CaseStudyParams::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid case-study parameter: ") + what);
    };
    need(kappa > 0, "kappa must be > 0");
    need(alpha > 0, "alpha must be > 0");
    need(sigma > 0, "sigma must be > 0");
    need(eta > 0, "eta must be > 0");
    need(cost > 0, "cost must be > 0");
    need(delta > 0 && delta < 1, "delta must lie in (0, 1)");
    need(epsilon > 0, "epsilon must be > 0");
}

bool ValidationReport::all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const ValidationEntry& e) { return e.passed; });
}

namespace {

// pieces shared by the extraction and logistic builders
void fill_common(ProblemSpec& s, const CaseStudyParams& p) {
    const double sg = p.sigma, dl = p.delta, eta = p.eta;
    s.diffusion.sigma = {[sg](double x) { return sg * x; }, [sg](double) { return sg; },
                         [](double) { return 0.0; }};
    s.diffusion.growth_exponent = 1.0;
    s.cost.c = ScalarField::constant(p.cost);
    s.cost.c_lo = p.cost;
    s.cost.c_hi = p.cost;
    s.profit.pi = [dl, eta](double x, double th) { return std::pow(x, dl) * (std::pow(th, -(1 + dl)) + eta); };
    s.profit.pi_x = [dl, eta](double x, double th) {
        return dl * std::pow(x, dl - 1) * (std::pow(th, -(1 + dl)) + eta);
    };
    s.profit.pi_xtheta = [dl](double x, double th) {
        return -(1 + dl) * dl * std::pow(x, dl - 1) * std::pow(th, -(2 + dl));
    };
    s.profit.kappa = {[dl, eta](double x) { return eta * std::pow(x, dl); },
                      [dl, eta](double x) { return eta * dl * std::pow(x, dl - 1); },
                      [dl, eta](double x) { return eta * dl * (dl - 1) * std::pow(x, dl - 2); }};
    s.profit.lipschitz_delta = dl;
    // |d pi / d theta| bound for theta >= 0.1
    s.profit.lipschitz_C = (1 + dl) * std::pow(0.1, -(2 + dl));
    s.interaction.f = {[dl](double x) { return std::pow(x, dl); },
                       [dl](double x) { return dl * std::pow(x, dl - 1); }, {}};
    s.interaction.F = {[dl](double x) { return std::pow(x, 1.0 / dl); },
                       [dl](double x) { return std::pow(x, 1.0 / dl - 1) / dl; }, {}};
    s.interaction.delta = dl;
    s.epsilon = p.epsilon;
    s.params = p;
}

}  // namespace

ProblemSpec build_extraction_model(const CaseStudyParams& p) {
    p.validate();
    ProblemSpec s;
    const double k = p.kappa, a = p.alpha;
    s.diffusion.b = {[k, a](double x) { return a * (k - x); }, [a](double) { return -a; },
                     [](double) { return 0.0; }};
    fill_common(s, p);
    s.scale = k;
    s.kind = ModelKind::extraction;
    return s;
}

ProblemSpec build_logistic_model(const CaseStudyParams& p) {
    p.validate();
    ProblemSpec s;
    const double k = p.kappa, a = p.alpha;
    s.diffusion.b = {[k, a](double x) { return x * (k - a * x); }, [k, a](double x) { return k - 2 * a * x; },
                     [a](double) { return -2 * a; }};
    fill_common(s, p);
    s.scale = k / a;
    s.kind = ModelKind::logistic;
    return s;
}

ProblemSpec robust_spec(const ProblemSpec& spec) {
    ProblemSpec r = spec;
    ScalarField kap = spec.profit.kappa;
    r.profit.pi = [kap](double x, double) { return kap(x); };
    r.profit.pi_x = [kap](double x, double) { return kap.d(x); };
    r.profit.pi_xtheta = [](double, double) { return 0.0; };
    r.robust = true;
    return r;
}

double eval_ell(const ProblemSpec& s, double x, double theta) {
    double c = s.c(x), sg = s.sigma(x);
    return -s.b(x) * c + s.pi(x, theta) - 0.5 * sg * sg * (s.epsilon * c * c + s.cost.c.d(x));
}

double eval_ell_x(const ProblemSpec& s, double x, double theta) {
    const auto& b = s.diffusion.b;
    const auto& sg = s.diffusion.sigma;
    const auto& c = s.cost.c;
    double cv = c(x), cx = c.d(x), sv = sg(x);
    double pix = s.profit.pi_x ? s.profit.pi_x(x, theta)
                               : central_difference([&](double t) { return s.pi(t, theta); }, x);
    return -b.d(x) * cv - b(x) * cx + pix - sv * sg.d(x) * (s.epsilon * cv * cv + cx) -
           0.5 * sv * sv * (2 * s.epsilon * cv * cx + c.dd(x));
}

double eval_ell_robust(const ProblemSpec& s, double x) {
    double c = s.c(x), sg = s.sigma(x);
    return -s.b(x) * c + s.profit.kappa(x) - 0.5 * sg * sg * (s.epsilon * c * c + s.cost.c.d(x));
}

EllLandmarks find_landmarks(const ProblemSpec& s, double theta) {
    const double x_max = 100.0 * s.scale;
    const double x_floor = 1e-10 * s.scale;
    auto lx = [&](double x) { return eval_ell_x(s, x, theta); };

    auto scan = geometric_nodes(x_floor, x_max, 800);
    std::size_t hit = scan.size();
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
        if (lx(scan[i]) > 0 && lx(scan[i + 1]) <= 0) {
            hit = i;
            break;
        }
    }
    if (hit == scan.size()) {
        std::ostringstream os;
        os << "ell_x has no +/- sign change on [" << x_floor << ", " << x_max << "] at theta=" << theta;
        throw NoSignChange(os.str());
    }
    EllLandmarks L;
    L.xhat = bisect_root(lx, scan[hit], scan[hit + 1], s.tol_root);
    L.x_min = s.x_min_rel * L.xhat;

    // limit at 0: halve until two successive evaluations agree
    double x0 = L.x_min;
    double prev = eval_ell(s, x0, theta);
    bool settled = false;
    for (int k = 0; k < 80; ++k) {
        double next = eval_ell(s, 0.5 * x0, theta);
        x0 *= 0.5;
        if (std::abs(next - prev) <= 1e-8) {
            prev = next;
            settled = true;
            break;
        }
        prev = next;
    }
    if (!settled || !std::isfinite(prev)) throw UnboundedSearch("ell(0+) does not settle");
    L.ell_at_zero = prev;

    auto g = [&](double x) { return eval_ell(s, x, theta) - L.ell_at_zero; };
    double lo = L.xhat, hi = L.xhat;
    double step = 0.1 * std::max(L.xhat, s.scale);
    while (g(hi) >= 0) {
        lo = hi;
        hi += step;
        step *= 1.5;
        if (hi > x_max) throw UnboundedSearch("ell never returns to ell(0) below x_max_search");
    }
    L.xhat_lower = bisect_root(g, lo, hi, s.tol_root);
    return L;
}

EllLandmarks find_robust_landmarks(const ProblemSpec& spec) {
    return find_landmarks(robust_spec(spec), 1.0);
}

namespace {

double drift_ratio(const ProblemSpec& s, double y) {
    double sg = s.sigma(y);
    return 2.0 * s.b(y) / (sg * sg);
}

}  // namespace

double scale_density(const ProblemSpec& s, double x, double x0) {
    double e = integrate_log_split([&](double y) { return drift_ratio(s, y); }, x0, x, 1e-12);
    return std::exp(-e);
}

double speed_measure(const ProblemSpec& s, double a, double b, double x0) {
    if (!(a < b)) return 0.0;
    auto ratio = [&](double y) { return drift_ratio(s, y); };
    // pieces from the top down so the running total sets the absolute floor
    double total = 0.0;
    double hi = b;
    double acc = integrate_log_split(ratio, x0, b, 1e-12);  // int_{x0}^{hi} 2b/sigma^2
    while (hi > a) {
        double lo = std::max(a, 0.5 * hi);
        if (lo - a < 1e-12 * a) lo = a;
        auto integrand = [&](double y) {
            double sg = s.sigma(y);
            double e = acc - integrate_gk(ratio, y, hi, 1e-12);
            return 2.0 / (sg * sg) * std::exp(e);
        };
        total += integrate_gk(integrand, lo, hi, 1e-10, nullptr, 1e-14 * total);
        acc -= integrate_gk(ratio, lo, hi, 1e-12);
        hi = lo;
    }
    return total;
}

std::vector<double> default_theta_grid() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }

std::vector<double> default_x_grid(const ProblemSpec& spec) {
    return geometric_nodes(1e-3 * spec.scale, 10.0 * spec.scale, 60);
}

ValidationReport validate_assumptions(const ProblemSpec& s, const std::vector<double>& th,
                                      const std::vector<double>& xs) {
    ValidationReport rep;
    auto add = [&](std::string name, bool ok, std::string detail) {
        rep.entries.push_back({std::move(name), ok, std::move(detail)});
    };
    auto deriv_ok = [&](const ScalarField& fld) {
        if (!fld.analytic()) return true;
        for (double x : xs) {
            double a = fld.d(x), n = central_difference(fld.value, x);
            if (std::abs(a - n) > 1e-6 * (1 + std::abs(a))) return false;
        }
        return true;
    };

    {
        bool pos = true;
        double C = 0.0;
        for (double x : xs) {
            if (!(s.sigma(x) > 0)) pos = false;
            C = std::max(C, (std::abs(s.b(x)) + std::abs(s.sigma(x))) / (1 + std::pow(x, s.diffusion.growth_exponent)));
        }
        bool der = deriv_ok(s.diffusion.b) && deriv_ok(s.diffusion.sigma);
        std::ostringstream os;
        os << "sigma>0: " << (pos ? "yes" : "no") << "; derivative handles consistent: " << (der ? "yes" : "no")
           << "; growth constant " << C;
        add("diffusion_coefficients", pos && der && std::isfinite(C), os.str());
    }

    {
        double ref = s.scale;
        bool ok = true;
        std::ostringstream os;
        try {
            double m2 = speed_measure(s, 1e-2 * ref, ref, ref);
            double m4 = speed_measure(s, 1e-4 * ref, ref, ref);
            double m6 = speed_measure(s, 1e-6 * ref, ref, ref);
            ok = std::isfinite(m6) && std::abs(m6 - m4) <= 1e-6 * (1 + std::abs(m6));
            os.precision(12);
            os << "m((x0,ref)) for x0/ref = 1e-2,1e-4,1e-6: " << m2 << ", " << m4 << ", " << m6;
        } catch (const std::exception& e) {
            ok = false;
            os << "quadrature failed: " << e.what();
        }
        add("finite_speed_measure_near_0", ok, os.str());
    }

    {
        bool mono = true, conc = true, cross = true;
        for (double t : th) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                double x = xs[i];
                if (s.profit.pi_x(x, t) < 0) mono = false;
                if (!(s.profit.pi_xtheta(x, t) < 0)) cross = false;
                if (i > 0 && i + 1 < xs.size()) {
                    double sl = (s.pi(xs[i], t) - s.pi(xs[i - 1], t)) / (xs[i] - xs[i - 1]);
                    double sr = (s.pi(xs[i + 1], t) - s.pi(xs[i], t)) / (xs[i + 1] - xs[i]);
                    if (sr - sl > 1e-10) conc = false;
                }
            }
        }
        add("profit_nondecreasing_concave", mono && conc,
            std::string("pi_x>=0: ") + (mono ? "yes" : "no") + "; concave: " + (conc ? "yes" : "no"));
        add("profit_cross_derivative_negative", cross, cross ? "strict on grid" : "violated on grid");
    }

    {
        bool bounds = true, mono = true;
        double prev = std::numeric_limits<double>::infinity();
        for (double x : xs) {
            double c = s.c(x);
            if (c < s.cost.c_lo - 1e-12 || c > s.cost.c_hi + 1e-12) bounds = false;
            if (c > prev + 1e-12) mono = false;
            prev = c;
        }
        add("cost_bounded_nonincreasing", bounds && mono && s.cost.c_lo > 0,
            std::string("bounds: ") + (bounds ? "ok" : "violated") + "; nonincreasing: " + (mono ? "yes" : "no"));
    }

    {
        bool inc = true;
        double Cf = 0.0, CF = 0.0;
        const double dl = s.interaction.delta;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double x = xs[i];
            if (i > 0) {
                if (!(s.interaction.f(x) > s.interaction.f(xs[i - 1]))) inc = false;
                if (!(s.interaction.F(x) > s.interaction.F(xs[i - 1]))) inc = false;
            }
            Cf = std::max(Cf, std::abs(s.interaction.f(x)) / (1 + std::pow(x, dl)));
            CF = std::max(CF, std::abs(s.interaction.F(x)) / (1 + std::pow(x, 1.0 / dl)));
        }
        std::ostringstream os;
        os << "strictly increasing: " << (inc ? "yes" : "no") << "; growth constants " << Cf << ", " << CF;
        add("interaction_functions", inc && std::isfinite(Cf) && std::isfinite(CF), os.str());
    }

    {
        bool ok = true;
        std::ostringstream os;
        for (double t : th) {
            try {
                auto L = find_landmarks(s, t);
                for (double x : xs) {
                    if (x <= L.x_min || x > L.xhat_lower) continue;
                    double v = eval_ell_x(s, x, t);
                    if (x < L.xhat && !(v > 0)) ok = false;
                    if (x > L.xhat && !(v < 0)) ok = false;
                }
            } catch (const std::exception& e) {
                ok = false;
                os << "theta=" << t << ": " << e.what() << "; ";
            }
        }
        if (s.kind == ModelKind::logistic && s.params) {
            const auto& p = *s.params;
            double cond = 2 * p.alpha - p.epsilon * p.sigma * p.sigma * p.cost;
            if (!(cond < 0)) {
                ok = false;
                os << "logistic condition 2*alpha - eps*sigma^2*c = " << cond << " is not < 0; ";
            }
        }
        if (ok) os << "landmarks found on theta grid";
        add("landmarks_of_ell", ok, os.str());
    }

    {
        bool below = true, monotone = true, lip = true;
        double needed = 0.0;
        std::vector<double> ts = th;
        std::sort(ts.begin(), ts.end());
        for (double x : xs) {
            double k = s.profit.kappa(x);
            for (std::size_t j = 0; j < ts.size(); ++j) {
                double p = s.pi(x, ts[j]);
                if (p < k - 1e-12) below = false;
                if (j > 0) {
                    double q = s.pi(x, ts[j - 1]);
                    if (p > q + 1e-12) monotone = false;
                    double r = std::abs(p - q) / ((1 + std::pow(x, s.profit.lipschitz_delta)) * (ts[j] - ts[j - 1]));
                    needed = std::max(needed, r);
                }
            }
        }
        lip = needed <= s.profit.lipschitz_C;
        bool robust = true;
        std::string why;
        try {
            find_robust_landmarks(s);
        } catch (const std::exception& e) {
            robust = false;
            why = e.what();
        }
        std::ostringstream os;
        os << "kappa<=pi: " << (below ? "yes" : "no") << "; monotone in theta: " << (monotone ? "yes" : "no")
           << "; Lipschitz ratio " << needed << " vs C=" << s.profit.lipschitz_C
           << "; robust landmarks: " << (robust ? "found" : why);
        add("robust_limit", below && monotone && lip && robust, os.str());
    }
    return rep;
}

}  // namespace rmfg
