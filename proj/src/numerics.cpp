#include "rmfg/numerics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <limits>

namespace rmfg {

namespace {

// Radau IIA, s = 2
constexpr double kC1 = 1.0 / 3.0;
constexpr double kA11 = 5.0 / 12, kA12 = -1.0 / 12;
constexpr double kA21 = 3.0 / 4, kA22 = 1.0 / 4;

}  // namespace

bool RadauScalar::step(const Rhs& f, const Rhs& dfdy, double x, double y, double h, double& out) const {
    double x1 = x + kC1 * h, x2 = x + h;
    double f0 = f(x, y);
    double z1 = kC1 * h * f0, z2 = h * f0;
    for (int it = 0; it < 25; ++it) {
        double y1 = y + z1, y2 = y + z2;
        double g1 = f(x1, y1), g2 = f(x2, y2);
        double r1 = z1 - h * (kA11 * g1 + kA12 * g2);
        double r2 = z2 - h * (kA21 * g1 + kA22 * g2);
        double j1 = dfdy(x1, y1), j2 = dfdy(x2, y2);
        double m11 = 1.0 - h * kA11 * j1, m12 = -h * kA12 * j2;
        double m21 = -h * kA21 * j1, m22 = 1.0 - h * kA22 * j2;
        double det = m11 * m22 - m12 * m21;
        if (!std::isfinite(det) || det == 0.0) return false;
        double d1 = (r1 * m22 - r2 * m12) / det;
        double d2 = (m11 * r2 - m21 * r1) / det;
        z1 -= d1;
        z2 -= d2;
        if (!std::isfinite(z2)) return false;
        if (std::abs(d1) + std::abs(d2) <= 1e-15 * (1.0 + std::abs(y + z2))) {
            out = y + z2;
            return true;
        }
    }
    return false;
}

double RadauScalar::integrate(const Rhs& f, const Rhs& dfdy, double x0, double y, double x1,
                              const std::vector<double>& stops, const Observer& obs) const {
    const double dir = x1 >= x0 ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);
    if (span == 0.0) return x0;
    std::vector<double> targets;
    for (double s : stops)
        if ((s - x0) * dir > 0 && (x1 - s) * dir > 0) targets.push_back(s);
    std::sort(targets.begin(), targets.end(), [dir](double a, double b) { return (a - b) * dir < 0; });
    targets.push_back(x1);
    std::size_t next = 0;

    double x = x0;
    double h = ctl_.h_init > 0 ? ctl_.h_init : span * 1e-4;
    const double h_floor = ctl_.h_min * std::max(1.0, std::abs(x0));
    for (std::size_t it = 0; it < ctl_.max_steps; ++it) {
        double target = targets[next];
        bool landing = false;
        double hs = h;
        if (hs >= std::abs(target - x)) {
            hs = std::abs(target - x);
            landing = true;
        }
        double hd = dir * hs;
        double full, half, two;
        bool ok = step(f, dfdy, x, y, hd, full) && step(f, dfdy, x, y, 0.5 * hd, half) &&
                  step(f, dfdy, x + 0.5 * hd, half, 0.5 * hd, two);
        double err = 0.0;
        if (ok) {
            // order 3 -> local error ~ h^4; Richardson factor 1/(2^3 - 1)
            double est = std::abs(two - full) / 7.0;
            err = est / (ctl_.atol + ctl_.rtol * std::max(std::abs(y), std::abs(two)));
        }
        if (ok && err <= 1.0) {
            x = landing ? target : x + hd;
            y = two;
            if (!obs(x, y)) return x;
            if (landing) {
                ++next;
                if (next == targets.size()) return x;
            }
            double fac = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(err, -0.25), 0.2, 4.0);
            h = landing ? std::max(h, hs * fac) : hs * fac;
        } else {
            double fac = ok ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9) : 0.25;
            h = hs * fac;
            if (h < h_floor) throw StepUnderflow("implicit step underflow at x=" + std::to_string(x), x);
        }
    }
    throw StepUnderflow("implicit step budget exhausted", x);
}

HermiteCurve::HermiteCurve(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    if (x_.size() < 2 || y_.size() != x_.size() || dy_.size() != x_.size())
        throw std::invalid_argument("HermiteCurve: inconsistent node arrays");
}

std::size_t HermiteCurve::locate(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double HermiteCurve::operator()(double t) const {
    std::size_t i = locate(t);
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * dy_[i] + h01 * y_[i + 1] + h11 * h * dy_[i + 1];
}

double HermiteCurve::derivative(double t) const {
    std::size_t i = locate(t);
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double s2 = s * s;
    double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1;
    double d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
    return d00 * y_[i] + d10 * dy_[i] + d01 * y_[i + 1] + d11 * dy_[i + 1];
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: need >= 2 nodes");
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0) {
            m_[i] = 0.0;
        } else {
            double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
            m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
}

double MonotoneCubic::operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * m_[i] +
           (-2 * s3 + 3 * s2) * y_[i + 1] + (s3 - s2) * h * m_[i + 1];
}

namespace {

struct GslWorkspace {
    gsl_integration_workspace* w;
    GslWorkspace() : w(gsl_integration_workspace_alloc(2000)) { gsl_set_error_handler_off(); }
    ~GslWorkspace() { gsl_integration_workspace_free(w); }
};

double trampoline(double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); }

}  // namespace

double integrate_gk(const std::function<double(double)>& f, double a, double b, double tol, double* error,
                    double tol_abs) {
    if (a == b) {
        if (error) *error = 0.0;
        return 0.0;
    }
    thread_local GslWorkspace ws;
    gsl_function gf;
    gf.function = &trampoline;
    gf.params = const_cast<void*>(static_cast<const void*>(&f));
    double val = 0.0, err = 0.0;
    double rel = std::max(tol, 1e-13);
    int status = gsl_integration_qag(&gf, a, b, std::max(tol_abs, 1e-300), rel, 2000, GSL_INTEG_GAUSS21, ws.w, &val, &err);
    if (error) *error = err;
    // EROUND: roundoff floor reached, the estimate is as good as it gets
    bool ok = status == GSL_SUCCESS || status == GSL_EROUND || err <= std::max(tol_abs, 1e-9 * std::abs(val)) + 1e-290;
    if (!std::isfinite(val) || !ok)
        throw QuadratureError("quadrature did not converge (status " + std::to_string(status) + ", value " + std::to_string(val) + "): estimate " + std::to_string(err) +
                                  " vs requested " + std::to_string(rel * std::abs(val)),
                              err, rel * std::abs(val));
    return val;
}

double integrate_log_split(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    if (a > b) return -integrate_log_split(f, b, a, tol);
    double total = 0.0;
    double lo = a;
    while (lo < b) {
        double hi = std::min(b, 2.0 * lo);
        if (b - hi < 1e-12 * b) hi = b;
        total += integrate_gk(f, lo, hi, tol);
        lo = hi;
    }
    return total;
}

double bisect_root(const std::function<double(double)>& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw std::domain_error("bisect_root: no sign change");
    while (std::abs(b - a) > tol) {
        double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> geometric_nodes(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    double r = std::log(b / a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = a * std::exp(r * static_cast<double>(i));
    out.front() = a;
    out.back() = b;
    return out;
}

std::vector<double> uniform_nodes(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = b;
    return out;
}

double central_difference(const std::function<double(double)>& f, double x) {
    double h = 1e-5 * (1.0 + std::abs(x));
    if (x - h <= 0.0) h = 0.5 * x;
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace rmfg
