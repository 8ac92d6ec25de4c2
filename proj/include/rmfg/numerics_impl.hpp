#pragma once

#include <algorithm>
#include <limits>

namespace rmfg {

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp5

template <std::size_t N>
double DormandPrince<N>::integrate(const Rhs& f, double x0, State y, double x1,
                                   const std::vector<double>& stops, const Observer& obs) const {
    using namespace dp5;
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
    State k1 = f(x, y);
    double h = ctl_.h_init > 0 ? ctl_.h_init : span * 1e-3;
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

        State tmp, k2, k3, k4, k5, k6, k7, yn;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hd * a21 * k1[i];
        k2 = f(x + c2 * hd, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hd * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(x + c3 * hd, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hd * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(x + c4 * hd, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hd * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(x + c5 * hd, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hd * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = f(x + hd, tmp);
        for (std::size_t i = 0; i < N; ++i)
            yn[i] = y[i] + hd * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        double xn = landing ? target : x + hd;
        k7 = f(xn, yn);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            double ei = hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sc = ctl_.atol + ctl_.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
            if (!std::isfinite(yn[i]) || !std::isfinite(ei)) finite = false;
            err = std::max(err, std::abs(ei) / sc);
        }

        if (finite && err <= 1.0) {
            x = xn;
            y = yn;
            k1 = k7;
            if (!obs(x, y, k1)) return x;
            if (landing) {
                ++next;
                if (next == targets.size()) return x;
            }
            double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            if (!landing) h = hs * fac;
            else h = std::max(h, hs * fac);
        } else {
            double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
            h = hs * fac;
            if (h < h_floor)
                throw StepUnderflow("step size underflow at x=" + std::to_string(x), x);
        }
    }
    throw StepUnderflow("step budget exhausted at x=" + std::to_string(x), x);
}

}  // namespace rmfg
