#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmfg/numerics.hpp"

using namespace rmfg;

TEST_CASE("dormand-prince exponential growth lands on stops") {
    StepControl c;
    c.rtol = c.atol = 1e-12;
    DormandPrince<1> dp(c);
    std::vector<double> seen;
    double y_end = 0.0;
    dp.integrate([](double, const std::array<double, 1>& y) { return y; }, 0.0, {1.0}, 1.0, {0.25, 0.5},
                 [&](double x, const std::array<double, 1>& y, const std::array<double, 1>&) {
                     if (x == 0.25 || x == 0.5) seen.push_back(y[0]);
                     y_end = y[0];
                     return true;
                 });
    REQUIRE(seen.size() == 2);
    CHECK(seen[0] == doctest::Approx(std::exp(0.25)).epsilon(1e-11));
    CHECK(seen[1] == doctest::Approx(std::exp(0.5)).epsilon(1e-11));
    CHECK(y_end == doctest::Approx(std::exp(1.0)).epsilon(1e-11));
}

TEST_CASE("dormand-prince backward harmonic oscillator") {
    StepControl c;
    c.rtol = c.atol = 1e-12;
    DormandPrince<2> dp(c);
    std::array<double, 2> last{};
    double xe = dp.integrate([](double, const std::array<double, 2>& y) { return std::array<double, 2>{y[1], -y[0]}; },
                             M_PI, {0.0, -1.0}, 0.0, {},
                             [&](double, const std::array<double, 2>& y, const std::array<double, 2>&) {
                                 last = y;
                                 return true;
                             });
    CHECK(xe == 0.0);
    CHECK(last[0] == doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
    CHECK(last[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("observer can stop dormand-prince early") {
    DormandPrince<1> dp(StepControl{});
    double xe = dp.integrate([](double, const std::array<double, 1>&) { return std::array<double, 1>{1.0}; }, 0.0,
                             {0.0}, 10.0, {},
                             [](double, const std::array<double, 1>& y, const std::array<double, 1>&) {
                                 return y[0] < 2.0;
                             });
    CHECK(xe < 10.0);
    CHECK(xe >= 2.0);
}

TEST_CASE("radau handles a stiff relaxation") {
    const double k = 1e4;
    StepControl c;
    c.rtol = c.atol = 1e-10;
    RadauScalar rs(c);
    double y_end = 0.0;
    rs.integrate([k](double x, double y) { return -k * (y - std::cos(x)); }, [k](double, double) { return -k; }, 0.0,
                 1.0, 1.0, {}, [&](double, double y) {
                     y_end = y;
                     return true;
                 });
    double exact = (k * k * std::cos(1.0) + k * std::sin(1.0)) / (k * k + 1.0);
    CHECK(y_end == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("hermite curve reproduces a cubic") {
    auto f = [](double x) { return 2 * x * x * x - x * x + 3 * x - 1; };
    auto df = [](double x) { return 6 * x * x - 2 * x + 3; };
    std::vector<double> x{0.0, 0.3, 1.1, 2.0}, y, dy;
    for (double t : x) {
        y.push_back(f(t));
        dy.push_back(df(t));
    }
    HermiteCurve h(x, y, dy);
    for (double t : {0.1, 0.7, 1.5, 1.99}) {
        CHECK(h(t) == doctest::Approx(f(t)).epsilon(1e-13));
        CHECK(h.derivative(t) == doctest::Approx(df(t)).epsilon(1e-12));
    }
}

TEST_CASE("monotone cubic keeps step data monotone and clamps") {
    MonotoneCubic m({0, 1, 2, 3, 4}, {0, 0, 1, 1, 1});
    double prev = -1.0;
    for (double t = 0.0; t <= 4.0; t += 0.01) {
        double v = m(t);
        CHECK(v >= prev - 1e-15);
        CHECK(v >= -1e-15);
        CHECK(v <= 1.0 + 1e-15);
        prev = v;
    }
    CHECK(m(-5.0) == 0.0);
    CHECK(m(9.0) == 1.0);
}

TEST_CASE("adaptive quadrature") {
    CHECK(integrate_gk([](double x) { return x * x; }, 0.0, 1.0, 1e-12) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(integrate_gk([](double x) { return std::exp(-1.0 / x); }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(0.148495506775922).epsilon(1e-12));
    CHECK(integrate_gk([](double x) { return 1.0 / x; }, 1.0, 0.5, 1e-12) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("log-split quadrature over many decades") {
    double v = integrate_log_split([](double x) { return 1.0 / x; }, 1e-8, 1.0, 1e-12);
    CHECK(v == doctest::Approx(8 * std::log(10.0)).epsilon(1e-10));
}

TEST_CASE("bisection root") {
    double r = bisect_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0, 1e-14);
    CHECK(r == doctest::Approx(0.739085133215161).epsilon(1e-13));
    CHECK_THROWS(bisect_root([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-10));
}

TEST_CASE("node layouts") {
    auto g = geometric_nodes(1e-3, 1.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == 1e-3);
    CHECK(g.back() == 1.0);
    CHECK(g[1] == doctest::Approx(1e-2));
    auto u = uniform_nodes(0.0, 1.0, 5);
    CHECK(u[2] == doctest::Approx(0.5));
    CHECK(u.back() == 1.0);
}

TEST_CASE("central difference") {
    CHECK(central_difference([](double x) { return std::sin(x); }, 0.4) == doctest::Approx(std::cos(0.4)).epsilon(1e-9));
}
