#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmfg/ergodic.hpp"
#include "rmfg/model.hpp"
#include "rmfg/montecarlo.hpp"
#include "rmfg/shooting.hpp"

using namespace rmfg;

namespace {
const ProblemSpec kCase = build_extraction_model(CaseStudyParams{});

const FreeBoundarySolution& fbs() {
    static const FreeBoundarySolution f = compute_beta(kCase, 1.0);
    return f;
}

McConfig short_run() {
    McConfig c;
    c.horizon = 20.0;
    c.burn_in = 1.0;
    c.n_paths = 3;
    return c;
}
}  // namespace

TEST_CASE("config validation") {
    McConfig c = short_run();
    c.dt = 0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = short_run();
    c.burn_in = 30.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = short_run();
    c.n_paths = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_NOTHROW(short_run().validate());
}

TEST_CASE("fixed seed reproduces the estimate") {
    auto a = simulate_reflected(kCase, fbs(), short_run());
    auto b = simulate_reflected(kCase, fbs(), short_run());
    CHECK(a.ergodic_payoff == b.ergodic_payoff);
    CHECK(a.moment_f == b.moment_f);
    CHECK(a.cdf == b.cdf);
    McConfig c = short_run();
    c.seed += 1;
    CHECK(simulate_reflected(kCase, fbs(), c).ergodic_payoff != a.ergodic_payoff);
}

TEST_CASE("reflected state stays in the domain") {
    auto e = simulate_reflected(kCase, fbs(), short_run());
    CHECK(e.max_state <= fbs().beta);
    CHECK(e.min_state > 0.0);
    CHECK(e.control_rate > 0.0);
    CHECK(e.cdf.back() == 1.0);
    CHECK(e.path_payoffs.size() == 3);
    CHECK(e.steps == 3 * 20000);
}

TEST_CASE("start above the boundary jumps") {
    McConfig c = short_run();
    c.x0 = fbs().beta + 0.5;
    c.record_path = true;
    c.record_stride = 100;
    auto e = simulate_reflected(kCase, fbs(), c);
    CHECK(e.initial_jump == doctest::Approx(0.5));
    REQUIRE_FALSE(e.path.empty());
    CHECK(e.path.front().x == fbs().beta);
    CHECK(e.path.front().xi_cum == doctest::Approx(0.5));
    for (std::size_t i = 1; i < e.path.size(); ++i) CHECK(e.path[i].xi_cum >= e.path[i - 1].xi_cum);
}

TEST_CASE("single step projection") {
    Kernel zero = [](double) { return 0.0; };
    double dxi = 0.0;
    // b(1) = 0, sigma(1) = 1: one step of 0.5 * sqrt(0.04) lands at 1.1
    double y = reflected_step(kCase, zero, 2.0, 1.0, 0.04, 0.5, &dxi);
    CHECK(y == doctest::Approx(1.1));
    CHECK(dxi == 0.0);
    y = reflected_step(kCase, zero, 1.05, 1.0, 0.04, 0.5, &dxi);
    CHECK(y == 1.05);
    CHECK(dxi == doctest::Approx(0.05));
}

TEST_CASE("larger kernel dominates pathwise") {
    Kernel psi = worst_case_kernel(kCase, fbs());
    Kernel up = [psi](double x) { return psi(x) + 0.1; };
    double gap = comparison_gap(kCase, fbs().beta, psi, up, 1.0, 1e-3, 20000, 7);
    CHECK(gap <= 0.0);
}

TEST_CASE("empirical law against itself and against the analytic law") {
    auto e = simulate_reflected(kCase, fbs(), short_run());
    auto dist = stationary_density(kCase, fbs());
    double ks = compare_distribution(e, dist);
    CHECK(ks >= 0.0);
    CHECK(ks < 1.0);
    StationaryDistribution self = dist;
    self.grid = e.cdf_grid;
    self.cdf = e.cdf;
    CHECK(compare_distribution(e, self) == 0.0);
}
