#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rmfg/errors.hpp"
#include "rmfg/model.hpp"
#include "rmfg/numerics.hpp"
#include "rmfg/shooting.hpp"

using namespace rmfg;

namespace {
const ProblemSpec kCase = build_extraction_model(CaseStudyParams{});
}

TEST_CASE("free boundary against independent shooting") {
    // LSODA bisection on the Riccati equation (tests/oracles/case_study_oracle.py)
    struct Row {
        double theta, beta, lambda;
    } rows[] = {{0.5, 4.6335145778, 3.0147151048}, {1.0, 2.9195974036, 1.4614263565}, {2.0, 2.3908196808, 0.7763799817}};
    for (auto r : rows) {
        auto fbs = compute_beta(kCase, r.theta);
        CHECK(fbs.beta == doctest::Approx(r.beta).epsilon(1e-9));
        CHECK(fbs.lambda == doctest::Approx(r.lambda).epsilon(1e-9));
        CHECK(fbs.lambda == doctest::Approx(eval_ell(kCase, fbs.beta, r.theta)).epsilon(1e-12));
        auto L = fbs.landmarks;
        CHECK(fbs.beta > L.xhat);
        CHECK(fbs.beta < L.xhat_lower);
    }
}

TEST_CASE("membership at the landmarks") {
    for (double th : {0.5, 1.0, 2.0}) {
        auto L = find_landmarks(kCase, th);
        CHECK_FALSE(in_B(kCase, L.xhat, th).member);
        CHECK(in_B(kCase, L.xhat_lower, th).member);
    }
}

TEST_CASE("membership is an up-set") {
    const double th = 1.0;
    auto L = find_landmarks(kCase, th);
    auto grid = uniform_nodes(L.xhat, L.xhat_lower, 20);
    bool seen = false;
    for (double b : grid) {
        bool m = in_B(kCase, b, th).member;
        if (seen) CHECK(m);
        seen = seen || m;
    }
    CHECK(seen);
}

TEST_CASE("boundary condition and smooth fit") {
    auto fbs = compute_beta(kCase, 1.0);
    CHECK(fbs.bvp.phi.back() == doctest::Approx(-kCase.c(fbs.beta)).epsilon(1e-12));
    auto vi = check_variational_inequality(kCase, fbs);
    CHECK(std::abs(vi.smooth_fit_residual) < 1e-6);
    CHECK(std::abs(vi.smooth_fit_residual_fd) < 1e-4);
    CHECK(vi.max_violation < 1e-6);
}

TEST_CASE("value gradient stays above minus the cost") {
    auto fbs = compute_beta(kCase, 0.7);
    double worst = INFINITY;
    for (std::size_t i = 0; i < fbs.bvp.x.size(); ++i) worst = std::min(worst, fbs.bvp.phi[i] + kCase.c(fbs.bvp.x[i]));
    CHECK(worst > -1e-7);
    CHECK(fbs.vx(fbs.beta + 1.0) == doctest::Approx(-1.0));
    CHECK(fbs.potential(fbs.beta) == doctest::Approx(0.0));
    // V decreasing wherever V_x < 0 near the boundary
    CHECK(fbs.potential(fbs.beta - 0.01) > 0.0);
}

TEST_CASE("Riccati and Cole-Hopf forms agree away from zero") {
    for (double th : {0.5, 2.0}) {
        auto fbs = compute_beta(kCase, th);
        GridConfig g;
        g.x_lo = 0.05 * fbs.beta;
        auto a = solve_bvp(kCase, fbs.beta, 0.0, th, g);
        auto b = solve_bvp_cole_hopf(kCase, fbs.beta, 0.0, th, g);
        REQUIRE(a.x.size() == b.x.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < a.x.size(); ++i) worst = std::max(worst, std::abs(a.phi[i] - b.phi[i]));
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("backward profiles are ordered in beta") {
    const double th = 1.0;
    auto L = find_landmarks(kCase, th);
    auto fbs = compute_beta(kCase, th);
    auto nodes = uniform_nodes(0.5, fbs.beta * 0.999, 200);
    auto lo = backward_profile(kCase, fbs.beta, th, nodes);
    auto hi = backward_profile(kCase, 0.5 * (fbs.beta + L.xhat_lower), th, nodes);
    CHECK(hi.outcome != "escape_down");
    std::size_t shared = 0;
    for (std::size_t i = 0; i < lo.x.size(); ++i) {
        auto it = std::find(hi.x.begin(), hi.x.end(), lo.x[i]);
        if (it == hi.x.end()) continue;
        ++shared;
        CHECK(hi.phi[static_cast<std::size_t>(it - hi.x.begin())] >= lo.phi[i] - 1e-8);
    }
    CHECK(shared > 10);
    CHECK_THROWS_AS(backward_profile(kCase, 2.0, th, {}), std::invalid_argument);
}

TEST_CASE("perturbed solutions separate at rate gamma") {
    auto fbs = compute_beta(kCase, 1.0);
    double floor = amplification_floor(kCase, fbs.bvp, 1e2);
    auto rows = perturbation_gap(kCase, fbs.beta, 1.0, {1e-2, 5e-3}, floor);
    REQUIRE(rows.size() == 2);
    for (auto& r : rows) CHECK(r.gap > 0.0);
    CHECK(rows[1].ratio / rows[0].ratio == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("robust boundary is the ambiguity-free limit") {
    auto r = robust_spec(kCase);
    auto fbs = compute_beta(r, 1.0);
    auto fbs2 = compute_beta(r, 3.0);
    CHECK(fbs.beta == doctest::Approx(fbs2.beta).epsilon(1e-10));
}

TEST_CASE("slope stays within the boundedness constant") {
    for (double th : {0.5, 1.0, 2.0}) {
        auto fbs = compute_beta(kCase, th);
        double worst = 0.0;
        for (double p : fbs.bvp.phi) worst = std::max(worst, std::abs(p));
        double M = boundedness_constant(kCase, fbs.beta, th);
        CHECK(std::isfinite(M));
        CHECK(worst <= M + 1e-8);
    }
}
