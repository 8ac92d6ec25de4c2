#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmfg/equilibrium.hpp"
#include "rmfg/errors.hpp"
#include "rmfg/model.hpp"

using namespace rmfg;

namespace {
const ProblemSpec kCase = build_extraction_model(CaseStudyParams{});
const double kThetaStar = 0.517190657;
const double kBetaStar = 4.50616435;

const EquilibriumResult& bisection() {
    static const EquilibriumResult r = find_equilibrium_bisection(kCase);
    return r;
}
}  // namespace

TEST_CASE("robust bracket is ordered") {
    auto br = theta_bracket(kCase);
    CHECK(br.robust_lo > 0.0);
    CHECK(br.robust_lo < br.robust_hi);
    CHECK(br.robust_lo == doctest::Approx(1.0824216).epsilon(1e-6));
    CHECK(br.robust_hi == doctest::Approx(2.8221544).epsilon(1e-6));
    CHECK_FALSE(br.repaired);
}

TEST_CASE("robust bracket maps into itself" * doctest::should_fail()) {
    // T sits below theta at both robust ends for the case study
    ConsistencyEvaluator T(kCase, {});
    auto br = theta_bracket(kCase);
    CHECK(T(br.lo).T >= br.lo);
    CHECK(T(br.hi).T <= br.hi);
}

TEST_CASE("secured bracket carries a sign change") {
    ConsistencyEvaluator T(kCase, {});
    auto br = secure_bracket(T, theta_bracket(kCase));
    CHECK(br.repaired);
    CHECK_FALSE(br.note.empty());
    CHECK(T(br.lo).T - br.lo >= -1e-7);
    CHECK(T(br.hi).T - br.hi <= 1e-7);
    CHECK(br.lo < kThetaStar);
    CHECK(kThetaStar < br.hi);
}

TEST_CASE("bisection on the consistency gap") {
    const auto& r = bisection();
    CHECK(r.theta_star == doctest::Approx(kThetaStar).epsilon(1e-6));
    CHECK(r.beta_star == doctest::Approx(kBetaStar).epsilon(1e-5));
    CHECK(std::abs(r.residual) <= 1e-7);
    CHECK(r.lambda_star == doctest::Approx(eval_ell(kCase, r.beta_star, r.theta_star)).epsilon(1e-10));
    CHECK(r.trace.size() == r.iterations + 2);  // bracket ends come first
    CHECK(r.trace[0].note == "lo");
}

TEST_CASE("gap changes sign across the equilibrium") {
    ConsistencyEvaluator T(kCase, {});
    double th = bisection().theta_star;
    double d = 1e-6;
    CHECK(T(th - d).T - (th - d) > 0.0);
    CHECK(T(th + d).T - (th + d) < 0.0);
}

TEST_CASE("damped iteration from a nearby start") {
    EquilibriumOptions opt;
    auto r = find_equilibrium_damped(kCase, opt, bisection().theta_star * 1.02);
    CHECK(r.theta_star == doctest::Approx(bisection().theta_star).epsilon(1e-5));
    CHECK(r.method == EquilibriumMethod::damped_fixed_point);
}

TEST_CASE("policy iteration agrees with bisection") {
    auto r = policy_iteration(kCase);
    CHECK(r.theta_star == doctest::Approx(bisection().theta_star).epsilon(1e-5));
    CHECK(r.beta_star == doctest::Approx(bisection().beta_star).epsilon(1e-5));
}

TEST_CASE("inner policy update reaches the free boundary") {
    EquilibriumOptions opt;
    auto L = find_landmarks(kCase, 1.0);
    auto in = pia_inner(kCase, 1.0, L.xhat_lower, opt);
    CHECK(in.beta == doctest::Approx(2.9195974036).epsilon(1e-8));
    CHECK(in.accepted > 0);
    for (std::size_t i = 1; i < in.betas.size(); ++i) CHECK(in.betas[i] <= in.betas[i - 1]);
}

TEST_CASE("user bracket without a sign change") {
    EquilibriumOptions opt;
    ThetaBracket br;
    br.lo = 1.0;
    br.hi = 2.0;
    opt.bracket = br;
    CHECK_THROWS_AS(find_equilibrium_bisection(kCase, opt), NoSignChange);
    br.lo = 0.4;
    opt.bracket = br;
    auto r = find_equilibrium_bisection(kCase, opt);
    CHECK(r.theta_star == doctest::Approx(kThetaStar).epsilon(1e-6));
    CHECK(r.bracket.lo == 0.4);
}

TEST_CASE("damped iteration respects the iteration cap") {
    EquilibriumOptions opt;
    opt.max_iter = 2;
    opt.rho = 0.05;
    CHECK_THROWS_AS(find_equilibrium_damped(kCase, opt, 2.0), MaxIterExceeded);
}

TEST_CASE("coarse scan sees one crossing") {
    ConsistencyEvaluator T(kCase, {});
    auto rows = scan_consistency(T, 0.3, 3.0, 8);
    REQUIRE(rows.size() == 8);
    CHECK(sign_changes(rows) == 1);
    CHECK(rows.front().theta == 0.3);
    CHECK(rows.back().theta == doctest::Approx(3.0));
}
