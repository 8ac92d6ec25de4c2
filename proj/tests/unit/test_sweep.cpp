#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rmfg/sweep.hpp"

using namespace rmfg;

namespace {

SweepConfig eps_config() {
    SweepConfig c;
    c.parameter = SweepParameter::epsilon;
    c.values = {0.5, 1.0, 2.0};
    return c;
}

const SweepResult& eps_sweep() {
    static const SweepResult r = run_sweep(eps_config());
    return r;
}

}  // namespace

TEST_CASE("sweep config validation") {
    SweepConfig c = eps_config();
    c.values = {1.0, 0.5};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.values = {};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_sweep_parameter("sigma") == SweepParameter::sigma);
    CHECK_THROWS(parse_sweep_parameter("kappa"));
    CHECK(build_sweep_spec(eps_config(), 2.0).epsilon == 2.0);
}

TEST_CASE("epsilon sweep solves every row") {
    const auto& r = eps_sweep();
    REQUIRE(r.rows.size() == 3);
    for (auto& row : r.rows) CHECK(row.ok);
    CHECK(r.rows[1].theta == doctest::Approx(0.517190657).epsilon(1e-5));
    CHECK(r.beta_nonincreasing);
    std::ostringstream csv;
    write_sweep_csv(csv, r);
    CHECK(csv.str().rfind("epsilon,theta_star,beta_star,lambda_star,iterations,status\n", 0) == 0);
}

TEST_CASE("equilibrium theta is nonincreasing in epsilon" * doctest::should_fail()) {
    // theta* is 0.636, 0.517, 0.964 on this grid
    CHECK(eps_sweep().theta_nonincreasing);
}

TEST_CASE("density mode is nonincreasing in epsilon" * doctest::should_fail()) {
    auto d = emit_density_profiles(eps_config());
    CHECK(d.compared);
    CHECK(d.mode_nonincreasing);
}
