#include "rmfg/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "rmfg/config.hpp"
#include "rmfg/errors.hpp"
#include "rmfg/io.hpp"
#include "rmfg/parallel.hpp"

namespace rmfg {

const char* to_string(SweepParameter p) { return p == SweepParameter::sigma ? "sigma" : "epsilon"; }

SweepParameter parse_sweep_parameter(const std::string& s) {
    if (s == "epsilon" || s == "eps") return SweepParameter::epsilon;
    if (s == "sigma") return SweepParameter::sigma;
    throw std::invalid_argument("sweep parameter must be epsilon or sigma, got '" + s + "'");
}

void SweepConfig::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep values must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0)) throw std::invalid_argument("sweep values must be positive");
        if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("sweep values must be strictly increasing");
    }
}

ProblemSpec build_sweep_spec(const SweepConfig& cfg, double value) {
    ProblemConfig pc;
    pc.model = cfg.model;
    pc.params = cfg.base;
    if (cfg.parameter == SweepParameter::epsilon) pc.params.epsilon = value;
    else pc.params.sigma = value;
    return build_spec(pc);
}

namespace {

bool nonincreasing(const std::vector<SweepRow>& rows, double SweepRow::*field) {
    const SweepRow* prev = nullptr;
    for (const auto& r : rows) {
        if (!r.ok) return false;
        if (prev && r.*field > prev->*field) return false;
        prev = &r;
    }
    return true;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult res;
    res.parameter = cfg.parameter;
    res.rows.resize(cfg.values.size());
    parallel_for(cfg.values.size(), [&](std::size_t i) {
        SweepRow& row = res.rows[i];
        row.value = cfg.values[i];
        auto t0 = std::chrono::steady_clock::now();
        try {
            ProblemSpec spec = build_sweep_spec(cfg, row.value);
            EquilibriumResult r = find_equilibrium_bisection(spec, cfg.equilibrium);
            row.ok = true;
            row.theta = r.theta_star;
            row.beta = r.beta_star;
            row.lambda = r.lambda_star;
            row.iterations = r.iterations;
        } catch (const std::exception& e) {
            row.failure = e.what();
        }
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    res.theta_nonincreasing = nonincreasing(res.rows, &SweepRow::theta);
    res.beta_nonincreasing = nonincreasing(res.rows, &SweepRow::beta);
    return res;
}

void write_sweep_csv(std::ostream& out, const SweepResult& res) {
    out << to_string(res.parameter) << ",theta_star,beta_star,lambda_star,iterations,status\n";
    for (const auto& r : res.rows) {
        out << fmt(r.value) << ',';
        if (r.ok) out << fmt(r.theta) << ',' << fmt(r.beta) << ',' << fmt(r.lambda) << ',' << r.iterations << ",ok\n";
        else out << ",,,," << csv_quote("failed: " + r.failure) << '\n';
    }
}

void write_sweep_summary(std::ostream& out, const SweepResult& res) {
    out << "parameter," << to_string(res.parameter) << '\n';
    out << "theta_nonincreasing," << (res.theta_nonincreasing ? "yes" : "no") << '\n';
    out << "beta_nonincreasing," << (res.beta_nonincreasing ? "yes" : "no") << '\n';
}

DensityProfiles emit_density_profiles(const SweepConfig& cfg) {
    cfg.validate();
    if (cfg.parameter != SweepParameter::epsilon) throw std::invalid_argument("density profiles need an epsilon sweep");
    DensityProfiles out;
    out.profiles.resize(cfg.values.size());
    parallel_for(cfg.values.size(), [&](std::size_t i) {
        DensityProfile& p = out.profiles[i];
        p.value = cfg.values[i];
        try {
            ProblemSpec spec = build_sweep_spec(cfg, p.value);
            EquilibriumResult r = find_equilibrium_bisection(spec, cfg.equilibrium);
            FreeBoundarySolution f = compute_beta(spec, r.theta_star, cfg.equilibrium.solver);
            StationaryDistribution d = stationary_density(spec, f, cfg.equilibrium.solver);
            p.ok = true;
            p.theta = r.theta_star;
            p.beta = f.beta;
            p.mode = d.mode();
            p.x = d.grid;
            p.density = d.density;
            p.cdf = d.cdf;
            for (std::size_t j = 0; j + 1 < p.x.size(); ++j)
                p.trapezoid_mass += 0.5 * (p.density[j] + p.density[j + 1]) * (p.x[j + 1] - p.x[j]);
        } catch (const std::exception& e) {
            p.failure = e.what();
        }
    });
    if (!cfg.outputs.empty()) {
        std::filesystem::create_directories(cfg.outputs);
        for (auto& p : out.profiles) {
            if (!p.ok) continue;
            p.file = (std::filesystem::path(cfg.outputs) / ("density_eps_" + fmt(p.value) + ".csv")).string();
            std::ofstream f(p.file, std::ios::binary);
            f << "x,density,cdf\n";
            for (std::size_t j = 0; j < p.x.size(); ++j)
                f << fmt(p.x[j]) << ',' << fmt(p.density[j]) << ',' << fmt(p.cdf[j]) << '\n';
        }
    }
    out.compared = out.profiles.size() > 1;
    out.mode_nonincreasing = true;
    for (std::size_t i = 0; i < out.profiles.size(); ++i) {
        if (!out.profiles[i].ok) out.mode_nonincreasing = false;
        else if (i > 0 && out.profiles[i - 1].ok && out.profiles[i].mode > out.profiles[i - 1].mode)
            out.mode_nonincreasing = false;
    }
    return out;
}

}  // namespace rmfg
