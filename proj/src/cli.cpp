#include "rmfg/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "rmfg/config.hpp"
#include "rmfg/equilibrium.hpp"
#include "rmfg/errors.hpp"
#include "rmfg/io.hpp"
#include "rmfg/montecarlo.hpp"
#include "rmfg/sweep.hpp"

namespace rmfg {

namespace {

const char* kGrammar =
    "usage: rmfg <subcommand> [--config PATH] [flags]\n"
    "subcommands:\n"
    "  validate\n"
    "  solve        --theta <v> [--gamma <v>] [--beta <v>]\n"
    "  density      --theta <v>\n"
    "  consistency  --theta <v>\n"
    "  equilibrium  [--method bisect|damped|pia] [--rho <v>] [--tol-fp <v>]\n"
    "  simulate     --theta <v> --horizon <v> --dt <v> --paths <n> --seed <n>\n"
    "  sweep        --parameter epsilon|sigma --values v1,v2,... [--outputs DIR] [--densities]\n";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::string output;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "problem configuration file (key = value)");
    sub->add_option("-o,--output", c.output, "write the main output here instead of stdout");
}

ProblemConfig load(const Common& c) { return c.config.empty() ? ProblemConfig{} : load_config(c.config); }

// stdout or the requested file
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw UsageError("cannot open output file '" + path + "'");
            out_ = file_.get();
        }
    }
    std::ostream& operator*() { return *out_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

void write_trace(std::ostream& o, const EquilibriumResult& r) {
    o << "iteration,theta,T_theta,beta,residual,abs_error,note\n";
    for (const auto& t : r.trace)
        o << t.iteration << ',' << fmt(t.theta) << ',' << fmt(t.T) << ',' << fmt(t.beta) << ',' << fmt(t.residual)
          << ',' << fmt(std::abs(t.residual)) << ',' << csv_quote(t.note) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stationary mean-field equilibrium of an ergodic singular-control game under ambiguity", "rmfg"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common c_validate, c_solve, c_density, c_consistency, c_eq, c_sim, c_sweep;

    auto* validate = app.add_subcommand("validate", "check the model assumptions on default grids");
    add_common(validate, c_validate);

    double theta = 0.0, gamma = 0.0;
    std::optional<double> beta_opt;
    auto* solve = app.add_subcommand("solve", "free boundary and value slope at theta");
    add_common(solve, c_solve);
    solve->add_option("--theta", theta)->required()->check(CLI::PositiveNumber);
    solve->add_option("--gamma", gamma);
    solve->add_option("--beta", beta_opt)->check(CLI::PositiveNumber);

    auto* density = app.add_subcommand("density", "stationary density at theta");
    add_common(density, c_density);
    density->add_option("--theta", theta)->required()->check(CLI::PositiveNumber);

    auto* consistency = app.add_subcommand("consistency", "consistency map T(theta)");
    add_common(consistency, c_consistency);
    consistency->add_option("--theta", theta)->required()->check(CLI::PositiveNumber);

    std::string method = "bisect";
    double rho = 0.5;
    std::optional<double> tol_fp, tol_pia, bracket_lo, bracket_hi;
    std::string trace_path;
    auto* eq = app.add_subcommand("equilibrium", "fixed point of the consistency map");
    add_common(eq, c_eq);
    eq->add_option("--method", method)->check(CLI::IsMember({"bisect", "damped", "pia"}));
    eq->add_option("--rho", rho)->check(CLI::Range(0.0, 1.0));
    eq->add_option("--tol-fp", tol_fp)->check(CLI::PositiveNumber);
    eq->add_option("--tol-pia", tol_pia)->check(CLI::PositiveNumber);
    eq->add_option("--bracket-lo", bracket_lo)->check(CLI::PositiveNumber);
    eq->add_option("--bracket-hi", bracket_hi)->check(CLI::PositiveNumber);
    eq->add_option("--trace", trace_path, "write the iteration trace CSV here");

    McConfig mc;
    std::uint64_t seed = mc.seed;
    std::size_t paths = mc.n_paths;
    std::string path_csv;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo check of the reflected worst-case dynamics");
    add_common(sim, c_sim);
    sim->add_option("--theta", theta)->required()->check(CLI::PositiveNumber);
    sim->add_option("--horizon", mc.horizon)->required()->check(CLI::PositiveNumber);
    sim->add_option("--dt", mc.dt)->required()->check(CLI::PositiveNumber);
    sim->add_option("--paths", paths)->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed)->required();
    sim->add_option("--burn-in", mc.burn_in)->check(CLI::NonNegativeNumber);
    sim->add_option("--x0", mc.x0)->check(CLI::NonNegativeNumber);
    sim->add_option("--path-csv", path_csv, "write t, x, xi_cum of the first path here");
    sim->add_option("--record-stride", mc.record_stride)->check(CLI::PositiveNumber);

    std::string parameter;
    std::vector<double> values;
    std::string outputs;
    bool densities = false;
    auto* sweep = app.add_subcommand("sweep", "comparative statics over epsilon or sigma");
    add_common(sweep, c_sweep);
    sweep->add_option("--parameter", parameter)->required()->check(CLI::IsMember({"epsilon", "sigma"}));
    sweep->add_option("--values", values)->required()->delimiter(',');
    sweep->add_option("--outputs", outputs, "directory for CSV files");
    sweep->add_flag("--densities", densities, "also emit equilibrium densities (epsilon sweeps)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << kGrammar;
        return 2;
    }

    try {
        if (validate->parsed()) {
            ProblemSpec spec = build_spec(load(c_validate));
            auto rep = validate_assumptions(spec, default_theta_grid(), default_x_grid(spec));
            Sink s(c_validate.output, out);
            *s << "assumption,passed,detail\n";
            for (const auto& e : rep.entries)
                *s << csv_quote(e.name) << ',' << (e.passed ? "yes" : "no") << ',' << csv_quote(e.detail) << '\n';
            if (!rep.all_passed()) err << "warning: some assumptions failed; solvers may still be run\n";
            return 0;
        }
        if (solve->parsed()) {
            ProblemSpec spec = build_spec(load(c_solve));
            EllLandmarks L = find_landmarks(spec, theta);
            SolverOptions opt;
            BvpSolution bvp;
            double beta = 0.0;
            if (!beta_opt && gamma == 0.0) {
                FreeBoundarySolution f = compute_beta(spec, theta, opt);
                bvp = f.bvp;
                beta = f.beta;
            } else {
                beta = beta_opt ? *beta_opt : compute_beta(spec, theta, opt).beta;
                GridConfig g;
                g.x_lo = default_x_lo(spec, beta, L, opt);
                bvp = solve_separatrix(spec, beta, gamma, theta, g, opt);
            }
            auto V = integrate_potential(bvp);
            auto psi = worst_case_kernel_values(spec, bvp);
            Sink s(c_solve.output, out);
            *s << "beta,lambda,bracket_lo,bracket_hi,method\n"
               << fmt(beta) << ',' << fmt(eval_ell(spec, beta, theta)) << ',' << fmt(L.xhat) << ','
               << fmt(L.xhat_lower) << ',' << to_string(bvp.method) << "\n\n";
            *s << "x,phi,phi_x,V,psi_star\n";
            for (std::size_t i = 0; i < bvp.x.size(); ++i)
                *s << fmt(bvp.x[i]) << ',' << fmt(bvp.phi[i]) << ',' << fmt(bvp.phi_x[i]) << ',' << fmt(V[i]) << ','
                   << fmt(psi[i]) << '\n';
            return 0;
        }
        if (density->parsed()) {
            ProblemSpec spec = build_spec(load(c_density));
            auto f = compute_beta(spec, theta);
            auto d = stationary_density(spec, f);
            Sink s(c_density.output, out);
            *s << "x,density,cdf\n";
            for (std::size_t i = 0; i < d.grid.size(); ++i)
                *s << fmt(d.grid[i]) << ',' << fmt(d.density[i]) << ',' << fmt(d.cdf[i]) << '\n';
            return 0;
        }
        if (consistency->parsed()) {
            ProblemSpec spec = build_spec(load(c_consistency));
            auto e = evaluate_consistency(spec, theta);
            Sink s(c_consistency.output, out);
            *s << "theta,T_theta,beta,lambda,moment_f\n"
               << fmt(e.theta) << ',' << fmt(e.T) << ',' << fmt(e.beta) << ',' << fmt(e.lambda) << ','
               << fmt(e.moment) << '\n';
            return 0;
        }
        if (eq->parsed()) {
            ProblemConfig pc = load(c_eq);
            ProblemSpec spec = build_spec(pc);
            EquilibriumOptions opt;
            opt.rho = rho;
            if (tol_fp) opt.solver.tol_fp = *tol_fp;
            if (tol_pia) opt.tol_pia = *tol_pia;
            opt.pia_inner_stalls = pc.pia_inner;
            opt.pia_outer = pc.pia_outer;
            if (bracket_lo || bracket_hi) {
                if (!(bracket_lo && bracket_hi)) throw UsageError("--bracket-lo and --bracket-hi go together");
                if (!(*bracket_lo < *bracket_hi)) throw UsageError("--bracket-lo must be below --bracket-hi");
                ThetaBracket br;
                br.lo = *bracket_lo;
                br.hi = *bracket_hi;
                br.note = "user supplied";
                opt.bracket = br;
            }
            EquilibriumResult r = method == "damped" ? find_equilibrium_damped(spec, opt)
                                  : method == "pia"  ? policy_iteration(spec, opt)
                                                     : find_equilibrium_bisection(spec, opt);
            Sink s(c_eq.output, out);
            *s << "theta_star,beta_star,lambda_star,iterations,method\n"
               << fmt(r.theta_star) << ',' << fmt(r.beta_star) << ',' << fmt(r.lambda_star) << ',' << r.iterations
               << ',' << to_string(r.method) << "\n\n";
            *s << "bracket_lo,bracket_hi,residual,bracket_note\n"
               << fmt(r.bracket.lo) << ',' << fmt(r.bracket.hi) << ',' << fmt(r.residual) << ','
               << csv_quote(r.bracket.note) << "\n\n";
            if (trace_path.empty()) {
                write_trace(*s, r);
            } else {
                Sink t(trace_path, out);
                write_trace(*t, r);
            }
            return 0;
        }
        if (sim->parsed()) {
            ProblemSpec spec = build_spec(load(c_sim));
            mc.seed = seed;
            mc.n_paths = paths;
            mc.record_path = !path_csv.empty();
            try {
                mc.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            auto f = compute_beta(spec, theta);
            auto d = stationary_density(spec, f);
            McEstimate est = simulate_reflected(spec, f, mc);
            est.ks_distance_vs_analytic = compare_distribution(est, d);
            Sink s(c_sim.output, out);
            *s << "quantity,estimate,std_error,reference\n";
            *s << "payoff," << fmt(est.ergodic_payoff) << ',' << fmt(est.payoff_se) << ',' << fmt(f.lambda) << '\n';
            *s << "moment_f," << fmt(est.moment_f) << ',' << fmt(est.moment_se) << ','
               << fmt(d.moment(spec.interaction.f, "f")) << '\n';
            *s << "ks_distance," << fmt(est.ks_distance_vs_analytic) << ",,\n";
            *s << "control_rate," << fmt(est.control_rate) << ",,\n";
            *s << "resamples," << est.resamples << ",," << (est.resample_flag ? "flagged" : "") << '\n';
            if (!path_csv.empty()) {
                Sink p(path_csv, out);
                *p << "t,x,xi_cum\n";
                for (const auto& pt : est.path) *p << fmt(pt.t) << ',' << fmt(pt.x) << ',' << fmt(pt.xi_cum) << '\n';
            }
            return 0;
        }
        if (sweep->parsed()) {
            ProblemConfig pc = load(c_sweep);
            SweepConfig sc;
            sc.parameter = parse_sweep_parameter(parameter);
            sc.values = values;
            sc.base = pc.params;
            sc.model = pc.model;
            sc.outputs = outputs;
            try {
                sc.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (densities && sc.parameter != SweepParameter::epsilon)
                throw UsageError("--densities needs --parameter epsilon");
            SweepResult res = run_sweep(sc);
            if (!outputs.empty()) {
                std::filesystem::create_directories(outputs);
                auto base = std::filesystem::path(outputs);
                std::string name = std::string("sweep_") + to_string(sc.parameter);
                Sink f((base / (name + ".csv")).string(), out);
                write_sweep_csv(*f, res);
                Sink g((base / (name + "_summary.csv")).string(), out);
                write_sweep_summary(*g, res);
            }
            Sink s(c_sweep.output, out);
            write_sweep_csv(*s, res);
            *s << '\n';
            write_sweep_summary(*s, res);
            if (densities) {
                DensityProfiles dp = emit_density_profiles(sc);
                *s << "\nepsilon,mode,trapezoid_mass,file\n";
                for (const auto& p : dp.profiles)
                    *s << fmt(p.value) << ',' << (p.ok ? fmt(p.mode) : "") << ','
                       << (p.ok ? fmt(p.trapezoid_mass) : "") << ',' << csv_quote(p.ok ? p.file : p.failure) << '\n';
                if (dp.compared) *s << "mode_nonincreasing," << (dp.mode_nonincreasing ? "yes" : "no") << '\n';
            }
            for (const auto& r : res.rows) out << "# wall_seconds " << fmt(r.value) << ' ' << fmt(r.wall_seconds) << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << kGrammar;
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << "\n";
        return 1;
    }
    err << kGrammar;
    return 2;
}

}  // namespace rmfg
