// qbm - coupled damped quantum oscillators: closed-form Gaussian dynamics,
// non-equilibrium steady states, entanglement and entropy measures.
//
// Subcommands: evolve, steady, sweep, critical, validate. Parameters come
// from an optional key/value config file; command-line flags override it.
// Units: hbar = k_B = 1.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qbm/commands.hpp"

namespace {

struct ParamFlags {
    std::optional<double> m, omega0, kappa, gamma1, gamma2, T1, T2, s, d;
    std::optional<std::string> regime;
    std::string config;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config, "key/value config file (flags override it)");
        cmd->add_option("--m", m, "oscillator mass");
        cmd->add_option("--omega0", omega0, "oscillator frequency");
        cmd->add_option("--kappa", kappa, "bilinear coupling strength (signed)");
        cmd->add_option("--gamma1", gamma1, "friction coefficient, bath 1");
        cmd->add_option("--gamma2", gamma2, "friction coefficient, bath 2");
        cmd->add_option("--T1", T1, "temperature of bath 1");
        cmd->add_option("--T2", T2, "temperature of bath 2");
        cmd->add_option("--s", s, "initial relative-coordinate width");
        cmd->add_option("--d", d, "initial center-of-mass width");
        cmd->add_option("--regime", regime, "master-equation regime: high-t | weak")
            ->check(CLI::IsMember({"high-t", "weak"}));
    }

    qbm::ParamSet resolve() const {
        qbm::ParamSet ps;
        if (!config.empty()) ps = qbm::load_config_file(config, ps);
        if (m) ps.sys.m = *m;
        if (omega0) ps.sys.omega0 = *omega0;
        if (kappa) ps.sys.kappa = *kappa;
        if (gamma1) ps.sys.gamma1 = *gamma1;
        if (gamma2) ps.sys.gamma2 = *gamma2;
        if (T1) ps.sys.T1 = *T1;
        if (T2) ps.sys.T2 = *T2;
        if (s) ps.s = *s;
        if (d) ps.d = *d;
        if (regime) ps.sys.regime = qbm::parse_regime(*regime);
        ps.sys.validate();
        return ps;
    }
};

// "name=min:max:count"
qbm::AxisSpec parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    const auto c1 = text.find(':', eq == std::string::npos ? 0 : eq);
    const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
    if (eq == std::string::npos || c1 == std::string::npos || c2 == std::string::npos)
        throw qbm::InvalidParams("axis '" + text + "': expected name=min:max:count");
    qbm::AxisSpec ax;
    ax.name = text.substr(0, eq);
    try {
        ax.min = std::stod(text.substr(eq + 1, c1 - eq - 1));
        ax.max = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        ax.count = std::stoi(text.substr(c2 + 1));
    } catch (const std::exception&) {
        throw qbm::InvalidParams("axis '" + text + "': expected name=min:max:count");
    }
    return ax;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled damped quantum oscillators: Gaussian dynamics and steady states"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qbm::kVersion);

    // evolve
    auto* evolve = app.add_subcommand("evolve", "time series of L_N, entropy and covariance");
    ParamFlags evolve_params;
    evolve_params.attach(evolve);
    qbm::EvolveOptions evolve_opt;
    std::string evolve_out;
    evolve->add_option("--t-max", evolve_opt.t_max, "end of the time grid")->capture_default_str();
    evolve->add_option("--samples", evolve_opt.samples, "uniform samples on [0, t-max]")
        ->capture_default_str();
    evolve->add_option("--out", evolve_out, "CSV output path (default: stdout)");
    evolve->add_option("--svg", evolve_opt.svg_path, "optional SVG line chart");

    // steady
    auto* steady = app.add_subcommand("steady", "non-equilibrium steady-state report");
    ParamFlags steady_params;
    steady_params.attach(steady);
    std::string steady_out;
    steady->add_option("--out", steady_out, "report output path (default: stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "steady-state observable over a parameter grid");
    ParamFlags sweep_params;
    sweep_params.attach(sweep);
    std::string axis1_text, axis2_text, observable_text = "logneg";
    unsigned jobs = 1;
    qbm::SweepOutputs sweep_paths;
    sweep->add_option("--axis1", axis1_text, "swept axis, name=min:max:count")->required();
    sweep->add_option("--axis2", axis2_text, "optional second axis, name=min:max:count");
    sweep->add_option("--observable", observable_text,
                      "logneg | entropy | numin | moment:<xx1|xx2|pp1|pp2|x1x2|x1p2>")
        ->capture_default_str();
    sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();
    sweep->add_option("--out", sweep_paths.csv_path,
                      "CSV output path; metadata sidecar lands at <out>.meta.json "
                      "(default: stdout, no sidecar)");
    sweep->add_option("--svg", sweep_paths.svg_path, "optional SVG heatmap/line chart");

    // critical
    auto* critical = app.add_subcommand("critical", "critical temperatures for entanglement");
    ParamFlags critical_params;
    critical_params.attach(critical);
    qbm::CriticalOptions critical_opt;
    double critical_T1 = 0.0;
    auto* t1_opt = critical->add_option("--curve-T1", critical_T1,
                                        "solve the boundary curve for T2_c at this T1");

    // validate
    auto* validate = app.add_subcommand("validate", "cross-check closed forms against oracles");
    ParamFlags validate_params;
    validate_params.attach(validate);
    qbm::ValidateOptions validate_opt;
    validate->add_option("--t-grid", validate_opt.t_grid, "times for the propagator cross-check")
        ->expected(-1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*evolve) {
            const qbm::ParamSet ps = evolve_params.resolve();
            if (!evolve_out.empty()) {
                std::ofstream f(evolve_out, std::ios::binary);
                if (!f) throw qbm::InvalidParams("cannot open '" + evolve_out + "'");
                return qbm::cmd_evolve(ps, evolve_opt, f, std::cerr);
            }
            return qbm::cmd_evolve(ps, evolve_opt, std::cout, std::cerr);
        }
        if (*steady) {
            const qbm::ParamSet ps = steady_params.resolve();
            if (!steady_out.empty()) {
                std::ofstream f(steady_out);
                if (!f) throw qbm::InvalidParams("cannot open '" + steady_out + "'");
                return qbm::cmd_steady(ps, f, std::cerr);
            }
            return qbm::cmd_steady(ps, std::cout, std::cerr);
        }
        if (*sweep) {
            qbm::SweepSpec spec;
            spec.fixed = sweep_params.resolve();
            spec.axis1 = parse_axis(axis1_text);
            if (!axis2_text.empty()) spec.axis2 = parse_axis(axis2_text);
            spec.observable = qbm::parse_observable(observable_text);
            return qbm::cmd_sweep(spec, jobs, sweep_paths, std::cout, std::cerr);
        }
        if (*critical) {
            const qbm::ParamSet ps = critical_params.resolve();
            if (t1_opt->count() > 0) critical_opt.T1 = critical_T1;
            return qbm::cmd_critical(ps.sys, critical_opt, std::cout);
        }
        if (*validate) {
            const qbm::ParamSet ps = validate_params.resolve();
            return qbm::cmd_validate(ps, validate_opt, std::cout, std::cerr);
        }
    } catch (const qbm::Error& e) {
        std::cerr << "error (" << e.name() << "): " << e.what() << "\n";
        return qbm::classify_exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
