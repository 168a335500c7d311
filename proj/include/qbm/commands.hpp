#pragma once

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/config.hpp"
#include "qbm/errors.hpp"
#include "qbm/format.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/oracle.hpp"
#include "qbm/propagator.hpp"
#include "qbm/steady_state.hpp"
#include "qbm/svg.hpp"
#include "qbm/sweep.hpp"

// Command implementations behind the CLI. Each returns a process exit code:
// 0 success, 2 invalid input, 3 numerical failure, 4 validation breach.

namespace qbm {

inline constexpr const char* kVersion = "1.0.0";

inline int classify_exit(const Error& e) { return e.is_input_error() ? 2 : 3; }

/// UTC timestamp; honors SOURCE_DATE_EPOCH for reproducible outputs.
inline std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(sde, &end, 10);
        if (end && *end == '\0') t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void print_warnings(const SystemParams& p, std::ostream& diag) {
    for (const auto& w : p.validity_warnings()) diag << "warning: " << w << "\n";
}

// --------------------------------------------------------------------------
// evolve: uniform-time CSV of entanglement, entropy and covariance entries.

struct EvolveOptions {
    double t_max = 20.0;
    int samples = 400;
    std::string svg_path;
};

inline int cmd_evolve(const ParamSet& ps, const EvolveOptions& opt, std::ostream& out,
                      std::ostream& diag) {
    if (opt.samples < 1) throw InvalidParams("samples must be >= 1");
    if (opt.t_max < 0.0) throw InvalidParams("t-max must be >= 0");
    print_warnings(ps.sys, diag);

    const Propagator prop(ps.sys, ps.initial_state());

    out << "t,log_negativity,entropy,nu_min_pt,g_x1x1,g_x1p1,g_x1x2,g_x1p2,"
           "g_p1p1,g_p1x2,g_p1p2,g_x2x2,g_x2p2,g_p2p2,status\r\n";

    std::vector<double> ts, lns, ents;
    int ok_rows = 0;
    for (int i = 0; i < opt.samples; ++i) {
        const double t =
            (opt.samples == 1) ? 0.0 : opt.t_max * static_cast<double>(i) / (opt.samples - 1);
        std::string status = "ok";
        std::optional<double> ln, S, numin;
        std::optional<Mat4> g;
        try {
            g = prop.covariance(t);
        } catch (const Error& e) {
            status = e.name();
        }
        if (g) {
            try {
                const SymplecticSpectrum sp = symplectic_spectrum(partial_transpose(*g));
                numin = sp.nu[1];
                double acc = 0.0;
                for (double nu : sp.nu) {
                    if (std::abs(nu - 1.0) < 1e-12) nu = 1.0;
                    acc += std::log2(std::min(1.0, std::abs(nu)));
                }
                ln = (acc == 0.0) ? 0.0 : -2.0 * acc;
            } catch (const Error& e) {
                if (status == "ok") status = e.name();
            }
            try {
                S = von_neumann_entropy(*g);
            } catch (const Error& e) {
                if (status == "ok") status = e.name();
            }
        }
        if (status == "ok") ++ok_rows;

        auto cell = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
        out << fmt17(t) << ',' << cell(ln) << ',' << cell(S) << ',' << cell(numin);
        if (g) {
            const Mat4& m = *g;
            const double e10[10] = {m(0, 0), m(0, 1), m(0, 2), m(0, 3), m(1, 1),
                                    m(1, 2), m(1, 3), m(2, 2), m(2, 3), m(3, 3)};
            for (double v : e10) out << ',' << fmt17(v);
        } else {
            out << ",,,,,,,,,,";
        }
        out << ',' << status << "\r\n";

        ts.push_back(t);
        lns.push_back(ln ? *ln : std::nan(""));
        ents.push_back(S ? *S : std::nan(""));
    }

    if (!opt.svg_path.empty()) {
        std::ofstream f(opt.svg_path);
        if (!f) throw InvalidParams("cannot write SVG to '" + opt.svg_path + "'");
        f << svg::line_chart({{"log-negativity", ts, lns}, {"entropy", ts, ents}}, "t", "value");
    }
    return ok_rows > 0 ? 0 : 3;
}

// --------------------------------------------------------------------------
// steady: human-readable non-equilibrium steady-state report.

inline int cmd_steady(const ParamSet& ps, std::ostream& out, std::ostream& diag) {
    print_warnings(ps.sys, diag);
    const SystemParams& p = ps.sys;
    const EffectiveTemps kt = effective_temps(p);
    const SteadyState ss = steady_state(p);

    out << "regime: " << to_string(p.regime) << "\n";
    out << "alpha = kappa/(m omega0^2): " << fmt(p.alpha(), 12) << "\n";
    out << "effective thermal weights kT_eff: " << fmt(kt.kT1, 12) << ", " << fmt(kt.kT2, 12)
        << "\n\n";

    out << "steady-state covariance (Lyapunov solution), ordering [x1,p1,x2,p2]:\n";
    for (int r = 0; r < 4; ++r) {
        out << " ";
        for (int c = 0; c < 4; ++c) out << ' ' << std::setw(23) << fmt17(ss.gamma(r, c));
        out << "\n";
    }

    out << "\nclosed-form moments vs Lyapunov oracle:\n";
    const struct {
        const char* name;
        double closed, oracle;
    } rows[] = {
        {"<x1^2>", ss.closed_form.xx1, ss.oracle.xx1},
        {"<x2^2>", ss.closed_form.xx2, ss.oracle.xx2},
        {"<p1^2>", ss.closed_form.pp1, ss.oracle.pp1},
        {"<p2^2>", ss.closed_form.pp2, ss.oracle.pp2},
        {"<x1x2>", ss.closed_form.x1x2, ss.oracle.x1x2},
        {"<x1p2>", ss.closed_form.x1p2, ss.oracle.x1p2},
    };
    for (const auto& r : rows) {
        const bool mm = [&] {
            for (const auto& m : ss.mismatches)
                if (std::string(r.name) == "<" + m.moment + ">") return true;
            return false;
        }();
        out << "  " << std::setw(7) << r.name << "  closed=" << std::setw(23) << fmt17(r.closed)
            << "  oracle=" << std::setw(23) << fmt17(r.oracle)
            << (mm ? "  MISMATCH (oracle adopted)" : "") << "\n";
    }
    if (!ss.mismatches.empty())
        out << "  note: closed-form/oracle disagreement is expected for <x1^2>, <x2^2> "
               "(scale), <x1x2> (sign) and, for T1 != T2, <x1p2>.\n";

    const SymplecticSpectrum sp = symplectic_spectrum(ss.gamma);
    const SymplecticSpectrum spt = symplectic_spectrum(partial_transpose(ss.gamma));
    out << "\nsymplectic spectrum of Gamma:     " << fmt(sp.nu[0], 12) << ", " << fmt(sp.nu[1], 12)
        << "\n";
    out << "symplectic spectrum of Gamma^T1:  " << fmt(spt.nu[0], 12) << ", "
        << fmt(spt.nu[1], 12) << "\n";
    out << "log-negativity (from covariance): " << fmt(log_negativity(ss.gamma), 12) << "\n";
    out << "log-negativity (closed form):     " << fmt(steady_log_negativity(p), 12) << "\n";
    try {
        out << "von Neumann entropy:              " << fmt(von_neumann_entropy(ss.gamma), 12)
            << "\n";
    } catch (const NonPhysical&) {
        out << "von Neumann entropy:              n/a (nu < 1: regime breakdown)\n";
    }
    return 0;
}

// --------------------------------------------------------------------------
// critical: critical temperatures of the entangled region.

struct CriticalOptions {
    std::optional<double> T1;  // when set, solve for T2^c on the boundary curve
};

inline int cmd_critical(const SystemParams& p, const CriticalOptions& opt, std::ostream& out) {
    const double alpha = p.alpha();
    out << "alpha = " << fmt(alpha, 12) << ", omega0 = " << fmt(p.omega0, 12) << "\n";
    const CriticalTemperature tc = critical_temperature_equilibrium(p.omega0, alpha);
    if (tc.zero_coupling_limit)
        out << "T_c(equilibrium) = 0 (alpha = 0: no entangled region)\n";
    else
        out << "T_c(equilibrium) = " << fmt17(tc.value) << "\n";
    if (opt.T1) {
        const auto t2 = critical_temperature_curve(p.omega0, alpha, *opt.T1);
        if (t2)
            out << "T2_c(T1 = " << fmt(*opt.T1, 12) << ") = " << fmt17(*t2) << "\n";
        else
            out << "T2_c(T1 = " << fmt(*opt.T1, 12) << ") = none (no entangled region)\n";
    }
    return 0;
}

// --------------------------------------------------------------------------
// sweep: parallel steady-state grid, CSV + JSON sidecar (+ optional heatmap).

struct SweepOutputs {
    std::string csv_path;  // sidecar lands next to it as <csv_path>.meta.json
    std::string svg_path;
};

inline int cmd_sweep(const SweepSpec& spec, unsigned jobs, const SweepOutputs& paths,
                     std::ostream& out, std::ostream& diag) {
    print_warnings(spec.fixed.sys, diag);
    const SweepResult result = run_sweep(spec, jobs);

    const std::string csv = result.to_csv();
    if (paths.csv_path.empty()) {
        out << csv;
    } else {
        std::ofstream f(paths.csv_path, std::ios::binary);
        if (!f) throw InvalidParams("cannot write CSV to '" + paths.csv_path + "'");
        f << csv;
        std::ofstream meta(paths.csv_path + ".meta.json");
        meta << result.metadata(utc_timestamp(), kVersion).dump(2) << "\n";
        diag << "wrote " << paths.csv_path << " (" << result.cells.size() << " cells, "
             << result.failed << " failed)\n";
    }

    if (!paths.svg_path.empty()) {
        const int n1 = spec.axis1.count;
        const int n2 = spec.axis2 ? spec.axis2->count : 1;
        std::vector<std::vector<double>> grid(n1, std::vector<double>(n2, std::nan("")));
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                const SweepCell& c = result.cells[static_cast<std::size_t>(i) * n2 + j];
                if (c.status == "ok") grid[i][j] = c.value;
            }
        std::ofstream f(paths.svg_path);
        if (!f) throw InvalidParams("cannot write SVG to '" + paths.svg_path + "'");
        if (spec.axis2)
            f << svg::heatmap(grid, spec.axis2->name, spec.axis1.name);
        else {
            std::vector<double> xs, ys;
            for (const auto& c : result.cells) {
                xs.push_back(c.a1);
                ys.push_back(c.status == "ok" ? c.value : std::nan(""));
            }
            f << svg::line_chart({{spec.observable.label(), xs, ys}}, spec.axis1.name,
                                 spec.observable.label());
        }
    }
    return 0;
}

// --------------------------------------------------------------------------
// validate: cross-checks the closed-form propagator and steady state against
// the independent oracles, reporting one line per check.

struct ValidateOptions {
    std::vector<double> t_grid = {0.1, 1.0, 5.0, 20.0, 100.0};
};

namespace detail {

inline bool expected_unsupported(const Error& e) {
    return dynamic_cast<const DegenerateSpectrum*>(&e) != nullptr ||
           dynamic_cast<const SingularNormalization*>(&e) != nullptr ||
           dynamic_cast<const NotHurwitz*>(&e) != nullptr;
}

inline double rel_dev(const Mat4& a, const Mat4& b) {
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace detail

inline int cmd_validate(const ParamSet& ps, const ValidateOptions& opt, std::ostream& out,
                        std::ostream& diag) {
    print_warnings(ps.sys, diag);
    const SystemParams& p = ps.sys;
    const InitialState init = ps.initial_state();
    bool breach = false;

    auto check = [&](const std::string& name, auto&& body) {
        try {
            body();
        } catch (const Error& e) {
            if (detail::expected_unsupported(e)) {
                out << "CHECK " << name << ": UNSUPPORTED (" << e.name()
                    << ", expected for this configuration)\n";
            } else {
                out << "CHECK " << name << ": FAIL (" << e.name() << ": " << e.what() << ")\n";
                breach = true;
            }
        }
    };

    check("initial_purity", [&] {
        const Mat4 g0 = initial_covariance(init);
        const SymplecticSpectrum sp = symplectic_spectrum(g0);
        const double dev = std::max(std::abs(sp.nu[0] - 1.0), std::abs(sp.nu[1] - 1.0));
        const double S = von_neumann_entropy(g0);
        const bool ok = dev <= 1e-9 && S <= 1e-9;
        out << "CHECK initial_purity: " << (ok ? "PASS" : "FAIL") << " (max|nu-1| = " << fmt(dev, 3)
            << ", S = " << fmt(S, 3) << ")\n";
        breach |= !ok;
    });

    check("analytic_vs_rk4", [&] {
        const Propagator prop(p, init);
        const MomentOde ode = build_moment_ode(p);
        const Mat4 g0 = initial_covariance(init);
        double worst = 0.0;
        for (double t : opt.t_grid) {
            const Mat4 ga = prop.covariance(t);
            const Mat4 gr = integrate_moments(g0, ode, t, default_dt(p)).gamma;
            worst = std::max(worst, detail::rel_dev(ga, gr));
        }
        const bool ok = worst <= 1e-6;
        out << "CHECK analytic_vs_rk4: " << (ok ? "PASS" : "FAIL") << " (max rel dev " << fmt(worst, 3)
            << " over " << opt.t_grid.size() << " times)\n";
        breach |= !ok;
    });

    check("analytic_longtime_vs_lyapunov", [&] {
        const Propagator prop(p, init);
        const Mat4 gss = lyapunov_steady(p);
        // Slowest covariance decay rate is min Re(lambda)/m; cap the horizon
        // so the fastest-growing noise exponential stays representable.
        double rmin = 1e300, rmax = 0.0;
        for (int i = 0; i < 4; ++i) {
            rmin = std::min(rmin, prop.basis().lambda(i).real() / p.m);
            rmax = std::max(rmax, prop.basis().lambda(i).real() / p.m);
        }
        const double t_ss = std::min(25.0 / rmin, 600.0 / rmax);
        const double dev = detail::rel_dev(prop.covariance(t_ss), gss);
        const bool ok = dev <= 1e-6;
        out << "CHECK analytic_longtime_vs_lyapunov: " << (ok ? "PASS" : "FAIL") << " (rel dev "
            << fmt(dev, 3) << " at t = " << fmt(t_ss, 6) << ")\n";
        breach |= !ok;
    });

    check("steady_closed_form", [&] {
        const SteadyState ss = steady_state(p);
        const char* known[] = {"x1^2", "x2^2", "x1x2", "x1p2"};
        bool unexpected = false;
        for (const auto& m : ss.mismatches) {
            bool is_known = false;
            for (const char* k : known) is_known |= (m.moment == k);
            out << "  moment <" << m.moment << ">: closed=" << fmt17(m.closed_form)
                << " oracle=" << fmt17(m.oracle) << " rel_dev=" << fmt(m.rel_deviation, 3)
                << (is_known ? "  [known closed-form defect]" : "  [UNEXPECTED]") << "\n";
            unexpected |= !is_known;
        }
        out << "CHECK steady_closed_form: " << (unexpected ? "FAIL" : "PASS") << " ("
            << ss.mismatches.size() << " known-defect moments adjudicated to the oracle)\n";
        breach |= unexpected;
    });

    check("regime_consistency_highT", [&] {
        // At T/omega0 = 1e4 the two thermal weights agree to O((omega0/2T)^2),
        // so the steady states must match.
        SystemParams hot = p;
        hot.T1 = hot.T2 = 1e4 * p.omega0;
        hot.regime = Regime::HighTemperature;
        SystemParams hotw = hot;
        hotw.regime = Regime::WeakCoupling;
        const double dev = detail::rel_dev(steady_state(hotw).gamma, steady_state(hot).gamma);
        const bool ok = dev <= 1e-6;
        out << "CHECK regime_consistency_highT: " << (ok ? "PASS" : "FAIL") << " (rel dev "
            << fmt(dev, 3) << ")\n";
        breach |= !ok;
    });

    out << (breach ? "validation FAILED\n" : "validation OK\n");
    return breach ? 4 : 0;
}

}  // namespace qbm
