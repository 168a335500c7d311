#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbm/errors.hpp"
#include "qbm/model.hpp"
#include "qbm/oracle.hpp"

// Non-equilibrium steady state of the two-bath system. Two routes are kept:
// a verbatim closed-form moment table and the Lyapunov solve of the moment
// flow. They are cross-checked on every construction; where they disagree the
// Lyapunov value wins and the disagreement is reported, never hidden. Three
// closed-form entries are known to disagree: <x1^2>/<x2^2> carry a spurious
// factor m, <x1x2> an opposite sign, and <x1p2> is identically zero where the
// Lyapunov solution has gamma1 gamma2 kappa (kT2 - kT1) / ((gamma1+gamma2)
// (gamma1 gamma2 omega0^2 + kappa^2)).

namespace qbm {

/// Independent nonzero second moments of the steady state;
/// <[x1,p1]_+> = <[x2,p2]_+> = <p1p2> = 0 by the structure of the flow, and
/// <x2p1> = -<x1p2>.
struct SteadyMoments {
    double xx1 = 0.0;   // <x1^2>
    double xx2 = 0.0;   // <x2^2>
    double pp1 = 0.0;   // <p1^2>
    double pp2 = 0.0;   // <p2^2>
    double x1x2 = 0.0;  // <x1 x2>
    double x1p2 = 0.0;  // <x1 p2> = -<x2 p1>

    Mat4 to_covariance() const {
        Mat4 g = Mat4::Zero();
        g(0, 0) = 2.0 * xx1;
        g(2, 2) = 2.0 * xx2;
        g(1, 1) = 2.0 * pp1;
        g(3, 3) = 2.0 * pp2;
        g(0, 2) = g(2, 0) = 2.0 * x1x2;
        g(0, 3) = g(3, 0) = 2.0 * x1p2;
        g(1, 2) = g(2, 1) = -2.0 * x1p2;
        return g;
    }

    static SteadyMoments from_covariance(const Mat4& g) {
        SteadyMoments m;
        m.xx1 = g(0, 0) / 2.0;
        m.xx2 = g(2, 2) / 2.0;
        m.pp1 = g(1, 1) / 2.0;
        m.pp2 = g(3, 3) / 2.0;
        m.x1x2 = g(0, 2) / 2.0;
        m.x1p2 = g(0, 3) / 2.0;
        return m;
    }
};

/// The closed-form moment table, evaluated verbatim with the regime's
/// effective thermal weights. Kept as written so that `steady`/`validate`
/// can report it against the Lyapunov solution; see the module note above for
/// the three entries known to be wrong.
inline SteadyMoments closed_form_moments(const SystemParams& p) {
    p.validate();
    p.require_confining();
    if (!(p.gamma1 + p.gamma2 > 0.0))
        throw NotHurwitz("steady state requires gamma1 + gamma2 > 0");
    const EffectiveTemps kt = effective_temps(p);
    const double m = p.m, w = p.omega0, k = p.kappa;
    const double g1 = p.gamma1, g2 = p.gamma2;
    const double kT1 = kt.kT1, kT2 = kt.kT2;
    const double w2 = w * w, w4 = w2 * w2, m2 = m * m, k2 = k * k;
    const double stiff = m2 * w4 - k2;            // confinement margin
    const double mix = g1 * g2 * w2 + k2;

    SteadyMoments sm;
    sm.xx1 = (g1 * kT1 * (g2 * g2 * m2 * w4 - g2 * g2 * k2 + g1 * g2 * m2 * w4 + k2 * m2 * w2) +
              g2 * kT2 * k2 * (m2 * w2 + g1 * g2)) /
             (stiff * (g1 + g2) * mix);
    sm.xx2 = (g1 * kT1 * k2 * (m2 * w2 + g1 * g2) +
              g2 * kT2 * (g1 * g1 * m2 * w4 - g1 * g1 * k2 + g1 * g2 * m2 * w4 + k2 * m2 * w2)) /
             (stiff * (g1 + g2) * mix);
    sm.pp1 = m * (g1 * kT1 * (g2 * g2 * w2 + g1 * g2 * w2 + k2) + g2 * kT2 * k2) /
             ((g1 + g2) * mix);
    sm.pp2 = m * (g1 * kT1 * k2 + g2 * kT2 * (g1 * g1 * w2 + g1 * g2 * w2 + k2)) /
             ((g1 + g2) * mix);
    sm.x1x2 = (g1 * kT1 * k + g2 * kT2 * k) / ((g1 + g2) * stiff);
    sm.x1p2 = (g1 * kT2 * g2 * k - g2 * kT2 * g1 * k) / ((g1 + g2) * mix);
    return sm;
}

struct MomentMismatch {
    std::string moment;
    double closed_form = 0.0;
    double oracle = 0.0;
    double rel_deviation = 0.0;
};

enum class MismatchPolicy { AdoptOracle, Throw };

struct SteadyState {
    Mat4 gamma = Mat4::Zero();  // adjudicated covariance (Lyapunov solution)
    SteadyMoments closed_form;
    SteadyMoments oracle;
    std::vector<MomentMismatch> mismatches;
};

/// Steady-state covariance with construction-time validation of the closed
/// forms against the Lyapunov oracle at 1e-6 relative (scale = largest
/// moment). The returned covariance always satisfies the Lyapunov equation;
/// the closed-form values ride along for reporting.
inline SteadyState steady_state(const SystemParams& p,
                                MismatchPolicy policy = MismatchPolicy::AdoptOracle) {
    SteadyState ss;
    ss.closed_form = closed_form_moments(p);
    ss.gamma = lyapunov_steady(p);
    ss.oracle = SteadyMoments::from_covariance(ss.gamma);

    const std::array<std::pair<const char*, std::pair<double, double>>, 6> rows = {{
        {"x1^2", {ss.closed_form.xx1, ss.oracle.xx1}},
        {"x2^2", {ss.closed_form.xx2, ss.oracle.xx2}},
        {"p1^2", {ss.closed_form.pp1, ss.oracle.pp1}},
        {"p2^2", {ss.closed_form.pp2, ss.oracle.pp2}},
        {"x1x2", {ss.closed_form.x1x2, ss.oracle.x1x2}},
        {"x1p2", {ss.closed_form.x1p2, ss.oracle.x1p2}},
    }};
    double scale = 0.0;
    for (const auto& r : rows)
        scale = std::max({scale, std::abs(r.second.first), std::abs(r.second.second)});
    for (const auto& r : rows) {
        const double dev = std::abs(r.second.first - r.second.second) / scale;
        if (dev > 1e-6)
            ss.mismatches.push_back({r.first, r.second.first, r.second.second, dev});
    }
    if (policy == MismatchPolicy::Throw && !ss.mismatches.empty())
        throw ClosedFormMismatch("closed-form steady moment <" + ss.mismatches.front().moment +
                                 "> deviates from the Lyapunov oracle by " +
                                 std::to_string(ss.mismatches.front().rel_deviation) +
                                 " relative");
    return ss;
}

inline Mat4 steady_state_covariance(const SystemParams& p) { return steady_state(p).gamma; }

namespace detail {

inline void check_alpha(double alpha) {
    if (std::abs(alpha) > 1.0)
        throw UnstableSystem("|alpha| > 1: potential is not confining");
}

/// 2 kT_eff / omega0; equals coth(omega0/2T) in the weak-coupling regime and
/// 2T/omega0 in the high-temperature regime, so the closed forms below serve
/// both regimes through the same expression.
inline double thermal_factor(const SystemParams& p, double T) {
    if (p.regime == Regime::WeakCoupling)
        return (T == 0.0) ? 1.0 : coth(p.omega0 / (2.0 * T));
    return 2.0 * T / p.omega0;
}

}  // namespace detail

/// Weak-coupling symplectic eigenvalues of the partially transposed steady
/// state to zeroth order in gamma (the linear term vanishes):
///   lambda_{+,-} = (coth(w/2T1) + coth(w/2T2)) / (2 sqrt(1 +- alpha)).
/// At |alpha| = 1 the soft-mode branch diverges and is returned as +inf.
inline std::array<double, 2> steady_symplectic_weak(const SystemParams& p) {
    p.validate();
    const double alpha = p.alpha();
    detail::check_alpha(alpha);
    const double num = detail::thermal_factor(p, p.T1) + detail::thermal_factor(p, p.T2);
    auto branch = [&](double sign) {
        const double denom = 2.0 * std::sqrt(1.0 + sign * alpha);
        return (denom > 0.0) ? num / denom : std::numeric_limits<double>::infinity();
    };
    return {branch(+1.0), branch(-1.0)};
}

/// Closed-form steady-state logarithmic negativity. Only the 1 + |alpha|
/// branch can drop below 1, so
///   L_N = -2 log2(min(1, (coth(w/2T1)+coth(w/2T2)) / (2 sqrt(1+|alpha|)))).
inline double steady_log_negativity(const SystemParams& p) {
    p.validate();
    const double alpha = p.alpha();
    detail::check_alpha(alpha);
    const double num = detail::thermal_factor(p, p.T1) + detail::thermal_factor(p, p.T2);
    double lam = num / (2.0 * std::sqrt(1.0 + std::abs(alpha)));
    if (std::abs(lam - 1.0) < 1e-12) lam = 1.0;
    const double value = -2.0 * std::log2(std::min(1.0, lam));
    return value == 0.0 ? 0.0 : value;
}

struct CriticalTemperature {
    double value = 0.0;
    bool zero_coupling_limit = false;  // alpha = 0: T_c -> 0 limit was taken
};

/// Equilibrium critical temperature T^c = omega / (2 acoth(sqrt(1+|alpha|))).
inline CriticalTemperature critical_temperature_equilibrium(double omega, double alpha) {
    if (!(omega > 0.0)) throw InvalidParams("omega must be positive");
    detail::check_alpha(alpha);
    if (alpha == 0.0) return {0.0, true};  // acoth(1) diverges
    const double root = std::sqrt(1.0 + std::abs(alpha));
    const double acoth = std::atanh(1.0 / root);
    return {omega / (2.0 * acoth), false};
}

/// Boundary of the entangled region in the (T1, T2) plane:
///   coth(w/2T1c) + coth(w/2T2c) = 2 sqrt(1+|alpha|).
/// Solves for T2c at given T1 by bisection on the monotone coth; returns
/// nullopt when even T2 = 0 cannot satisfy the budget.
inline std::optional<double> critical_temperature_curve(double omega, double alpha, double T1) {
    if (!(omega > 0.0)) throw InvalidParams("omega must be positive");
    if (T1 < 0.0) throw InvalidParams("T1 must be >= 0");
    detail::check_alpha(alpha);
    if (alpha == 0.0) return std::nullopt;

    const double budget = 2.0 * std::sqrt(1.0 + std::abs(alpha));
    const double coth1 = (T1 == 0.0) ? 1.0 : coth(omega / (2.0 * T1));
    const double target = budget - coth1;  // = coth(omega/2T2c), needs > 1
    if (target <= 1.0) return std::nullopt;

    auto residual = [&](double T2) { return coth(omega / (2.0 * T2)) - target; };
    double lo = omega * 1e-12, hi = omega;
    while (residual(hi) < 0.0) hi *= 2.0;  // coth(w/2T) grows with T
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo + hi) / 2.0;
        const double r = residual(mid);
        if (std::abs(r) < 1e-12) return mid;
        (r < 0.0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2.0;
}

}  // namespace qbm
