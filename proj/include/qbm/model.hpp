#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "qbm/errors.hpp"

// Two harmonically coupled oscillators, each damped by its own thermal bath.
// Units: hbar = k_B = 1 throughout. The Hamiltonian frequency omega0 is also
// the frequency entering the weak-coupling coth weights; the two are
// identified everywhere in this library.

namespace qbm {

using Mat4 = Eigen::Matrix4d;
using Mat4c = Eigen::Matrix4cd;
using Vec4c = Eigen::Vector4cd;
using cplx = std::complex<double>;

/// coth(x) for x > 0, with coth(inf) = 1. Monotone decreasing.
inline double coth(double x) { return 1.0 / std::tanh(x); }

enum class Regime {
    HighTemperature,  // thermal weight kT_i (valid for T/omega0 >> 1)
    WeakCoupling      // thermal weight (omega0/2) coth(omega0 / 2T_i)
};

inline std::string to_string(Regime r) {
    return r == Regime::HighTemperature ? "high-t" : "weak";
}

struct SystemParams {
    double m = 1.0;       // oscillator mass
    double omega0 = 1.0;  // oscillator frequency
    double kappa = -0.5;  // bilinear coupling x1*x2 (signed)
    double gamma1 = 0.1;  // friction coefficient, bath 1
    double gamma2 = 0.1;  // friction coefficient, bath 2
    double T1 = 1.0;      // bath temperatures
    double T2 = 1.0;
    Regime regime = Regime::HighTemperature;

    /// Dimensionless coupling alpha = kappa / (m omega0^2); |alpha| < 1 keeps
    /// the potential confining.
    double alpha() const { return kappa / (m * omega0 * omega0); }

    /// Throws InvalidParams / UnstableSystem on hard violations. The marginal
    /// coupling |kappa| = m omega0^2 is accepted here (the closed-form
    /// critical-temperature and negativity expressions are finite there);
    /// operations that genuinely need a confining potential enforce the
    /// strict inequality themselves.
    void validate() const {
        if (!(m > 0.0)) throw InvalidParams("mass must be positive");
        if (!(omega0 > 0.0)) throw InvalidParams("omega0 must be positive");
        if (gamma1 < 0.0 || gamma2 < 0.0) throw InvalidParams("friction coefficients must be >= 0");
        if (T1 < 0.0 || T2 < 0.0) throw InvalidParams("bath temperatures must be >= 0");
        if (std::abs(kappa) > m * omega0 * omega0)
            throw UnstableSystem("|kappa| > m*omega0^2: potential is not confining");
    }

    /// Strict confinement, required wherever a steady state must exist.
    void require_confining() const {
        if (std::abs(kappa) >= m * omega0 * omega0)
            throw UnstableSystem("|kappa| >= m*omega0^2: no confined steady state");
    }

    /// Regime-validity warnings (non-fatal): the high-temperature master
    /// equation assumes T/omega0 >> 1.
    std::vector<std::string> validity_warnings() const {
        std::vector<std::string> w;
        if (regime == Regime::HighTemperature) {
            if (T1 / omega0 < 1.0)
                w.push_back("high-temperature regime with T1/omega0 < 1; results unreliable");
            if (T2 / omega0 < 1.0)
                w.push_back("high-temperature regime with T2/omega0 < 1; results unreliable");
        }
        return w;
    }
};

/// Effective thermal weights entering every noise term. In the
/// high-temperature regime the weight is kT_i itself; in the weak-coupling
/// regime it is (omega0/2) coth(omega0 / 2T_i), which tends to omega0/2 as
/// T_i -> 0 and back to kT_i for T_i/omega0 >> 1.
struct EffectiveTemps {
    double kT1 = 0.0;
    double kT2 = 0.0;
};

inline EffectiveTemps effective_temps(const SystemParams& p) {
    p.validate();
    auto weight = [&](double T) {
        if (p.regime == Regime::HighTemperature) return T;
        if (T == 0.0) return p.omega0 / 2.0;  // coth(inf) = 1
        return (p.omega0 / 2.0) * coth(p.omega0 / (2.0 * T));
    };
    return {weight(p.T1), weight(p.T2)};
}

/// Initial pure Gaussian state
///   Psi(x1,x2) ~ exp(-(x1-x2)^2 / 4s^2) exp(-(x1+x2)^2 / 16d^2),
/// s = relative-coordinate width, d = center-of-mass width. The Fourier
/// coefficients eps/eps~ parametrise its characteristic function and feed the
/// analytic propagator.
struct InitialState {
    double s = 1.0;
    double d = 1.0;
    double eps_plus = 0.0;
    double eps_minus = 0.0;
    double eps_tilde_plus = 0.0;
    double eps_tilde_minus = 0.0;

    static InitialState from_widths(double s, double d) {
        if (!(s > 0.0) || !(d > 0.0)) throw InvalidParams("state widths s, d must be positive");
        InitialState st;
        st.s = s;
        st.d = d;
        st.eps_plus = 1.0 / (2.0 * s * s) + 1.0 / (8.0 * d * d);
        st.eps_minus = 1.0 / (2.0 * s * s) - 1.0 / (8.0 * d * d);
        const double gap = st.eps_plus * st.eps_plus - st.eps_minus * st.eps_minus;
        st.eps_tilde_plus = st.eps_plus / (4.0 * gap);
        st.eps_tilde_minus = st.eps_minus / (4.0 * gap);
        return st;
    }
};

/// Covariance matrix of the initial state, ordering [x1, p1, x2, p2] with the
/// convention Gamma_jk = 2 Re Tr[rho R_j R_k] (first moments vanish).
/// Position moments follow from the |Psi|^2 widths, momentum moments from the
/// minimum-uncertainty conjugates of the relative and center-of-mass modes.
inline Mat4 initial_covariance(const InitialState& st) {
    const double s = st.s, d = st.d;
    const double xx = d * d + s * s / 4.0;       // <x1^2> = <x2^2>
    const double xy = d * d - s * s / 4.0;       // <x1 x2>
    const double pp = 1.0 / (4.0 * s * s) + 1.0 / (16.0 * d * d);   // <p1^2> = <p2^2>
    const double pq = -1.0 / (4.0 * s * s) + 1.0 / (16.0 * d * d);  // <p1 p2>
    Mat4 g = Mat4::Zero();
    g(0, 0) = g(2, 2) = 2.0 * xx;
    g(0, 2) = g(2, 0) = 2.0 * xy;
    g(1, 1) = g(3, 3) = 2.0 * pp;
    g(1, 3) = g(3, 1) = 2.0 * pq;
    return g;
}

/// Mean energy <H_s> evaluated from a covariance matrix.
inline double mean_energy(const Mat4& g, const SystemParams& p) {
    return (g(1, 1) + g(3, 3)) / (4.0 * p.m) +
           p.m * p.omega0 * p.omega0 * (g(0, 0) + g(2, 2)) / 4.0 + p.kappa * g(0, 2) / 2.0;
}

}  // namespace qbm
