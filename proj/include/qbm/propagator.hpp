#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/model.hpp"

// Closed-form solution of the non-rotating-wave master equation for the
// characteristic function P~(q, z, t). The equation is hyperbolic in the
// four variables v = (z1, z2, q1, q2); the characteristics obey
//   dv/dt = M v / 2m,
// and the thermal noise accumulates along them. Diagonalising M once per
// parameter set makes every later time query O(1).

namespace qbm {

/// Drift matrix of the characteristic system, acting on v = (z1, z2, q1, q2).
inline Mat4 build_drift_matrix(const SystemParams& p) {
    p.validate();
    Mat4 M = Mat4::Zero();
    M(0, 0) = 2.0 * p.gamma1;
    M(1, 1) = 2.0 * p.gamma2;
    M(0, 2) = M(1, 3) = 1.0;
    M(2, 0) = M(3, 1) = -4.0 * p.m * p.m * p.omega0 * p.omega0;
    M(2, 1) = M(3, 0) = -4.0 * p.m * p.kappa;
    return M;
}

/// Eigenvalues lambda_i (sorted by real part, then imaginary part, both
/// descending) and the eigenvector matrix Q with columns (a_i, b_i, c_i, 1),
/// assembled from the closed-form component expressions rather than a generic
/// eigensolver. Qinv is the numerical inverse.
struct PropagatorBasis {
    Vec4c lambda;
    Mat4c Q;
    Mat4c Qinv;
};

namespace detail {

/// Characteristic polynomial of M in factored form:
///   p(l) = (l^2 - 2 g1 l + kA)(l^2 - 2 g2 l + kA) - kB^2,
/// where kA = 4 m^2 omega0^2 and kB = 4 m kappa.
inline cplx char_poly(cplx l, double g1, double g2, double kA, double kB) {
    return (l * l - 2.0 * g1 * l + kA) * (l * l - 2.0 * g2 * l + kA) - kB * kB;
}

inline cplx char_poly_deriv(cplx l, double g1, double g2, double kA) {
    return (2.0 * l - 2.0 * g1) * (l * l - 2.0 * g2 * l + kA) +
           (l * l - 2.0 * g1 * l + kA) * (2.0 * l - 2.0 * g2);
}

/// Roots of the monic quartic via its companion matrix, polished by two
/// Newton steps on the factored polynomial.
inline Vec4c quartic_eigenvalues(double g1, double g2, double kA, double kB) {
    const double c3 = -2.0 * (g1 + g2);
    const double c2 = 4.0 * g1 * g2 + 2.0 * kA;
    const double c1 = -2.0 * kA * (g1 + g2);
    const double c0 = kA * kA - kB * kB;
    Mat4 comp = Mat4::Zero();
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
    comp(0, 3) = -c0;
    comp(1, 3) = -c1;
    comp(2, 3) = -c2;
    comp(3, 3) = -c3;
    Eigen::EigenSolver<Mat4> es(comp, /*computeEigenvectors=*/false);
    Vec4c lam = es.eigenvalues();
    for (int i = 0; i < 4; ++i) {
        for (int it = 0; it < 2; ++it) {
            const cplx dp = char_poly_deriv(lam(i), g1, g2, kA);
            if (std::abs(dp) == 0.0) break;
            lam(i) -= char_poly(lam(i), g1, g2, kA, kB) / dp;
        }
    }
    // Deterministic ordering: real part descending, ties (within rounding of
    // the root finder) broken by imaginary part descending.
    double scale = 0.0;
    for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(lam(i)));
    const double tie = 1e-12 * std::max(scale, 1.0);
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (std::abs(lam(a).real() - lam(b).real()) > tie)
            return lam(a).real() > lam(b).real();
        return lam(a).imag() > lam(b).imag();
    });
    Vec4c out;
    for (int i = 0; i < 4; ++i) out(i) = lam(idx[i]);
    return out;
}

}  // namespace detail

/// Spectral decomposition of the drift matrix. The component formulas divide
/// by (lambda_i - 2 gamma_j) and by the uncoupled-oscillator polynomial
/// lambda_i (lambda_i - 2 gamma_1) + 4 m^2 omega0^2, so decoupled (kappa = 0)
/// or accidentally coincident spectra are rejected rather than special-cased.
inline PropagatorBasis eigendecompose(const Mat4& M) {
    const double g1 = M(0, 0) / 2.0;
    const double g2 = M(1, 1) / 2.0;
    const double kA = -M(2, 0);  // 4 m^2 omega0^2
    const double kB = -M(2, 1);  // 4 m kappa

    PropagatorBasis basis;
    basis.lambda = detail::quartic_eigenvalues(g1, g2, kA, kB);
    const Vec4c& lam = basis.lambda;

    double lmax = 0.0;
    for (int i = 0; i < 4; ++i) lmax = std::max(lmax, std::abs(lam(i)));
    if (lmax == 0.0) throw DegenerateSpectrum("drift matrix has zero spectrum");

    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (std::abs(lam(i) - lam(j)) < 1e-8 * lmax) {
                std::ostringstream os;
                os << "eigenvalues " << i << " and " << j << " coincide within tolerance; "
                   << "the closed-form propagator assumes a diagonalisable drift "
                   << "(perturb gamma by ~1e-9 to lift the degeneracy)";
                throw DegenerateSpectrum(os.str());
            }

    const double singular_tol = 1e-12 * lmax;
    for (int i = 0; i < 4; ++i) {
        const cplx l = lam(i);
        const cplx d1 = l - 2.0 * g1;
        const cplx d2 = l - 2.0 * g2;
        const cplx osc1 = l * d1 + kA;  // c_i denominator
        if (std::abs(d1) < singular_tol || std::abs(d2) < singular_tol ||
            std::abs(osc1) < singular_tol)
            throw SingularNormalization(
                "eigenvector normalization f_i = 1 is singular for this spectrum "
                "(kappa = 0 or a parameter coincidence)");
        const cplx f = 1.0;
        const cplx c = -kB * d1 * f / (d2 * osc1);
        const cplx a = c / d1;
        const cplx b = f / d2;
        basis.Q(0, i) = a;
        basis.Q(1, i) = b;
        basis.Q(2, i) = c;
        basis.Q(3, i) = f;
    }

    basis.Qinv = basis.Q.inverse();

    const double qscale = basis.Q.cwiseAbs().maxCoeff();
    if ((M.cast<cplx>() * basis.Q - basis.Q * lam.asDiagonal().toDenseMatrix())
            .cwiseAbs()
            .maxCoeff() > 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff()) * qscale)
        throw SingularNormalization("eigenvector residual check failed");
    if ((basis.Q * basis.Qinv - Mat4c::Identity()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, qscale * basis.Qinv.cwiseAbs().maxCoeff()))
        throw SingularNormalization("eigenvector basis is numerically singular");

    return basis;
}

inline PropagatorBasis eigendecompose(const SystemParams& p) {
    return eigendecompose(build_drift_matrix(p));
}

/// Entries of the flow map Q exp(D t/2m) Qinv, by row of v = (z1, z2, q1, q2):
/// zeta (z1 row), xi (z2 row), tau (q1 row), vartheta (q2 row); the z/q
/// superscript selects the source column. Valid for any real t; the solution
/// uses them at -t.
struct FlowCoefficients {
    cplx zeta_z[2], zeta_q[2];
    cplx xi_z[2], xi_q[2];
    cplx tau_z[2], tau_q[2];
    cplx vartheta_z[2], vartheta_q[2];

    Mat4c matrix() const {
        Mat4c F;
        F << zeta_z[0], zeta_z[1], zeta_q[0], zeta_q[1],
             xi_z[0], xi_z[1], xi_q[0], xi_q[1],
             tau_z[0], tau_z[1], tau_q[0], tau_q[1],
             vartheta_z[0], vartheta_z[1], vartheta_q[0], vartheta_q[1];
        return F;
    }
};

inline FlowCoefficients flow_coefficients(const PropagatorBasis& basis, double m, double t) {
    Vec4c e;
    for (int i = 0; i < 4; ++i) e(i) = std::exp(basis.lambda(i) * t / (2.0 * m));
    auto entry = [&](int row, int col) {
        cplx s = 0.0;
        for (int i = 0; i < 4; ++i) s += basis.Q(row, i) * e(i) * basis.Qinv(i, col);
        return s;
    };
    FlowCoefficients f;
    for (int c = 0; c < 2; ++c) {
        f.zeta_z[c] = entry(0, c);
        f.zeta_q[c] = entry(0, c + 2);
        f.xi_z[c] = entry(1, c);
        f.xi_q[c] = entry(1, c + 2);
        f.tau_z[c] = entry(2, c);
        f.tau_q[c] = entry(2, c + 2);
        f.vartheta_z[c] = entry(3, c);
        f.vartheta_q[c] = entry(3, c + 2);
    }
    return f;
}

/// Accumulated thermal noise: the quadratic form in the initial characteristic
/// coordinates v0 produced by integrating gamma1 kT1 z1^2 + gamma2 kT2 z2^2
/// along the characteristics from 0 to t. chi are the squared coefficients,
/// theta the z1z2/q1q2 cross terms, Lambda the z-q cross block.
struct NoiseIntegrals {
    cplx chi_z[2], chi_q[2];
    cplx theta_z = 0.0, theta_q = 0.0;
    cplx Lambda[2][2];

    /// Symmetric matrix W with v0^T W v0 equal to the integral above.
    Mat4c form_matrix() const {
        Mat4c W = Mat4c::Zero();
        W(0, 0) = chi_z[0];
        W(1, 1) = chi_z[1];
        W(2, 2) = chi_q[0];
        W(3, 3) = chi_q[1];
        W(0, 1) = W(1, 0) = theta_z / 2.0;
        W(2, 3) = W(3, 2) = theta_q / 2.0;
        W(0, 2) = W(2, 0) = Lambda[0][0] / 2.0;
        W(0, 3) = W(3, 0) = Lambda[0][1] / 2.0;
        W(1, 2) = W(2, 1) = Lambda[1][0] / 2.0;
        W(1, 3) = W(3, 1) = Lambda[1][1] / 2.0;
        return W;
    }
};

namespace detail {

/// (e^x - 1)/x, by 4-term Taylor series for |x| < 1e-6 to avoid cancellation.
inline cplx phi1(cplx x) {
    if (std::abs(x) < 1e-6) return 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0;
    return (std::exp(x) - 1.0) / x;
}

}  // namespace detail

/// Every term carries a bath weight gamma_i kT_i_eff, so the integrals vanish
/// identically for undamped systems and at t = 0.
inline NoiseIntegrals noise_integrals(const PropagatorBasis& basis, const SystemParams& p,
                                      double t) {
    if (t < 0.0) throw InvalidParams("noise integrals require t >= 0");
    const EffectiveTemps kt = effective_temps(p);
    const double w1 = p.gamma1 * kt.kT1;
    const double w2 = p.gamma2 * kt.kT2;
    const Vec4c& lam = basis.lambda;
    const Mat4c& Q = basis.Q;
    const Mat4c& Qi = basis.Qinv;

    double lmax = 0.0;
    for (int i = 0; i < 4; ++i) lmax = std::max(lmax, std::abs(lam(i)));

    // Time integrals of products of two characteristic exponentials.
    cplx I[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const cplx sum = lam(i) + lam(j);
            const cplx weight = w1 * Q(0, i) * Q(0, j) + w2 * Q(1, i) * Q(1, j);
            if (std::abs(sum) < 1e-12 * lmax && weight != 0.0)
                throw SingularNormalization(
                    "pairwise eigenvalue sum vanishes with a nonzero noise weight");
            I[i][j] = I[j][i] = t * detail::phi1(sum * t / (2.0 * p.m));
        }

    // Full coefficient of the monomial v0_k v0_l.
    auto entry = [&](int k, int l) {
        cplx s = 0.0;
        const double mult = (k == l) ? 1.0 : 2.0;
        for (int i = 0; i < 4; ++i) {
            const cplx w = w1 * Q(0, i) * Q(0, i) + w2 * Q(1, i) * Q(1, i);
            s += mult * Qi(i, k) * Qi(i, l) * w * I[i][i];
        }
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                const cplx w = w1 * Q(0, i) * Q(0, j) + w2 * Q(1, i) * Q(1, j);
                s += mult * (Qi(i, k) * Qi(j, l) + Qi(i, l) * Qi(j, k)) * w * I[i][j];
            }
        return s;
    };

    NoiseIntegrals n;
    n.chi_z[0] = entry(0, 0);
    n.chi_z[1] = entry(1, 1);
    n.chi_q[0] = entry(2, 2);
    n.chi_q[1] = entry(3, 3);
    n.theta_z = entry(0, 1);
    n.theta_q = entry(2, 3);
    n.Lambda[0][0] = entry(0, 2);
    n.Lambda[0][1] = entry(0, 3);
    n.Lambda[1][0] = entry(1, 2);
    n.Lambda[1][1] = entry(1, 3);
    return n;
}

/// Exponent coefficients of the evolved characteristic function
///   P~ = exp(-A1 q1^2 - A2 q2^2 - B1 z1^2 - B2 z2^2 - E q1 q2 - D z1 z2
///            - C11 z1 q1 - C22 z2 q2 - C12 z1 q2 - C21 z2 q1),
/// real after the imaginary-residue health check.
struct SolutionCoefficients {
    double A1 = 0.0, A2 = 0.0;
    double B1 = 0.0, B2 = 0.0;
    double C[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double D = 0.0;
    double E = 0.0;
    double imag_residue = 0.0;  // max |Im| / max |coefficient| before realification
};

inline SolutionCoefficients solution_coefficients(const InitialState& st,
                                                  const PropagatorBasis& basis,
                                                  const SystemParams& p, double t) {
    if (t < 0.0) throw InvalidParams("solution coefficients require t >= 0");
    const NoiseIntegrals noise = noise_integrals(basis, p, t);
    const FlowCoefficients back = flow_coefficients(basis, p.m, -t);
    const Mat4c F = back.matrix();  // maps final v to initial v0

    // Weights of the combined exponent (initial state + accumulated noise) in
    // v0 coordinates; k_B = 1 so the noise enters with a factor 4.
    const cplx wz1 = st.eps_plus + 4.0 * noise.chi_z[0];
    const cplx wz2 = st.eps_plus + 4.0 * noise.chi_z[1];
    const cplx wq1 = st.eps_tilde_plus + 4.0 * noise.chi_q[0];
    const cplx wq2 = st.eps_tilde_plus + 4.0 * noise.chi_q[1];
    const cplx wzz = -(2.0 * st.eps_minus - 4.0 * noise.theta_z);
    const cplx wqq = 2.0 * st.eps_tilde_minus + 4.0 * noise.theta_q;

    // Columns of the backward flow express v0 in terms of one final variable
    // each; square(c) is the coefficient of v_c^2 in the composed exponent,
    // quad(cu, cv) the full coefficient of the monomial v_cu v_cv (cu != cv).
    auto quad = [&](int cu, int cv) {
        const cplx u0 = F(0, cu), u1 = F(1, cu), u2 = F(2, cu), u3 = F(3, cu);
        const cplx v0 = F(0, cv), v1 = F(1, cv), v2 = F(2, cv), v3 = F(3, cv);
        cplx s = 2.0 * (wz1 * u0 * v0 + wz2 * u1 * v1 + wq1 * u2 * v2 + wq2 * u3 * v3);
        s += wzz * (u0 * v1 + v0 * u1);
        s += wqq * (u2 * v3 + v2 * u3);
        s += 4.0 * (noise.Lambda[0][0] * (u0 * v2 + v0 * u2) +
                    noise.Lambda[0][1] * (u0 * v3 + v0 * u3) +
                    noise.Lambda[1][0] * (u1 * v2 + v1 * u2) +
                    noise.Lambda[1][1] * (u1 * v3 + v1 * u3));
        return s;
    };
    auto square = [&](int c) {
        const cplx u0 = F(0, c), u1 = F(1, c), u2 = F(2, c), u3 = F(3, c);
        cplx s = wz1 * u0 * u0 + wz2 * u1 * u1 + wq1 * u2 * u2 + wq2 * u3 * u3;
        s += wzz * u0 * u1 + wqq * u2 * u3;
        s += 4.0 * (noise.Lambda[0][0] * u0 * u2 + noise.Lambda[0][1] * u0 * u3 +
                    noise.Lambda[1][0] * u1 * u2 + noise.Lambda[1][1] * u1 * u3);
        return s;
    };

    const cplx vals[10] = {
        square(2),     // A1
        square(3),     // A2
        square(0),     // B1
        square(1),     // B2
        quad(0, 2),    // C11
        quad(0, 3),    // C12
        quad(1, 2),    // C21
        quad(1, 3),    // C22
        quad(0, 1),    // D
        quad(2, 3),    // E
    };

    double scale = 0.0, imax = 0.0;
    bool finite = true;
    for (const cplx& v : vals) {
        scale = std::max(scale, std::abs(v));
        imax = std::max(imax, std::abs(v.imag()));
        finite &= std::isfinite(v.real()) && std::isfinite(v.imag());
    }
    SolutionCoefficients c;
    c.imag_residue = (scale > 0.0) ? imax / scale : 0.0;
    if (!finite)
        throw ImaginaryResidue(
            "solution coefficients overflowed (time horizon exceeds double range)");
    if (c.imag_residue > 1e-8)
        throw ImaginaryResidue("solution coefficients have imaginary residue " +
                               std::to_string(c.imag_residue));
    c.A1 = vals[0].real();
    c.A2 = vals[1].real();
    c.B1 = vals[2].real();
    c.B2 = vals[3].real();
    c.C[0][0] = vals[4].real();
    c.C[0][1] = vals[5].real();
    c.C[1][0] = vals[6].real();
    c.C[1][1] = vals[7].real();
    c.D = vals[8].real();
    c.E = vals[9].real();
    return c;
}

/// Covariance matrix assembled from the exponent coefficients, ordering
/// [x1, p1, x2, p2].
inline Mat4 covariance_from_coefficients(const SolutionCoefficients& c) {
    Mat4 g;
    g << 4.0 * c.A1, -c.C[0][0], 2.0 * c.E, -c.C[1][0],
         -c.C[0][0], c.B1, -c.C[0][1], c.D / 2.0,
         2.0 * c.E, -c.C[0][1], 4.0 * c.A2, -c.C[1][1],
         -c.C[1][0], c.D / 2.0, -c.C[1][1], c.B2;
    return g;
}

/// Caches the eigenbasis so that repeated time queries are O(1) each.
/// Immutable after construction; safe for concurrent use.
class Propagator {
  public:
    Propagator(const SystemParams& params, const InitialState& init)
        : params_(params), init_(init), basis_(eigendecompose(params)) {}

    const SystemParams& params() const { return params_; }
    const InitialState& initial_state() const { return init_; }
    const PropagatorBasis& basis() const { return basis_; }

    SolutionCoefficients coefficients(double t) const {
        return solution_coefficients(init_, basis_, params_, t);
    }

    Mat4 covariance(double t) const { return covariance_from_coefficients(coefficients(t)); }

  private:
    SystemParams params_;
    InitialState init_;
    PropagatorBasis basis_;
};

/// One-shot convenience wrapper.
inline Mat4 covariance_at(const InitialState& st, const SystemParams& p, double t) {
    return Propagator(p, st).covariance(t);
}

}  // namespace qbm
