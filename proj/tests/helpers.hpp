#pragma once

// Test-side oracles and fixtures. Everything here is deliberately independent
// of the closed-form propagator: direct matrix exponentials, adaptive
// quadrature, brute-force spectral routes.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qbm/config.hpp"
#include "qbm/model.hpp"

namespace testutil {

using qbm::Mat4;
using qbm::Mat4c;

// Reference parameter sets used throughout the suite.
inline qbm::ParamSet baseline(double T1 = 1.0, double T2 = 0.25) {
    qbm::ParamSet ps;
    ps.sys.m = 2.0;
    ps.sys.omega0 = 1.0;
    ps.sys.kappa = -1.0;
    ps.sys.gamma1 = ps.sys.gamma2 = 0.01;
    ps.sys.T1 = T1;
    ps.sys.T2 = T2;
    ps.s = 1.0;
    ps.d = 6.0;
    return ps;
}

inline qbm::ParamSet ness_reference() {
    qbm::ParamSet ps = baseline(1.0 / 3.0, 0.25);
    ps.sys.gamma1 = ps.sys.gamma2 = 0.05;
    return ps;
}

inline qbm::ParamSet equilibrium_weak_damping(double T) {
    qbm::ParamSet ps = baseline(T, T);
    ps.sys.gamma1 = ps.sys.gamma2 = 1e-4;
    return ps;
}

inline qbm::ParamSet entropy_reference(double s) {
    qbm::ParamSet ps;
    ps.sys.m = 1.0;
    ps.sys.omega0 = 1.3;
    ps.sys.kappa = -1.6;
    ps.sys.gamma1 = 0.009;
    ps.sys.gamma2 = 0.01;
    ps.sys.T1 = 2.0;
    ps.sys.T2 = 4.0;
    ps.s = s;
    ps.d = 6.0;
    return ps;
}

inline double max_rel_dev(const Mat4& a, const Mat4& b) {
    return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

/// Scaling-and-squaring matrix exponential (independent of the eigenbasis
/// route used by the implementation).
inline Mat4 expm(const Mat4& a) { return a.exp(); }
inline Mat4c expmc(const Mat4c& a) { return a.exp(); }

/// Adaptive Simpson quadrature of a matrix-valued integrand, max-norm error
/// control.
inline Mat4 simpson_matrix(const std::function<Mat4(double)>& f, double a, double b, double tol,
                           int depth = 24) {
    const Mat4 fa = f(a), fb = f(b), fm = f((a + b) / 2.0);
    const Mat4 whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    std::function<Mat4(double, double, const Mat4&, const Mat4&, const Mat4&, const Mat4&, double,
                       int)>
        rec = [&](double lo, double hi, const Mat4& flo, const Mat4& fmid, const Mat4& fhi,
                  const Mat4& est, double eps, int d) -> Mat4 {
        const double m1 = lo + (hi - lo) / 4.0;
        const double m2 = hi - (hi - lo) / 4.0;
        const Mat4 f1 = f(m1), f2 = f(m2);
        const Mat4 left = (hi - lo) / 12.0 * (flo + 4.0 * f1 + fmid);
        const Mat4 right = (hi - lo) / 12.0 * (fmid + 4.0 * f2 + fhi);
        const Mat4 sum = left + right;
        if (d <= 0 || (sum - est).cwiseAbs().maxCoeff() < 15.0 * eps)
            return sum + (sum - est) / 15.0;
        return rec(lo, (lo + hi) / 2.0, flo, f1, fmid, left, eps / 2.0, d - 1) +
               rec((lo + hi) / 2.0, hi, fmid, f2, fhi, right, eps / 2.0, d - 1);
    };
    return rec(a, b, fa, fm, fb, whole, tol, depth);
}

/// Independent logarithmic negativity: the eigenvalues of sigma Gamma^T1 are
/// +-i nu~, so the moduli of their imaginary parts give the symplectic
/// spectrum directly.
inline double brute_log_negativity(const Mat4& g) {
    Mat4 gpt = g;
    for (int j = 0; j < 4; ++j)
        if (j != 1) {
            gpt(1, j) = -gpt(1, j);
            gpt(j, 1) = -gpt(j, 1);
        }
    Mat4 sg = Mat4::Zero();
    sg(0, 1) = sg(2, 3) = 1.0;
    sg(1, 0) = sg(3, 2) = -1.0;
    Eigen::EigenSolver<Mat4> es(sg * gpt, false);
    std::vector<double> nus;
    for (int i = 0; i < 4; ++i) nus.push_back(std::abs(es.eigenvalues()(i).imag()));
    std::sort(nus.begin(), nus.end());
    // pairs (0,1) and (2,3) are +- partners
    const double n1 = (nus[0] + nus[1]) / 2.0;
    const double n2 = (nus[2] + nus[3]) / 2.0;
    double ln = 0.0;
    for (double nu : {n1, n2}) ln += std::log2(std::min(1.0, nu));
    return -2.0 * ln;
}

/// Random symplectic S = exp(sigma H) with H symmetric, so S sigma S^T = sigma.
inline Mat4 random_symplectic(std::mt19937& rng, double scale = 0.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Mat4 h;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) h(i, j) = h(j, i) = u(rng);
    Mat4 sg = Mat4::Zero();
    sg(0, 1) = sg(2, 3) = 1.0;
    sg(1, 0) = sg(3, 2) = -1.0;
    return expm(sg * h);
}

/// <x1^2> and <x1 x2> of |Psi|^2 by two-dimensional Simpson quadrature in the
/// rotated (r, R) coordinates where the density factorises.
struct PositionMoments {
    double xx = 0.0;
    double x1x2 = 0.0;
};

inline PositionMoments quadrature_position_moments(double s, double d, int n = 801) {
    // |Psi|^2 ~ exp(-r^2/2s^2) exp(-R^2/2d^2), x1 = R + r/2, x2 = R - r/2.
    const double Lr = 10.0 * s, LR = 10.0 * d;
    auto w = [&](int i, int n_) { return (i == 0 || i == n_ - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double norm = 0.0, xx = 0.0, x1x2 = 0.0;
    const double hr = 2.0 * Lr / (n - 1), hR = 2.0 * LR / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double r = -Lr + i * hr;
        const double fr = std::exp(-r * r / (2.0 * s * s)) * w(i, n);
        for (int j = 0; j < n; ++j) {
            const double R = -LR + j * hR;
            const double f = fr * std::exp(-R * R / (2.0 * d * d)) * w(j, n);
            const double x1 = R + r / 2.0, x2 = R - r / 2.0;
            norm += f;
            xx += f * x1 * x1;
            x1x2 += f * x1 * x2;
        }
    }
    return {xx / norm, x1x2 / norm};
}

}  // namespace testutil
