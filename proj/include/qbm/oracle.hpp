#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/model.hpp"

// Independent verification engines. The master equation implies linear
// equations of motion for the first moments,
//   d<x_i>/dt = <p_i>/m,
//   d<p_i>/dt = -m omega0^2 <x_i> - kappa <x_j> - (gamma_i/m) <p_i>,
// and for the covariance matrix
//   dGamma/dt = A Gamma + Gamma A^T + 2 D,
// with momentum diffusion D_pp = 2 gamma_i kT_i (see docs/moment_equations.md
// for the derivation). This route shares no algebra with the closed-form
// propagator, which is the point.

namespace qbm {

struct MomentOde {
    Mat4 A = Mat4::Zero();      // drift on [x1, p1, x2, p2]
    Mat4 Ddiff = Mat4::Zero();  // diffusion (nonzero only on the p diagonal)
};

inline MomentOde build_moment_ode(const SystemParams& p) {
    p.validate();
    const EffectiveTemps kt = effective_temps(p);
    MomentOde ode;
    ode.A(0, 1) = 1.0 / p.m;
    ode.A(1, 0) = -p.m * p.omega0 * p.omega0;
    ode.A(1, 1) = -p.gamma1 / p.m;
    ode.A(1, 2) = -p.kappa;
    ode.A(2, 3) = 1.0 / p.m;
    ode.A(3, 0) = -p.kappa;
    ode.A(3, 2) = -p.m * p.omega0 * p.omega0;
    ode.A(3, 3) = -p.gamma2 / p.m;
    ode.Ddiff(1, 1) = 2.0 * p.gamma1 * kt.kT1;
    ode.Ddiff(3, 3) = 2.0 * p.gamma2 * kt.kT2;
    return ode;
}

/// Reproducibility-first default step: fixed-step RK4, no adaptivity.
inline double default_dt(const SystemParams& p) {
    return std::min(0.01, 0.01 * p.m / std::max({p.gamma1, p.gamma2, 1.0}));
}

struct IntegrationResult {
    Mat4 gamma = Mat4::Zero();
    double error_bound = 0.0;  // Richardson estimate from step doubling
};

/// Classical RK4 on dGamma/dt = A Gamma + Gamma A^T + 2 D, run at dt and dt/2;
/// the half-step result is returned together with the step-doubling error
/// estimate |G_h - G_h/2| / (2^4 - 1).
inline IntegrationResult integrate_moments(const Mat4& g0, const MomentOde& ode, double t_end,
                                           double dt) {
    if (t_end < 0.0) throw InvalidParams("integration requires t_end >= 0");
    if (!(dt > 0.0)) throw InvalidParams("integration requires dt > 0");
    if (dt < 1e-12) throw StepSizeUnderflow("RK4 step size underflow: dt < 1e-12");

    auto rhs = [&](const Mat4& g) -> Mat4 {
        return ode.A * g + g * ode.A.transpose() + 2.0 * ode.Ddiff;
    };
    auto run = [&](double h) -> Mat4 {
        Mat4 g = g0;
        const long n = (t_end > 0.0) ? std::lround(std::ceil(t_end / h - 1e-9)) : 0;
        const double step = (n > 0) ? t_end / static_cast<double>(n) : 0.0;
        for (long i = 0; i < n; ++i) {
            const Mat4 k1 = rhs(g);
            const Mat4 k2 = rhs(g + 0.5 * step * k1);
            const Mat4 k3 = rhs(g + 0.5 * step * k2);
            const Mat4 k4 = rhs(g + step * k3);
            g += step / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        }
        return g;
    };

    const Mat4 coarse = run(dt);
    const Mat4 fine = run(dt / 2.0);
    IntegrationResult res;
    res.gamma = fine;
    res.error_bound = (coarse - fine).cwiseAbs().maxCoeff() / 15.0;
    return res;
}

inline IntegrationResult integrate_moments(const Mat4& g0, const SystemParams& p, double t_end) {
    return integrate_moments(g0, build_moment_ode(p), t_end, default_dt(p));
}

/// Steady state of the moment flow: solves A X + X A^T + 2 D = 0 by
/// vectorization into a 16x16 linear system (one refinement pass keeps the
/// residual at rounding level even for slow, weakly damped modes).
inline Mat4 lyapunov_steady(const MomentOde& ode) {
    Eigen::EigenSolver<Mat4> es(ode.A, /*computeEigenvectors=*/false);
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()(i).real() >= -1e-12)
            throw NotHurwitz("moment drift matrix is not Hurwitz; no steady state exists");

    using Mat16 = Eigen::Matrix<double, 16, 16>;
    using Vec16 = Eigen::Matrix<double, 16, 1>;
    Mat16 L = Mat16::Zero();
    // vec(A X + X A^T) = (I (x) A + A (x) I) vec(X), column-major vec.
    for (int c = 0; c < 4; ++c) L.block<4, 4>(4 * c, 4 * c) += ode.A;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) L.block<4, 4>(4 * r, 4 * c) += ode.A(r, c) * Mat4::Identity();

    Vec16 b;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) b(4 * c + r) = -2.0 * ode.Ddiff(r, c);

    Eigen::PartialPivLU<Mat16> lu(L);
    Vec16 x = lu.solve(b);
    x += lu.solve(b - L * x);

    Mat4 X;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) X(r, c) = x(4 * c + r);
    X = ((X + X.transpose()) / 2.0).eval();

    const Mat4 resid = ode.A * X + X * ode.A.transpose() + 2.0 * ode.Ddiff;
    if (resid.cwiseAbs().maxCoeff() > 1e-10) {
        std::ostringstream os;
        os << "Lyapunov residual " << resid.cwiseAbs().maxCoeff() << " exceeds tolerance";
        throw NotHurwitz(os.str());
    }
    return X;
}

inline Mat4 lyapunov_steady(const SystemParams& p) { return lyapunov_steady(build_moment_ode(p)); }

}  // namespace qbm
