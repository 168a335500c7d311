#include "catch_amalgamated.hpp"

#include <complex>

#include "helpers.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/model.hpp"
#include "qbm/oracle.hpp"
#include "qbm/propagator.hpp"

using namespace qbm;
using testutil::max_rel_dev;

TEST_CASE("drift matrix entries") {
    const auto ps = testutil::baseline();
    const Mat4 M = build_drift_matrix(ps.sys);
    Mat4 ref;
    ref << 0.02, 0, 1, 0,
           0, 0.02, 0, 1,
           -16, 8, 0, 0,
           8, -16, 0, 0;
    REQUIRE((M - ref).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("drift matrix decouples at kappa = 0") {
    SystemParams p;
    p.kappa = 0.0;
    p.gamma1 = p.gamma2 = 0.0;
    const Mat4 M = build_drift_matrix(p);
    REQUIRE(M(2, 1) == 0.0);
    REQUIRE(M(3, 0) == 0.0);
}

TEST_CASE("drift matrix label-swap symmetry") {
    auto ps = testutil::baseline();
    ps.sys.gamma1 = 0.01;
    ps.sys.gamma2 = 0.07;
    SystemParams swapped = ps.sys;
    std::swap(swapped.gamma1, swapped.gamma2);
    std::swap(swapped.T1, swapped.T2);
    Mat4 P = Mat4::Zero();  // z1<->z2, q1<->q2
    P(0, 1) = P(1, 0) = P(2, 3) = P(3, 2) = 1.0;
    const Mat4 lhs = build_drift_matrix(swapped);
    const Mat4 rhs = P * build_drift_matrix(ps.sys) * P;
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigendecomposition: undamped normal modes") {
    SystemParams p;
    p.m = 1.0;
    p.omega0 = 1.0;
    p.kappa = 0.5;
    p.gamma1 = p.gamma2 = 0.0;
    const PropagatorBasis basis = eigendecompose(p);
    // normal modes in (z1 +- z2): lambda = +-2i sqrt(1 -+ kappa... ) =
    // {+-i sqrt(6), +-i sqrt(2)}, sorted by (Re desc, Im desc)
    const double r6 = 2.44948974278317809;
    const double r2 = 1.41421356237309504;
    REQUIRE(std::abs(basis.lambda(0) - cplx(0, r6)) < 1e-10);
    REQUIRE(std::abs(basis.lambda(1) - cplx(0, r2)) < 1e-10);
    REQUIRE(std::abs(basis.lambda(2) - cplx(0, -r2)) < 1e-10);
    REQUIRE(std::abs(basis.lambda(3) - cplx(0, -r6)) < 1e-10);

    // cross-check the full spectrum against a dense numeric eigensolver
    // (multiset comparison; the two routes round tied real parts differently)
    Eigen::ComplexEigenSolver<Mat4c> es(build_drift_matrix(p).cast<cplx>());
    const Vec4c dense = es.eigenvalues();
    for (int i = 0; i < 4; ++i) {
        double best = 1e300;
        for (int j = 0; j < 4; ++j) best = std::min(best, std::abs(basis.lambda(i) - dense(j)));
        REQUIRE(best < 1e-10);
    }
}

TEST_CASE("eigendecomposition rejects degenerate and singular spectra") {
    SystemParams p;
    p.kappa = 0.0;
    p.gamma1 = p.gamma2 = 0.0;
    REQUIRE_THROWS_AS(eigendecompose(p), DegenerateSpectrum);

    p.gamma1 = 0.1;
    p.gamma2 = 0.2;  // distinct spectrum, but f = 1 normalization impossible
    REQUIRE_THROWS_AS(eigendecompose(p), SingularNormalization);
}

TEST_CASE("eigendecomposition residuals") {
    for (const auto& ps : {testutil::baseline(), testutil::ness_reference(), testutil::entropy_reference(1.0)}) {
        const Mat4 M = build_drift_matrix(ps.sys);
        const PropagatorBasis b = eigendecompose(M);
        const double qs = b.Q.cwiseAbs().maxCoeff();
        REQUIRE((M.cast<cplx>() * b.Q - b.Q * b.lambda.asDiagonal().toDenseMatrix())
                    .cwiseAbs()
                    .maxCoeff() < 1e-10 * M.cwiseAbs().maxCoeff() * qs);
        REQUIRE((b.Q * b.Qinv - Mat4c::Identity()).cwiseAbs().maxCoeff() < 1e-10 * qs);
        for (int i = 0; i < 4; ++i) REQUIRE(b.Q(3, i) == cplx(1.0, 0.0));  // f_i = 1
    }
}

TEST_CASE("flow coefficients: identity at t = 0 and group property") {
    const auto ps = testutil::baseline();
    const PropagatorBasis b = eigendecompose(ps.sys);
    const FlowCoefficients f0 = flow_coefficients(b, ps.sys.m, 0.0);
    REQUIRE(std::abs(f0.zeta_z[0] - 1.0) < 1e-10);
    REQUIRE(std::abs(f0.zeta_z[1]) < 1e-10);
    REQUIRE(std::abs(f0.zeta_q[0]) < 1e-10);
    REQUIRE((f0.matrix() - Mat4c::Identity()).cwiseAbs().maxCoeff() < 1e-10);

    const Mat4c fwd = flow_coefficients(b, ps.sys.m, 3.7).matrix();
    const Mat4c bwd = flow_coefficients(b, ps.sys.m, -3.7).matrix();
    REQUIRE((fwd * bwd - Mat4c::Identity()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("flow coefficients match a scaling-and-squaring matrix exponential") {
    const auto ps = testutil::baseline();
    const Mat4 M = build_drift_matrix(ps.sys);
    const PropagatorBasis b = eigendecompose(M);
    const double t = 1.0;
    const Mat4 ref = testutil::expm(M * (t / (2.0 * ps.sys.m)));
    const Mat4c got = flow_coefficients(b, ps.sys.m, t).matrix();
    REQUIRE((got - ref.cast<cplx>()).cwiseAbs().maxCoeff() <
            1e-9 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("noise integrals vanish at t = 0 and for undamped systems") {
    auto require_all_zero = [](const NoiseIntegrals& n) {
        REQUIRE(n.form_matrix().cwiseAbs().maxCoeff() == 0.0);
    };
    const auto ps = testutil::baseline();
    const PropagatorBasis b = eigendecompose(ps.sys);
    require_all_zero(noise_integrals(b, ps.sys, 0.0));

    SystemParams free = ps.sys;
    free.gamma1 = free.gamma2 = 0.0;
    const PropagatorBasis bf = eigendecompose(free);
    require_all_zero(noise_integrals(bf, free, 5.0));
}

TEST_CASE("noise integrals match adaptive quadrature along characteristics") {
    const auto ps = testutil::baseline();
    const SystemParams& p = ps.sys;
    const Mat4 M = build_drift_matrix(p);
    const PropagatorBasis b = eigendecompose(M);
    const double t = 1.0;
    const NoiseIntegrals n = noise_integrals(b, p, t);

    // N(t) = int_0^t A(tau)^T diag(g1 kT1, g2 kT2, 0, 0) A(tau) dtau with
    // A(tau) = exp(M tau / 2m); the implementation's scalars are its entries.
    const EffectiveTemps kt = effective_temps(p);
    Mat4 W = Mat4::Zero();
    W(0, 0) = p.gamma1 * kt.kT1;
    W(1, 1) = p.gamma2 * kt.kT2;
    const Mat4 N = testutil::simpson_matrix(
        [&](double tau) -> Mat4 {
            const Mat4 A = testutil::expm(M * (tau / (2.0 * p.m)));
            return A.transpose() * W * A;
        },
        0.0, t, 1e-12);

    auto close = [&](cplx got, double ref) {
        REQUIRE(std::abs(got.imag()) < 1e-10);
        REQUIRE(std::abs(got.real() - ref) < 1e-8 * std::max(1.0, std::abs(ref)));
    };
    close(n.chi_z[0], N(0, 0));
    close(n.chi_z[1], N(1, 1));
    close(n.chi_q[0], N(2, 2));
    close(n.chi_q[1], N(3, 3));
    close(n.theta_z, 2.0 * N(0, 1));
    close(n.theta_q, 2.0 * N(2, 3));
    close(n.Lambda[0][0], 2.0 * N(0, 2));
    close(n.Lambda[0][1], 2.0 * N(0, 3));
    close(n.Lambda[1][0], 2.0 * N(1, 2));
    close(n.Lambda[1][1], 2.0 * N(1, 3));

    // accumulated noise is a positive semidefinite form
    Eigen::SelfAdjointEigenSolver<Mat4> es(n.form_matrix().real());
    REQUIRE(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
}

TEST_CASE("noise integrals: series branch at vanishing time arguments") {
    // at t -> 0 the integrand has not rotated yet, so N(t)/t -> the bare
    // weight matrix; exercises the (e^x - 1)/x Taylor branch
    const auto ps = testutil::baseline();
    const PropagatorBasis b = eigendecompose(ps.sys);
    const EffectiveTemps kt = effective_temps(ps.sys);
    const double t = 1e-9;
    const NoiseIntegrals n = noise_integrals(b, ps.sys, t);
    REQUIRE(std::abs(n.chi_z[0].real() / t - ps.sys.gamma1 * kt.kT1) <
            1e-6 * ps.sys.gamma1 * kt.kT1);
    REQUIRE(std::abs(n.chi_z[1].real() / t - ps.sys.gamma2 * kt.kT2) <
            1e-6 * ps.sys.gamma2 * kt.kT2);
    REQUIRE(std::abs(n.chi_q[0]) / t < 1e-6);  // q noise builds up only at O(t^2)
}

TEST_CASE("noise integrals reject vanishing pairwise sums with nonzero weight") {
    // An undamped basis has conjugate pairs with lambda_i + lambda_j = 0;
    // feeding it damped-system weights makes those terms genuinely singular.
    SystemParams free = testutil::baseline().sys;
    free.gamma1 = free.gamma2 = 0.0;
    const PropagatorBasis b = eigendecompose(free);
    REQUIRE_THROWS_AS(noise_integrals(b, testutil::baseline().sys, 1.0), SingularNormalization);
}

TEST_CASE("solution coefficients reproduce the initial exponent at t = 0") {
    const auto ps = testutil::baseline();
    const InitialState st = ps.initial_state();  // s = 1, d = 6
    const Propagator prop(ps.sys, st);
    const SolutionCoefficients c = prop.coefficients(0.0);

    REQUIRE(std::abs(c.B1 - (0.5 + 1.0 / 288.0)) < 1e-12);  // eps+
    REQUIRE(std::abs(c.B2 - st.eps_plus) < 1e-12);
    REQUIRE(std::abs(c.A1 - st.eps_tilde_plus) < 1e-12 * st.eps_tilde_plus);
    REQUIRE(std::abs(c.A2 - st.eps_tilde_plus) < 1e-12 * st.eps_tilde_plus);
    REQUIRE(std::abs(c.E - 2.0 * st.eps_tilde_minus) < 1e-12 * std::abs(st.eps_tilde_minus));
    REQUIRE(std::abs(c.D - (-2.0 * st.eps_minus)) < 1e-12);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) REQUIRE(std::abs(c.C[i][j]) < 1e-12);
    REQUIRE(c.imag_residue < 1e-10);
}

TEST_CASE("solution coefficients become stationary at late times") {
    const auto ps = testutil::baseline();
    const Propagator prop(ps.sys, ps.initial_state());
    // 30 momentum-relaxation times m/gamma
    const double t = 30.0 * ps.sys.m / ps.sys.gamma1;
    const double h = 0.1;
    const SolutionCoefficients lo = prop.coefficients(t - h);
    const SolutionCoefficients hi = prop.coefficients(t + h);
    auto deriv = [&](double a, double b) { return std::abs(b - a) / (2.0 * h); };
    REQUIRE(deriv(lo.A1, hi.A1) < 1e-8);
    REQUIRE(deriv(lo.B1, hi.B1) < 1e-8);
    REQUIRE(deriv(lo.E, hi.E) < 1e-8);
    REQUIRE(deriv(lo.D, hi.D) < 1e-8);
    REQUIRE(deriv(lo.C[0][0], hi.C[0][0]) < 1e-8);
}

TEST_CASE("covariance: d^2 = s^2/4 gives zero x1-x2 correlation at t = 0") {
    auto ps = testutil::baseline();
    ps.s = 2.0;
    ps.d = 1.0;
    const Mat4 g = covariance_at(ps.initial_state(), ps.sys, 0.0);
    REQUIRE(std::abs(g(0, 2)) < 1e-12);
}

TEST_CASE("covariance matches the RK4 moment oracle") {
    const auto ps = testutil::baseline();
    const Propagator prop(ps.sys, ps.initial_state());
    const Mat4 g0 = initial_covariance(ps.initial_state());
    const MomentOde ode = build_moment_ode(ps.sys);
    const Mat4 ga = prop.covariance(10.0);
    const Mat4 gr = integrate_moments(g0, ode, 10.0, 0.002).gamma;
    REQUIRE(max_rel_dev(ga, gr) < 1e-6);
}

TEST_CASE("covariance regression grid against the oracle") {
    const qbm::ParamSet sets[] = {testutil::baseline(), testutil::baseline(1.0, 4.0), testutil::ness_reference(),
                                  testutil::entropy_reference(1.0)};
    for (const auto& ps : sets) {
        const Propagator prop(ps.sys, ps.initial_state());
        const Mat4 g0 = initial_covariance(ps.initial_state());
        const MomentOde ode = build_moment_ode(ps.sys);
        for (double t : {0.1, 1.0, 5.0, 20.0, 100.0}) {
            const Mat4 ga = prop.covariance(t);
            const Mat4 gr = integrate_moments(g0, ode, t, default_dt(ps.sys)).gamma;
            INFO("t = " << t);
            REQUIRE(max_rel_dev(ga, gr) < 1e-6);
            REQUIRE((ga - ga.transpose()).cwiseAbs().maxCoeff() <
                    1e-12 * ga.cwiseAbs().maxCoeff());
            for (int i = 0; i < 4; ++i) REQUIRE(ga(i, i) > 0.0);
        }
    }
}

TEST_CASE("covariance converges to the Lyapunov steady state") {
    const auto ps = testutil::baseline();
    const Propagator prop(ps.sys, ps.initial_state());
    const Mat4 gss = lyapunov_steady(ps.sys);
    const double t = 30.0 * ps.sys.m / ps.sys.gamma1;
    REQUIRE(max_rel_dev(prop.covariance(t), gss) < 1e-6);
}

TEST_CASE("label-swap covariance") {
    auto ps = testutil::baseline(1.0, 4.0);
    ps.sys.gamma1 = 0.01;
    ps.sys.gamma2 = 0.03;
    SystemParams swapped = ps.sys;
    std::swap(swapped.gamma1, swapped.gamma2);
    std::swap(swapped.T1, swapped.T2);
    Mat4 P = Mat4::Zero();  // modes 1 <-> 2 in [x1,p1,x2,p2]
    P(0, 2) = P(2, 0) = P(1, 3) = P(3, 1) = 1.0;
    const InitialState st = ps.initial_state();  // symmetric under 1 <-> 2
    for (double t : {0.7, 6.0, 42.0}) {
        const Mat4 a = covariance_at(st, swapped, t);
        const Mat4 b = P * covariance_at(st, ps.sys, t) * P.transpose();
        REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-9 * b.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("undamped evolution conserves the mean energy") {
    auto ps = testutil::baseline();
    ps.sys.gamma1 = ps.sys.gamma2 = 0.0;
    const Propagator prop(ps.sys, ps.initial_state());
    const double e0 = mean_energy(prop.covariance(0.0), ps.sys);
    for (double t : {0.5, 1.0, 5.0, 20.0, 100.0})
        REQUIRE(std::abs(mean_energy(prop.covariance(t), ps.sys) / e0 - 1.0) < 1e-8);
}

TEST_CASE("negative times are rejected for the solution") {
    const auto ps = testutil::baseline();
    const Propagator prop(ps.sys, ps.initial_state());
    REQUIRE_THROWS_AS(prop.coefficients(-1.0), InvalidParams);
}
