#include "catch_amalgamated.hpp"

#include <random>

#include "helpers.hpp"
#include "qbm/gaussian.hpp"
#include "qbm/model.hpp"
#include "qbm/propagator.hpp"

using namespace qbm;

TEST_CASE("effective temps: high-temperature regime is the identity") {
    SystemParams p;
    p.regime = Regime::HighTemperature;
    p.T1 = 1.0;
    p.T2 = 4.0;
    const EffectiveTemps kt = effective_temps(p);
    REQUIRE(kt.kT1 == 1.0);
    REQUIRE(kt.kT2 == 4.0);
}

TEST_CASE("effective temps: weak coupling coth weights") {
    SystemParams p;
    p.regime = Regime::WeakCoupling;
    p.omega0 = 1.0;

    SECTION("T = 0 gives the zero-point weight omega0/2") {
        p.T1 = 0.0;
        p.T2 = 0.0;
        const EffectiveTemps kt = effective_temps(p);
        REQUIRE(kt.kT1 == 0.5);
        p.omega0 = 2.0;
        REQUIRE(effective_temps(p).kT1 == 1.0);
    }

    SECTION("T = 100: (1/2) coth(1/200), arbitrary-precision reference") {
        p.T1 = 100.0;
        const double ref = 100.000833331944447751;  // (1/2) coth(1/200)
        REQUIRE(std::abs(effective_temps(p).kT1 / ref - 1.0) < 1e-14);
    }

    SECTION("bath-swap symmetry is exact") {
        p.T1 = 0.37;
        p.T2 = 5.11;
        p.gamma1 = 0.01;
        p.gamma2 = 0.2;
        SystemParams q = p;
        std::swap(q.T1, q.T2);
        std::swap(q.gamma1, q.gamma2);
        const EffectiveTemps a = effective_temps(p);
        const EffectiveTemps b = effective_temps(q);
        REQUIRE(a.kT1 == b.kT2);
        REQUIRE(a.kT2 == b.kT1);
    }
}

TEST_CASE("high-temperature regime below T/omega0 = 1 warns") {
    SystemParams p;
    p.T1 = 0.2;
    p.T2 = 4.0;
    REQUIRE(p.validity_warnings().size() == 1);
    p.regime = Regime::WeakCoupling;
    REQUIRE(p.validity_warnings().empty());
}

TEST_CASE("parameter validation") {
    SystemParams p;
    p.kappa = 1.2;  // m = omega0 = 1
    REQUIRE_THROWS_AS(p.validate(), UnstableSystem);
    p.kappa = -0.5;
    p.m = 0.0;
    REQUIRE_THROWS_AS(p.validate(), InvalidParams);
    REQUIRE_THROWS_AS(InitialState::from_widths(0.0, 1.0), InvalidParams);
}

TEST_CASE("epsilon coefficients of the initial state") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(0.3, 8.0);
    for (int k = 0; k < 50; ++k) {
        const InitialState st = InitialState::from_widths(u(rng), u(rng));
        REQUIRE(st.eps_plus > std::abs(st.eps_minus));
        // eps~+^2 - eps~-^2 = 1 / (16 (eps+^2 - eps-^2))
        const double lhs = st.eps_tilde_plus * st.eps_tilde_plus -
                           st.eps_tilde_minus * st.eps_tilde_minus;
        const double rhs =
            1.0 / (16.0 * (st.eps_plus * st.eps_plus - st.eps_minus * st.eps_minus));
        REQUIRE(std::abs(lhs / rhs - 1.0) < 1e-12);
    }
}

TEST_CASE("initial covariance: symmetric point d^2 = s^2/4 decorrelates positions") {
    const Mat4 g = initial_covariance(InitialState::from_widths(2.0, 1.0));
    REQUIRE(g(0, 2) == 0.0);        // <x1 x2> = 0
    REQUIRE(g(0, 0) == 4.0);        // 2 <x1^2> with <x1^2> = 2
    REQUIRE(g(0, 0) == g(2, 2));
}

TEST_CASE("initial covariance vs direct quadrature of |Psi|^2") {
    const double s = 1.0, d = 6.0;
    const auto mom = testutil::quadrature_position_moments(s, d);
    REQUIRE(std::abs(mom.xx - 36.25) < 1e-8 * 36.25);
    REQUIRE(std::abs(mom.x1x2 - 35.75) < 1e-8 * 35.75);
    const Mat4 g = initial_covariance(InitialState::from_widths(s, d));
    REQUIRE(std::abs(g(0, 0) - 2.0 * mom.xx) < 1e-8 * g(0, 0));
    REQUIRE(std::abs(g(0, 2) - 2.0 * mom.x1x2) < 1e-8 * g(0, 2));
}

TEST_CASE("initial state is pure for any widths") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> u(0.3, 10.0);
    for (int k = 0; k < 10; ++k) {
        const Mat4 g = initial_covariance(InitialState::from_widths(u(rng), u(rng)));
        const SymplecticSpectrum sp = symplectic_spectrum(g);
        REQUIRE(std::abs(sp.nu[0] - 1.0) < 1e-9);
        REQUIRE(std::abs(sp.nu[1] - 1.0) < 1e-9);
    }
}

TEST_CASE("initial covariance equals the t -> 0 propagator limit") {
    const auto ps = testutil::baseline();
    const Mat4 g0 = initial_covariance(ps.initial_state());
    const Mat4 gp = covariance_at(ps.initial_state(), ps.sys, 0.0);
    REQUIRE((g0 - gp).cwiseAbs().maxCoeff() < 1e-8 * g0.cwiseAbs().maxCoeff());
}
