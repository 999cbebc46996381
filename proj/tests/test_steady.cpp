// test_steady.cpp — asymptotic formulas and numerical steady states

#include <doctest.h>

#include <cmath>

#include "nsqed/rates.hpp"
#include "nsqed/spectrum.hpp"
#include "nsqed/steady.hpp"

using namespace nsqed;

TEST_CASE("resonant equal-rates asymptotics") {
    const auto lim = asymptotic_closed_form(AsymptoticRegime::ResonantEqualRates, 0.0, 1.0);
    CHECK(lim.mean_n_inf == doctest::Approx(15.0 / 23.0).epsilon(1e-12));
    CHECK(lim.p_e_inf == doctest::Approx(9.0 / 23.0).epsilon(1e-12));
    CHECK(lim.p_g0_inf == doctest::Approx(5.0 / 23.0).epsilon(1e-12));

    const auto damped = asymptotic_closed_form(AsymptoticRegime::ResonantEqualRates, 50.0, 1.0);
    CHECK(damped.mean_n_inf < 1e-3);
    CHECK(damped.p_g0_inf == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("AJC asymptotics and the kappa-zero variants") {
    const auto ajc = asymptotic_closed_form(AsymptoticRegime::AjcEqualRates, 0.0, 1.0);
    CHECK(ajc.mean_n_inf == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ajc.p_e_inf == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ajc.p_g0_inf == doctest::Approx(0.25).epsilon(1e-12));

    const auto rk0 = asymptotic_closed_form(AsymptoticRegime::ResonantKappaZero, 0.0, 1.0);
    CHECK(rk0.mean_n_inf == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(rk0.p_e_inf == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(rk0.p_g0_inf == doctest::Approx(0.25).epsilon(1e-12));

    const auto ak0 = asymptotic_closed_form(AsymptoticRegime::AjcKappaZero, 0.2, 1.0, 0.125);
    CHECK(ak0.mean_n_inf == doctest::Approx(1.0 / (1.0 + 0.015625 * 0.09)).epsilon(1e-12));
    CHECK(ak0.p_e_inf == doctest::Approx(6.0 * 0.015625 * ak0.mean_n_inf).epsilon(1e-12));
    CHECK_THROWS_AS((void)asymptotic_closed_form(AsymptoticRegime::AjcKappaZero, 0.2, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)asymptotic_closed_form(AsymptoticRegime::AjcEqualRates, 0.1, 0.0),
                    std::invalid_argument);
}

TEST_CASE("excitation measures decrease monotonically with gamma/theta") {
    for (auto regime : {AsymptoticRegime::ResonantEqualRates, AsymptoticRegime::ResonantKappaZero,
                        AsymptoticRegime::AjcEqualRates, AsymptoticRegime::AjcKappaZero}) {
        double last = 1e9;
        for (double r : {0.0, 0.05, 0.2, 0.5, 1.0, 3.0, 10.0}) {
            const auto a = asymptotic_closed_form(regime, r, 1.0, 0.125);
            CHECK(a.mean_n_inf < last);
            CHECK(a.mean_n_inf >= 0.0);
            CHECK(a.p_e_inf <= 1.0);
            CHECK(a.p_g0_inf <= 1.0 + 1e-12);
            last = a.mean_n_inf;
        }
    }
}

TEST_CASE("undriven decoupled system relaxes exactly to the joint ground state") {
    SystemParams p;
    p.Omega0 = 0.8;
    p.g0 = 0.0;
    p.kappa = 1e-3;
    p.gamma = 2e-3;
    p.gamma_phi = 1e-3;
    BasisSpec basis{4};
    const auto out = numerical_steady_state(p, basis, {});
    CHECK(out.method == "nullspace");
    CHECK(out.obs.p_g0 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(out.obs.mean_n) < 1e-8);
    check_density_matrix(out.rho);
}

TEST_CASE("counter-rotating terms leave only a virtual-photon residue") {
    // with g0 != 0 the vacuum is dark only up to O((g0/Delta_+)^2)
    BasisSpec basis{4};
    const auto ops = fock_operators(basis);
    SystemParams p;
    p.Omega0 = 0.9;
    p.g0 = 0.03;
    const Matrix H = hamiltonian_at(p, basis, 0.0).mat;
    const Matrix rho = steady_state_nullspace(H, {{0.01, ops.a.mat}, {0.02, ops.sigma_minus.mat}});
    const double scale = std::pow(p.g0 / p.delta_plus(), 2);
    CHECK(1.0 - rho(0, 0).real() < 10.0 * scale);
    CHECK(1.0 - rho(0, 0).real() > 0.0);
}

TEST_CASE("beat-averaged steady state approaches the resonant closed form") {
    SystemParams p;
    p.omega0 = 1.0;
    p.Omega0 = 1.0;
    p.g0 = 0.05;
    p.modulation_target = ModulationTarget::Omega;
    p.epsilon = 0.05;
    const auto spectrum = build_spectrum(p, 2);
    p.eta = spectrum.lambda_bar(2, Branch::Plus) - spectrum.lambda_bar(0, Branch::Plus);
    const double th = std::abs(theta_general(p, 2, Branch::Plus, Branch::Plus));
    const double r = 0.5;
    p.kappa = p.gamma = p.gamma_phi = r * th;

    BasisSpec basis{4};
    SteadyStateOptions opts;
    opts.beat_period = 2.0 * std::acos(-1.0) / th;
    opts.max_beats = 60;
    const auto out = numerical_steady_state(p, basis, opts);
    CHECK(out.method == "beat-average");
    const auto closed = asymptotic_closed_form(AsymptoticRegime::ResonantEqualRates, p.gamma, th);
    CHECK(std::abs(out.obs.mean_n - closed.mean_n_inf) / closed.mean_n_inf < 0.10);
    CHECK(std::abs(out.obs.p_e - closed.p_e_inf) / closed.p_e_inf < 0.10);
    CHECK(std::abs(out.obs.p_g0 - closed.p_g0_inf) / closed.p_g0_inf < 0.10);
}
