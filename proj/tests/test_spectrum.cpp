// test_spectrum.cpp — dressed spectrum, matrix elements, intrinsic shifts.
// Dense diagonalization and explicit operator contraction act as oracles.

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nsqed/operators.hpp"
#include "nsqed/spectrum.hpp"

using namespace nsqed;

namespace {

SystemParams resonant_params(double g0 = 0.05, double chi0 = 0.0) {
    SystemParams p;
    p.omega0 = 1.0;
    p.Omega0 = 1.0;
    p.g0 = g0;
    p.chi0 = chi0;
    return p;
}

SystemParams dispersive_params(double g0 = 0.05) {
    SystemParams p;
    p.omega0 = 1.0;
    p.g0 = g0;
    p.Omega0 = 1.0 - 8.0 * g0; // Delta_- = 8 g0
    return p;
}

// V = H0(eps=0) - H_JC + (Omega0/2) I: counter-rotating plus squeezing terms.
Matrix perturbation_matrix(const SystemParams& p, const BasisSpec& basis) {
    SystemParams p0 = p;
    p0.epsilon = 0.0;
    p0.modulation_target = ModulationTarget::None;
    Matrix v = hamiltonian_at(p0, basis, 0.0).mat - jc_hamiltonian(p0, basis).mat;
    v += 0.5 * p.Omega0 * Matrix::Identity(basis.dim(), basis.dim());
    return v;
}

} // namespace

TEST_CASE("eigenfrequencies match the closed form") {
    SystemParams p = resonant_params();
    CHECK(eigenfrequency(p, 0, Branch::Plus) == 0.0);
    CHECK(eigenfrequency(p, 1, Branch::Plus) == doctest::Approx(1.05).epsilon(1e-14));

    SystemParams pd;
    pd.Omega0 = 0.6;
    pd.g0 = 0.05;
    CHECK(eigenfrequency(pd, 1, Branch::Plus) ==
          doctest::Approx(1.0 + (std::sqrt(0.17) - 0.4) / 2.0).epsilon(1e-14));
}

TEST_CASE("closed-form spectrum equals dense JC diagonalization") {
    BasisSpec basis{12};
    for (double dm : {0.0, 0.4}) {
        SystemParams p = resonant_params();
        p.Omega0 = 1.0 - dm;
        const auto h = jc_hamiltonian(p, basis);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
        std::vector<double> closed;
        closed.push_back(0.0);
        for (int m = 1; m <= 10; ++m)
            for (Branch S : kBranches) closed.push_back(eigenfrequency(p, m, S));
        std::sort(closed.begin(), closed.end());
        for (std::size_t i = 0; i < closed.size(); ++i)
            CHECK(std::abs(es.eigenvalues()(i) - closed[i]) < 1e-10);
    }
}

TEST_CASE("dressed states are JC eigenpairs and orthonormal") {
    BasisSpec basis{10};
    for (double Om : {1.0, 0.6, 1.35}) {
        SystemParams p = resonant_params();
        p.Omega0 = Om;
        const auto h = jc_hamiltonian(p, basis);
        std::vector<QuantumState> states;
        states.push_back(dressed_state(p, basis, 0, Branch::Plus));
        for (int m = 1; m <= 8; ++m) {
            for (Branch S : kBranches) {
                const auto phi = dressed_state(p, basis, m, S);
                const double lam = eigenfrequency(p, m, S);
                CHECK((h.mat * phi.amps - lam * phi.amps).cwiseAbs().maxCoeff() < 1e-10);
                states.push_back(phi);
            }
        }
        for (std::size_t i = 0; i < states.size(); ++i)
            for (std::size_t j = 0; j < states.size(); ++j) {
                const cplx g = states[i].amps.dot(states[j].amps);
                CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-10);
            }
    }
}

TEST_CASE("resonant mixing angle is pi/4") {
    SystemParams p = resonant_params();
    CHECK(mixing_angle(p, 1) == doctest::Approx(std::acos(-1.0) / 4.0).epsilon(1e-14));
    const auto [s, c] = dressed_amplitudes(p, 3, Branch::Plus);
    CHECK(s == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s * s + c * c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dressed state decouples in the weak-coupling limit") {
    SystemParams p;
    p.Omega0 = 0.6;
    p.g0 = 1e-7;
    BasisSpec basis{6};
    const auto phi = dressed_state(p, basis, 2, Branch::Plus);
    CHECK(std::abs(phi.amps(BasisSpec::index_of(false, 2))) == doctest::Approx(1.0).epsilon(1e-6));
    // dressed mean photon number on resonance: <phi_{1,+}|n|phi_{1,+}> = 1/2
    SystemParams pr = resonant_params();
    const auto ops = fock_operators(basis);
    const auto d1 = dressed_state(pr, basis, 1, Branch::Plus);
    CHECK(expectation(d1, ops.n).real() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("degenerate manifold is rejected") {
    SystemParams p;
    p.g0 = 0.0;
    p.Omega0 = 1.0; // Delta_- = 0 and g0 = 0
    CHECK_THROWS_AS((void)mixing_angle(p, 1), DegeneracyError);
}

TEST_CASE("Pi elements: closed values and operator-contraction oracle") {
    BasisSpec basis{8};
    SystemParams p = resonant_params();
    p.modulation_target = ModulationTarget::Omega;
    p.epsilon = 0.03;

    CHECK(pi_element(p, ModulationTarget::Omega, 1, Branch::Plus, Branch::Minus) ==
          doctest::Approx(-p.epsilon / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)pi_element(p, ModulationTarget::Omega, 0, Branch::Plus, Branch::Plus),
                    std::invalid_argument);

    SystemParams pg = resonant_params();
    pg.modulation_target = ModulationTarget::Coupling;
    pg.epsilon = 0.004;
    for (int m : {1, 2, 5}) {
        for (Branch S : kBranches) {
            CHECK(pi_element(pg, ModulationTarget::Coupling, m, S, S) ==
                  doctest::Approx(sign_of(S) * pg.epsilon * std::sqrt(double(m))).epsilon(1e-12));
            CHECK(std::abs(pi_element(pg, ModulationTarget::Coupling, m, S, other(S))) < 1e-15);
        }
    }

    // dispersive regime: explicit matrix evaluation oracle
    SystemParams pd = dispersive_params();
    pd.modulation_target = ModulationTarget::Omega;
    pd.epsilon = 0.03;
    const auto ops = fock_operators(basis);
    Matrix pee = Matrix::Zero(basis.dim(), basis.dim());
    for (int i = 0; i < basis.dim(); ++i)
        if (BasisSpec::excited_of(i)) pee(i, i) = 1.0;
    Matrix ag = ops.a.mat * ops.sigma_plus.mat + ops.a_dagger.mat * ops.sigma_minus.mat;
    for (int m : {1, 2, 4}) {
        for (Branch T : kBranches) {
            for (Branch S : kBranches) {
                const auto phiT = dressed_state(pd, basis, m, T);
                const auto phiS = dressed_state(pd, basis, m, S);
                const cplx omega_oracle = pd.epsilon * phiT.amps.dot(pee * phiS.amps);
                CHECK(pi_element(pd, ModulationTarget::Omega, m, T, S) ==
                      doctest::Approx(omega_oracle.real()).epsilon(1e-12));
                SystemParams pdg = pd;
                pdg.modulation_target = ModulationTarget::Coupling;
                pdg.epsilon = 0.002;
                const cplx g_oracle = pdg.epsilon * phiT.amps.dot(ag * phiS.amps);
                CHECK(pi_element(pdg, ModulationTarget::Coupling, m, T, S) ==
                      doctest::Approx(g_oracle.real()).epsilon(1e-12));
            }
        }
    }

    // symmetry in (T,S)
    for (int m : {1, 3})
        for (Branch T : kBranches)
            for (Branch S : kBranches)
                CHECK(pi_element(pd, ModulationTarget::Omega, m, T, S) ==
                      doctest::Approx(pi_element(pd, ModulationTarget::Omega, m, S, T)).epsilon(1e-13));
}

TEST_CASE("Lambda and L elements against explicit contraction") {
    BasisSpec basis{10};
    SystemParams p = dispersive_params();
    p.chi0 = 0.01;
    const auto ops = fock_operators(basis);
    const Matrix a_sm = ops.a.mat * ops.sigma_minus.mat;
    const Matrix a2 = ops.a.mat * ops.a.mat;
    for (int pu : {2, 3, 5}) {
        for (Branch T : kBranches) {
            for (Branch S : kBranches) {
                const auto lo = dressed_state(p, basis, pu - 2, T);
                const auto hi = dressed_state(p, basis, pu, S);
                const cplx lam_oracle = lo.amps.dot(a_sm * hi.amps);
                const cplx l_oracle = lo.amps.dot(a2 * hi.amps);
                CHECK(lambda_element(p, pu, T, S) ==
                      doctest::Approx(lam_oracle.real()).epsilon(1e-12));
                CHECK(l_element(p, pu, T, S) == doctest::Approx(l_oracle.real()).epsilon(1e-12));
                const cplx lb = lambda_bar_element(p, pu, T, S);
                CHECK(lb.real() == doctest::Approx(lam_oracle.real()).epsilon(1e-12));
                CHECK(lb.imag() ==
                      doctest::Approx(-(p.chi0 / p.g0) * l_oracle.real()).epsilon(1e-12));
            }
        }
    }
    // Lambda_{2,.,S} = c_{2,S} on the ground column
    SystemParams pr = resonant_params();
    for (Branch S : kBranches) {
        const auto [s2, c2] = dressed_amplitudes(pr, 2, S);
        (void)s2;
        CHECK(lambda_element(pr, 2, Branch::Plus, S) == doctest::Approx(c2).epsilon(1e-13));
    }
    // decoupling limit: Lambda -> 0, L -> sqrt((m+1)(m+2)) on the D branch
    SystemParams pw = dispersive_params();
    pw.g0 = 1e-8;
    pw.Omega0 = 0.6;
    for (int pu : {2, 4}) {
        CHECK(std::abs(lambda_element(pw, pu, Branch::Plus, Branch::Plus)) < 1e-6);
        CHECK(l_element(pw, pu, Branch::Plus, Branch::Plus) ==
              doctest::Approx(std::sqrt(double((pu - 1) * pu))).epsilon(1e-6));
    }
    CHECK_THROWS_AS((void)lambda_bar_element(SystemParams{1.0, 0.6, 0.0, 0.02}, 2, Branch::Plus,
                                             Branch::Plus),
                    DegeneracyError);
}

TEST_CASE("nu shifts vanish without counter-rotating terms") {
    SystemParams p;
    p.Omega0 = 0.8;
    p.g0 = 0.0;
    p.chi0 = 0.0;
    CHECK(nu_shift(p, 0, Branch::Plus) == 0.0);
    CHECK(nu_shift(p, 3, Branch::Minus) == 0.0);
    CHECK(corrected_eigenfrequency(p, 2, Branch::Plus) ==
          doctest::Approx(eigenfrequency(p, 2, Branch::Plus)));
}

TEST_CASE("nu_0 matches its explicit branch sum") {
    SystemParams p = resonant_params(0.05, 0.012);
    double expect = 0.0;
    for (Branch S : kBranches) {
        const auto [s2, c2] = dressed_amplitudes(p, 2, S);
        expect -= (c2 * c2 * p.g0 * p.g0 + 2.0 * s2 * s2 * p.chi0 * p.chi0) /
                  eigenfrequency(p, 2, S);
    }
    CHECK(nu_shift(p, 0, Branch::Plus) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("nu equals second-order perturbation theory on the Rabi matrix") {
    BasisSpec basis{14};
    for (bool disp : {false, true}) {
        SystemParams p = disp ? dispersive_params() : resonant_params(0.05, 0.008);
        p.chi0 = 0.008;
        const Matrix v = perturbation_matrix(p, basis);
        for (int m = 0; m <= 4; ++m) {
            for (Branch T : kBranches) {
                const auto target = dressed_state(p, basis, m, T);
                const double lam_t = eigenfrequency(p, m, T);
                double pt2 = 0.0;
                for (int q = 0; q <= basis.n_max - 2; ++q) {
                    for (Branch Sq : kBranches) {
                        if (q == m) continue; // V only connects m to m±2 anyway
                        const auto inter = dressed_state(p, basis, q, Sq);
                        const cplx me = inter.amps.dot(v * target.amps);
                        if (std::abs(me) < 1e-300) continue;
                        pt2 += std::norm(me) / (lam_t - eigenfrequency(p, q, Sq));
                        if (q == 0) break;
                    }
                }
                CHECK(nu_shift(p, m, T) == doctest::Approx(pt2).epsilon(1e-10));
                if (m == 0) break;
            }
        }
    }
}

TEST_CASE("corrected eigenfrequencies track exact Rabi eigenvalues to fourth order") {
    BasisSpec basis{16};
    SystemParams p = resonant_params(0.02, 0.004);
    p.Omega0 = 0.75; // keep manifolds well separated
    SystemParams p0 = p;
    p0.epsilon = 0.0;
    const auto h = hamiltonian_at(p0, basis, 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
    std::vector<double> corrected;
    corrected.push_back(corrected_eigenfrequency(p, 0, Branch::Plus));
    for (int m = 1; m <= 4; ++m)
        for (Branch S : kBranches) corrected.push_back(corrected_eigenfrequency(p, m, S));
    std::sort(corrected.begin(), corrected.end());
    // exact spectrum is shifted by the constant -Omega0/2 relative to the JC ledger
    for (std::size_t i = 0; i < corrected.size(); ++i) {
        const double exact = es.eigenvalues()(i) + 0.5 * p.Omega0;
        CHECK(std::abs(exact - corrected[i]) < 5e-6);
    }
}

TEST_CASE("resonant corrected eigenfrequencies match the closed expansion") {
    SystemParams p = resonant_params(0.05, 0.01);
    const double dp = p.small_delta_plus();
    const double dchi = p.delta_chi();
    CHECK(corrected_eigenfrequency(p, 0, Branch::Plus) ==
          doctest::Approx(-(dp + 0.5 * dchi)).epsilon(2e-3));
    for (int m = 1; m <= 3; ++m) {
        for (Branch S : kBranches) {
            const double closed = p.omega0 * m + sign_of(S) * p.g0 * std::sqrt(double(m)) -
                                  (dp + m * dchi);
            CHECK(std::abs(corrected_eigenfrequency(p, m, S) - closed) < 3e-4);
        }
    }
}

TEST_CASE("dispersive ladder reduces to the delta/Kerr expansion") {
    SystemParams p = dispersive_params();
    const int D = p.detuning_symbol();
    const Branch bD = D > 0 ? Branch::Plus : Branch::Minus;
    const double alpha = p.kerr_alpha();
    const double expect = p.omega0 + p.small_delta_minus() - p.small_delta_plus() -
                          p.delta_chi() - alpha;
    const double got =
        corrected_eigenfrequency(p, 1, bD) - corrected_eigenfrequency(p, 0, Branch::Plus);
    CHECK(std::abs(got - expect) < 5.0 * alpha);
}

TEST_CASE("spectrum table is internally consistent") {
    SystemParams p = dispersive_params();
    const auto table = build_spectrum(p, 6);
    CHECK(table.levels.size() == 13);
    for (int m = 1; m <= 6; ++m) {
        const auto& up = table.level(m, Branch::Plus);
        const auto& dn = table.level(m, Branch::Minus);
        CHECK(up.lambda - dn.lambda == doctest::Approx(beta_m(p, m)).epsilon(1e-12));
        CHECK(up.s * up.s + up.c * up.c == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(up.lambda_bar == doctest::Approx(up.lambda + up.nu).epsilon(1e-12));
    }
}

TEST_CASE("validity report flags strong-coupling violations") {
    SystemParams p = resonant_params();
    p.modulation_target = ModulationTarget::Omega;
    p.epsilon = 0.05; // eps/Omega0 = 5e-2
    auto rep = validity_check(p, 3);
    CHECK(rep.all_pass());

    SystemParams bad = p;
    bad.g0 = 1.0;
    auto rep2 = validity_check(bad, 3);
    CHECK_FALSE(rep2.all_pass());

    SystemParams quiet;
    quiet.Omega0 = 0.9;
    auto rep3 = validity_check(quiet, 4);
    for (const auto& item : rep3.items) CHECK(item.ratio == 0.0);
}
