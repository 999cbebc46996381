// operators.hpp — Truncated qubit⊗Fock basis, operator algebra, states and expectations

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <utility>

#include "nsqed/params.hpp"

namespace nsqed {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Interleaved basis |g,0>,|e,0>,|g,1>,|e,1>,... so each Jaynes-Cummings pair
// (|g,n>,|e,n-1>) sits two slots apart. Ordering is part of the file contract.
struct BasisSpec {
    int n_max{15};

    int dim() const { return 2 * (n_max + 1); }

    // index <-> (excited?, photon number)
    static int index_of(bool excited, int photons) { return 2 * photons + (excited ? 1 : 0); }
    static bool excited_of(int index) { return (index & 1) != 0; }
    static int photons_of(int index) { return index / 2; }

    bool operator==(const BasisSpec& o) const { return n_max == o.n_max; }
    bool operator!=(const BasisSpec& o) const { return !(*this == o); }
};

struct Operator {
    BasisSpec basis;
    Matrix mat;
};

struct FockOperators {
    Operator a, a_dagger, n, sigma_minus, sigma_plus, sigma_z;
};

namespace detail {
inline void require_same_basis(const BasisSpec& a, const BasisSpec& b, const char* who) {
    if (a != b) throw std::invalid_argument(std::string(who) + ": basis mismatch");
}
} // namespace detail

// Ladder and qubit operators on the joint space.
// a|n> = sqrt(n)|n-1> on the Fock factor, sigma_- = |g><e| on the qubit factor.
inline FockOperators fock_operators(const BasisSpec& basis) {
    if (basis.n_max < 1) throw std::invalid_argument("fock_operators: n_max must be >= 1");
    const int D = basis.dim();
    Matrix a = Matrix::Zero(D, D);
    Matrix sm = Matrix::Zero(D, D);
    Matrix sz = Matrix::Zero(D, D);
    for (int n = 0; n <= basis.n_max; ++n) {
        for (int q = 0; q < 2; ++q) {
            const int i = BasisSpec::index_of(q == 1, n);
            if (n >= 1) a(BasisSpec::index_of(q == 1, n - 1), i) = std::sqrt(double(n));
            sz(i, i) = (q == 1) ? 1.0 : -1.0;
        }
        sm(BasisSpec::index_of(false, n), BasisSpec::index_of(true, n)) = 1.0;
    }
    FockOperators ops;
    ops.a = {basis, a};
    ops.a_dagger = {basis, a.adjoint()};
    ops.n = {basis, a.adjoint() * a};
    ops.sigma_minus = {basis, sm};
    ops.sigma_plus = {basis, sm.adjoint()};
    ops.sigma_z = {basis, sz};
    return ops;
}

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// Jaynes-Cummings Hamiltonian: omega0*n + Omega0|e><e| + g0(a sig+ + a† sig-).
inline Operator jc_hamiltonian(const SystemParams& p, const BasisSpec& basis) {
    const int D = basis.dim();
    Matrix h = Matrix::Zero(D, D);
    for (int n = 0; n <= basis.n_max; ++n) {
        h(BasisSpec::index_of(false, n), BasisSpec::index_of(false, n)) = p.omega0 * n;
        h(BasisSpec::index_of(true, n), BasisSpec::index_of(true, n)) = p.omega0 * n + p.Omega0;
        if (n >= 1) {
            const int ge = BasisSpec::index_of(false, n);
            const int en = BasisSpec::index_of(true, n - 1);
            h(ge, en) = p.g0 * std::sqrt(double(n));
            h(en, ge) = p.g0 * std::sqrt(double(n));
        }
    }
    return {basis, std::move(h)};
}

// Instantaneous modulated parameter values.
inline double omega_at(const SystemParams& p, double t) {
    return p.Omega0 + p.epsilon_for(ModulationTarget::Omega) * std::sin(p.eta * t);
}
inline double coupling_at(const SystemParams& p, double t) {
    return p.g0 + p.epsilon_for(ModulationTarget::Coupling) * std::sin(p.eta * t);
}

// Generalized Rabi Hamiltonian at time t:
//   H(t) = omega0 n + i chi0 (a†² - a²) + (Omega(t)/2) sigma_z + g(t)(a+a†)(sig+ + sig-).
inline Operator hamiltonian_at(const SystemParams& p, const BasisSpec& basis, double t) {
    p.validate();
    if (p.n_qubits != 1)
        throw std::invalid_argument("hamiltonian_at: only the single-qubit model is materialized");
    if (basis.n_max < 2) throw std::invalid_argument("hamiltonian_at: n_max must be >= 2");
    const int D = basis.dim();
    const double Om = omega_at(p, t);
    const double g = coupling_at(p, t);
    Matrix h = Matrix::Zero(D, D);
    for (int n = 0; n <= basis.n_max; ++n) {
        for (int q = 0; q < 2; ++q) {
            const int i = BasisSpec::index_of(q == 1, n);
            h(i, i) = p.omega0 * n + (q == 1 ? +0.5 : -0.5) * Om;
        }
        // i chi0 (a†² - a²): couples |q,n> <-> |q,n+2>
        if (n + 2 <= basis.n_max) {
            const double f = std::sqrt(double(n + 1)) * std::sqrt(double(n + 2));
            for (int q = 0; q < 2; ++q) {
                const int lo = BasisSpec::index_of(q == 1, n);
                const int hi = BasisSpec::index_of(q == 1, n + 2);
                h(hi, lo) += cplx(0.0, p.chi0 * f);  // i chi0 a†²
                h(lo, hi) += cplx(0.0, -p.chi0 * f); // -i chi0 a²
            }
        }
        // g(t)(a+a†)(sig+ + sig-): |g,n> <-> |e,n-1> and |e,n> <-> |g,n+1> blocks
        if (n >= 1) {
            const double f = g * std::sqrt(double(n));
            const int ge = BasisSpec::index_of(false, n);
            const int en = BasisSpec::index_of(true, n - 1);
            h(ge, en) += f;
            h(en, ge) += f;
            const int ee = BasisSpec::index_of(true, n);
            const int gn = BasisSpec::index_of(false, n - 1);
            h(ee, gn) += f;
            h(gn, ee) += f;
        }
    }
    return {basis, std::move(h)};
}

// ------------------------------ States ------------------------------

struct QuantumState {
    BasisSpec basis;
    Vector amps;

    double norm() const { return amps.norm(); }
    void renormalize() { amps /= amps.norm(); }
};

struct DensityMatrix {
    BasisSpec basis;
    Matrix rho;

    double trace() const { return rho.trace().real(); }
    void symmetrize() { rho = 0.5 * (rho + rho.adjoint().eval()); }
};

inline QuantumState basis_state(const BasisSpec& basis, bool excited, int photons) {
    if (photons < 0 || photons > basis.n_max)
        throw std::invalid_argument("basis_state: photon number out of range");
    Vector v = Vector::Zero(basis.dim());
    v(BasisSpec::index_of(excited, photons)) = 1.0;
    return {basis, std::move(v)};
}

inline QuantumState ground_state(const BasisSpec& basis) { return basis_state(basis, false, 0); }

inline DensityMatrix pure_density(const QuantumState& psi) {
    Vector v = psi.amps / psi.amps.norm();
    return {psi.basis, v * v.adjoint()};
}

inline cplx expectation(const QuantumState& psi, const Operator& op) {
    detail::require_same_basis(psi.basis, op.basis, "expectation");
    return psi.amps.dot(op.mat * psi.amps); // Eigen's dot conjugates the left argument
}

inline cplx expectation(const DensityMatrix& rho, const Operator& op) {
    detail::require_same_basis(rho.basis, op.basis, "expectation");
    return (op.mat * rho.rho).trace();
}

// Density-matrix sanity: trace 1, Hermitian, eigenvalues >= -tol.
inline void check_density_matrix(const DensityMatrix& dm,
                                 double trace_tol = 1e-8,
                                 double herm_tol = 1e-10,
                                 double eig_tol = 1e-8) {
    if (std::abs(dm.trace() - 1.0) > trace_tol)
        throw std::invalid_argument("check_density_matrix: trace differs from 1");
    if (!is_hermitian(dm.rho, herm_tol))
        throw std::invalid_argument("check_density_matrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(dm.rho);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("check_density_matrix: eigensolve failed");
    if (es.eigenvalues().minCoeff() < -eig_tol)
        throw std::invalid_argument("check_density_matrix: negative eigenvalue");
}

} // namespace nsqed
