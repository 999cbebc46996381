// dynamics.hpp — Exact Schrödinger and Lindblad evolution under the modulated
// Rabi Hamiltonian with the zero-temperature dissipative kernel.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "nsqed/ode.hpp"
#include "nsqed/operators.hpp"

namespace nsqed {

enum class Frame { Lab, Interaction };

struct EvolveOptions {
    double rtol{1e-10};
    double atol{1e-13};
    int samples{2000};
    Frame frame{Frame::Lab};
    double truncation_tol{1e-6}; // top Fock population triggering an error
    bool store_states{false};
};

struct Observables {
    double mean_n{0.0};
    double p_e{0.0};
    double p_g0{0.0};
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> mean_n;
    std::vector<double> p_e;
    std::vector<double> p_g0;
    std::vector<Vector> states;      // optional wavefunction snapshots
    std::vector<Matrix> rho_states;  // optional density-matrix snapshots
    OdeStats stats;
};

inline Observables observables(const QuantumState& psi, const BasisSpec& basis) {
    detail::require_same_basis(psi.basis, basis, "observables");
    Observables o;
    for (int i = 0; i < basis.dim(); ++i) {
        const double w = std::norm(psi.amps(i));
        o.mean_n += w * BasisSpec::photons_of(i);
        if (BasisSpec::excited_of(i)) o.p_e += w;
    }
    o.p_g0 = std::norm(psi.amps(BasisSpec::index_of(false, 0)));
    return o;
}

inline Observables observables(const DensityMatrix& rho, const BasisSpec& basis) {
    detail::require_same_basis(rho.basis, basis, "observables");
    Observables o;
    for (int i = 0; i < basis.dim(); ++i) {
        const double w = rho.rho(i, i).real();
        o.mean_n += w * BasisSpec::photons_of(i);
        if (BasisSpec::excited_of(i)) o.p_e += w;
    }
    o.p_g0 = rho.rho(0, 0).real();
    return o;
}

namespace detail {

// Split H(t) = Hc + sin(eta t) Hm; the interaction frame rotates at the
// diagonal part Hd = omega0 n + Omega0 |e><e| (observables are Hd-diagonal,
// so both frames report identical time series).
struct HamiltonianParts {
    Matrix Hc, Hm;
    Eigen::VectorXd diag; // Hd energies per basis index
    double eta;
};

inline HamiltonianParts split_hamiltonian(const SystemParams& p, const BasisSpec& basis) {
    HamiltonianParts parts;
    SystemParams p0 = p;
    p0.epsilon = 0.0;
    parts.Hc = hamiltonian_at(p0, basis, 0.0).mat;
    const int D = basis.dim();
    parts.Hm = Matrix::Zero(D, D);
    if (p.modulation_target == ModulationTarget::Omega && p.epsilon != 0.0) {
        for (int i = 0; i < D; ++i)
            parts.Hm(i, i) = (BasisSpec::excited_of(i) ? +0.5 : -0.5) * p.epsilon;
    } else if (p.modulation_target == ModulationTarget::Coupling && p.epsilon != 0.0) {
        for (int n = 1; n <= basis.n_max; ++n) {
            const double f = p.epsilon * std::sqrt(double(n));
            const int ge = BasisSpec::index_of(false, n), en = BasisSpec::index_of(true, n - 1);
            parts.Hm(ge, en) += f;
            parts.Hm(en, ge) += f;
            const int ee = BasisSpec::index_of(true, n), gn = BasisSpec::index_of(false, n - 1);
            parts.Hm(ee, gn) += f;
            parts.Hm(gn, ee) += f;
        }
    }
    parts.eta = p.eta;
    // The frame diagonal is the full unmodulated diagonal, so the rotating-frame
    // generator keeps only small modulated and off-diagonal pieces.
    parts.diag.resize(D);
    for (int i = 0; i < D; ++i) parts.diag(i) = parts.Hc(i, i).real();
    return parts;
}

// Phase vector u_i = exp(+i E_i t) for the interaction-frame transform.
inline Vector frame_phases(const Eigen::VectorXd& diag, double t) {
    Vector u(diag.size());
    for (int i = 0; i < diag.size(); ++i) u(i) = std::exp(cplx(0.0, diag(i) * t));
    return u;
}

} // namespace detail

// --------------------------- Schrödinger evolution ---------------------------

inline TimeSeries evolve_schrodinger(const SystemParams& p, const BasisSpec& basis,
                                     const QuantumState& psi0, double t0, double t1,
                                     const EvolveOptions& opts = {}) {
    p.validate();
    detail::require_same_basis(psi0.basis, basis, "evolve_schrodinger");
    if (std::abs(psi0.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("evolve_schrodinger: initial state not normalized");

    const auto parts = detail::split_hamiltonian(p, basis);
    const bool lab = (opts.frame == Frame::Lab);
    const int D = basis.dim();

    auto rhs = [&](double t, const Vector& y) -> Vector {
        const double s = std::sin(parts.eta * t);
        if (lab) return cplx(0.0, -1.0) * (parts.Hc * y + s * (parts.Hm * y));
        // interaction frame: H_I = U† (H - Hd) U with U = exp(-i Hd t)
        const Vector u = detail::frame_phases(parts.diag, t);
        Vector y_lab = u.conjugate().cwiseProduct(y); // back to lab amplitudes
        Vector hy = parts.Hc * y_lab + s * (parts.Hm * y_lab);
        for (int i = 0; i < D; ++i) hy(i) -= parts.diag(i) * y_lab(i);
        return cplx(0.0, -1.0) * u.cwiseProduct(hy);
    };

    TimeSeries ts;
    std::vector<double> sample_times(opts.samples);
    for (int i = 0; i < opts.samples; ++i)
        sample_times[i] = t0 + (t1 - t0) * double(i) / double(opts.samples - 1);

    Vector y = psi0.amps;
    if (!lab) y = detail::frame_phases(parts.diag, t0).cwiseProduct(y);

    OdeOptions oopts;
    oopts.rtol = opts.rtol;
    oopts.atol = opts.atol;
    ts.stats = integrate_dopri5(rhs, y, t0, sample_times, oopts, [&](double t, Vector& yv) {
        const double drift = std::abs(yv.norm() - 1.0);
        if (drift > 1e-8)
            throw SolverError("evolve_schrodinger: norm drift " + std::to_string(drift) +
                              " exceeds 1e-8; tighten rtol");
        yv /= yv.norm();
        Vector psi_lab = lab ? yv : Vector(detail::frame_phases(parts.diag, t).conjugate().cwiseProduct(yv));
        const double top = std::norm(psi_lab(BasisSpec::index_of(false, basis.n_max))) +
                           std::norm(psi_lab(BasisSpec::index_of(true, basis.n_max)));
        if (top > opts.truncation_tol)
            throw TruncationError("evolve_schrodinger: top Fock population " + std::to_string(top),
                                  basis.n_max + 5);
        QuantumState snap{basis, psi_lab};
        const Observables o = observables(snap, basis);
        ts.t.push_back(t);
        ts.mean_n.push_back(o.mean_n);
        ts.p_e.push_back(o.p_e);
        ts.p_g0.push_back(o.p_g0);
        if (opts.store_states) ts.states.push_back(psi_lab);
    });
    return ts;
}

// ----------------------------- Lindblad evolution ----------------------------

namespace detail {

// Workspace for d rho/dt = M(t) rho + rho M(t)† + kappa a rho a† + gamma s- rho s+
// + (gamma_phi/2) sz rho sz, with M(t) = -iH(t) - (kappa/2)n - (gamma/2)|e><e|
// - (gamma_phi/4). The jump terms use the interleaved-layout structure; the
// dense-operator route is kept in tests as the reference.
struct LindbladWorkspace {
    HamiltonianParts parts;
    Matrix M0;     // constant part of M(t)
    Matrix Mm;     // -i Hm (modulated part)
    BasisSpec basis;
    SystemParams params;
    bool interaction{false};
    Eigen::VectorXd sqrt_n; // sqrt(n) lookup

    LindbladWorkspace(const SystemParams& p, const BasisSpec& b, Frame frame)
        : parts(split_hamiltonian(p, b)), basis(b), params(p),
          interaction(frame == Frame::Interaction) {
        const int D = b.dim();
        Matrix damp = Matrix::Zero(D, D);
        for (int i = 0; i < D; ++i) {
            double d = 0.5 * p.kappa * BasisSpec::photons_of(i) + 0.25 * p.gamma_phi;
            if (BasisSpec::excited_of(i)) d += 0.5 * p.gamma;
            damp(i, i) = d;
        }
        M0 = cplx(0.0, -1.0) * parts.Hc - damp;
        Mm = cplx(0.0, -1.0) * parts.Hm;
        sqrt_n.resize(b.n_max + 2);
        for (int n = 0; n <= b.n_max + 1; ++n) sqrt_n(n) = std::sqrt(double(n));
    }

    // kappa (a rho a†): photon-shifted block (frame phases cancel for all jumps)
    void add_jumps(const Matrix& rho, Matrix& out) const {
        const int D = basis.dim();
        const double kap = params.kappa, gam = params.gamma, gph = params.gamma_phi;
        if (kap != 0.0) {
            for (int i = 0; i + 2 < D; ++i) {
                const double fi = sqrt_n(BasisSpec::photons_of(i) + 1);
                for (int j = 0; j + 2 < D; ++j)
                    out(i, j) += kap * fi * sqrt_n(BasisSpec::photons_of(j) + 1) * rho(i + 2, j + 2);
            }
        }
        if (gam != 0.0) {
            for (int i = 0; i < D; i += 2)
                for (int j = 0; j < D; j += 2) out(i, j) += gam * rho(i + 1, j + 1);
        }
        if (gph != 0.0) {
            for (int i = 0; i < D; ++i) {
                const double zi = BasisSpec::excited_of(i) ? 1.0 : -1.0;
                for (int j = 0; j < D; ++j) {
                    const double zj = BasisSpec::excited_of(j) ? 1.0 : -1.0;
                    out(i, j) += 0.5 * gph * zi * zj * rho(i, j);
                }
            }
        }
    }

    Matrix rhs(double t, const Matrix& rho) const {
        const double s = std::sin(parts.eta * t);
        Matrix out;
        if (!interaction) {
            const Matrix M = M0 + s * Mm;
            out = M * rho + rho * M.adjoint();
            add_jumps(rho, out);
        } else {
            const Vector u = frame_phases(parts.diag, t);
            // rho_lab = U rho_I U† with U = exp(-i Hd t) = diag(conj(u))
            Matrix rho_lab = rho;
            const int D = basis.dim();
            for (int i = 0; i < D; ++i)
                for (int j = 0; j < D; ++j) rho_lab(i, j) *= std::conj(u(i)) * u(j);
            Matrix M = M0 + s * Mm;
            for (int i = 0; i < D; ++i) M(i, i) += cplx(0.0, parts.diag(i));
            Matrix d_lab = M * rho_lab + rho_lab * M.adjoint();
            add_jumps(rho_lab, d_lab);
            out = d_lab;
            for (int i = 0; i < D; ++i)
                for (int j = 0; j < D; ++j) out(i, j) *= u(i) * std::conj(u(j));
        }
        return out;
    }
};

} // namespace detail

inline TimeSeries evolve_lindblad(const SystemParams& p, const BasisSpec& basis,
                                  const DensityMatrix& rho0, double t0, double t1,
                                  const EvolveOptions& opts = {}) {
    p.validate();
    detail::require_same_basis(rho0.basis, basis, "evolve_lindblad");
    check_density_matrix(rho0);

    detail::LindbladWorkspace ws(p, basis, opts.frame);
    const bool lab = (opts.frame == Frame::Lab);
    const int D = basis.dim();

    auto rhs = [&](double t, const Matrix& r) { return ws.rhs(t, r); };

    TimeSeries ts;
    std::vector<double> sample_times(opts.samples);
    for (int i = 0; i < opts.samples; ++i)
        sample_times[i] = t0 + (t1 - t0) * double(i) / double(opts.samples - 1);

    Matrix y = rho0.rho;
    if (!lab) {
        const Vector u = detail::frame_phases(ws.parts.diag, t0);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) y(i, j) *= u(i) * std::conj(u(j));
    }

    OdeOptions oopts;
    oopts.rtol = opts.rtol;
    oopts.atol = opts.atol;
    ts.stats = integrate_dopri5(rhs, y, t0, sample_times, oopts, [&](double t, Matrix& rv) {
        rv = 0.5 * (rv + rv.adjoint().eval()); // enforce Hermiticity at output steps
        const double tr = rv.trace().real();
        if (std::abs(tr - 1.0) > 1e-8)
            throw SolverError("evolve_lindblad: trace drift " + std::to_string(tr - 1.0) +
                              " exceeds 1e-8; tighten rtol");
        rv /= tr;
        // diagonal entries are frame-invariant; only snapshots need de-rotation
        const double top = rv(BasisSpec::index_of(false, basis.n_max),
                              BasisSpec::index_of(false, basis.n_max)).real() +
                           rv(BasisSpec::index_of(true, basis.n_max),
                              BasisSpec::index_of(true, basis.n_max)).real();
        if (top > opts.truncation_tol)
            throw TruncationError("evolve_lindblad: top Fock population " + std::to_string(top),
                                  basis.n_max + 5);
        Observables o;
        for (int i = 0; i < D; ++i) {
            const double w = rv(i, i).real();
            o.mean_n += w * BasisSpec::photons_of(i);
            if (BasisSpec::excited_of(i)) o.p_e += w;
        }
        o.p_g0 = rv(0, 0).real();
        ts.t.push_back(t);
        ts.mean_n.push_back(o.mean_n);
        ts.p_e.push_back(o.p_e);
        ts.p_g0.push_back(o.p_g0);
        if (opts.store_states) {
            Matrix lab_rho = rv;
            if (!lab) {
                const Vector u = detail::frame_phases(ws.parts.diag, t);
                for (int i = 0; i < D; ++i)
                    for (int j = 0; j < D; ++j) lab_rho(i, j) *= std::conj(u(i)) * u(j);
            }
            ts.rho_states.push_back(std::move(lab_rho));
        }
    });
    return ts;
}

// Dense-superoperator reference for the structured Lindblad right-hand side;
// used by tests to pin the fast path.
inline Matrix lindblad_rhs_dense(const SystemParams& p, const BasisSpec& basis, double t,
                                 const Matrix& rho) {
    const auto ops = fock_operators(basis);
    const Matrix H = hamiltonian_at(p, basis, t).mat;
    auto dissipator = [&](const Matrix& O, const Matrix& r) {
        return 0.5 * (2.0 * O * r * O.adjoint() - O.adjoint() * O * r - r * O.adjoint() * O);
    };
    Matrix out = cplx(0.0, -1.0) * (H * rho - rho * H);
    out += p.kappa * dissipator(ops.a.mat, rho);
    out += p.gamma * dissipator(ops.sigma_minus.mat, rho);
    out += 0.5 * p.gamma_phi * dissipator(ops.sigma_z.mat, rho);
    return out;
}

} // namespace nsqed
