// steady.hpp — Asymptotic closed-form observables and numerical steady states
// (long-horizon beat averaging for the periodic drive, Liouvillian null space
// for time-independent generators).

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <string>

#include "nsqed/dynamics.hpp"
#include "nsqed/operators.hpp"

namespace nsqed {

enum class AsymptoticRegime { ResonantEqualRates, ResonantKappaZero, AjcEqualRates, AjcKappaZero };

inline const char* to_string(AsymptoticRegime r) {
    switch (r) {
        case AsymptoticRegime::ResonantEqualRates: return "resonant-equal-rates";
        case AsymptoticRegime::ResonantKappaZero:  return "resonant-kappa-zero";
        case AsymptoticRegime::AjcEqualRates:      return "ajc-equal-rates";
        case AsymptoticRegime::AjcKappaZero:       return "ajc-kappa-zero";
    }
    return "?";
}

struct AsymptoticResult {
    double mean_n_inf{0.0};
    double p_e_inf{0.0};
    double p_g0_inf{0.0};
    AsymptoticRegime regime{AsymptoticRegime::ResonantEqualRates};
    double theta_used{0.0};
};

// t -> infinity observables in the dressed-basis rate-equation limit; theta is
// theta_1 or theta_2 depending on the resonance order driven.
inline AsymptoticResult asymptotic_closed_form(AsymptoticRegime regime, double gamma, double theta,
                                               std::optional<double> g0_over_delta = {}) {
    if (!(theta > 0.0))
        throw std::invalid_argument("asymptotic_closed_form: theta must be > 0 (drive vanishes)");
    if (gamma < 0.0) throw std::invalid_argument("asymptotic_closed_form: gamma must be >= 0");
    const double r = gamma / theta;
    AsymptoticResult out;
    out.regime = regime;
    out.theta_used = theta;
    switch (regime) {
        case AsymptoticRegime::ResonantEqualRates: {
            const double den = 23.0 + 9.0 * r * r;
            out.mean_n_inf = 15.0 / den;
            out.p_e_inf = 0.6 * out.mean_n_inf;
            out.p_g0_inf = (5.0 + 9.0 * r * r) / den;
            break;
        }
        case AsymptoticRegime::ResonantKappaZero: {
            const double q = 0.75 * r;
            const double den = 8.0 + q * q;
            out.mean_n_inf = 6.0 / den;
            out.p_e_inf = 0.5 * out.mean_n_inf;
            out.p_g0_inf = (2.0 + q * q) / den;
            break;
        }
        case AsymptoticRegime::AjcEqualRates: {
            const double den = 2.0 + r * r;
            out.mean_n_inf = 1.0 / den;
            out.p_e_inf = out.mean_n_inf;
            out.p_g0_inf = 0.5 * (1.0 + 2.0 * r * r) / den;
            break;
        }
        case AsymptoticRegime::AjcKappaZero: {
            if (!g0_over_delta)
                throw std::invalid_argument(
                    "asymptotic_closed_form: AjcKappaZero requires g0/Delta_-");
            const double q2 = (*g0_over_delta) * (*g0_over_delta);
            const double s = 1.5 * r;
            const double den = 1.0 + q2 * s * s;
            out.mean_n_inf = 1.0 / den;
            out.p_e_inf = 6.0 * q2 * out.mean_n_inf;
            out.p_g0_inf = q2 * (3.0 + s * s) / den;
            break;
        }
    }
    return out;
}

// ------------------------- Liouvillian null space ----------------------------

// Steady state of a time-independent Lindblad generator via the kernel of the
// vectorized Liouvillian (column-major vec, so A rho B -> (B^T ⊗ A) vec(rho)).
inline Matrix steady_state_nullspace(const Matrix& H,
                                     const std::vector<std::pair<double, Matrix>>& channels) {
    const int D = int(H.rows());
    if (H.cols() != D) throw std::invalid_argument("steady_state_nullspace: H must be square");
    const int D2 = D * D;
    const Matrix id = Matrix::Identity(D, D);
    auto kron = [&](const Matrix& A, const Matrix& B) {
        Matrix K(D2, D2);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) K.block(i * D, j * D, D, D) = A(i, j) * B;
        return K;
    };
    Matrix L = cplx(0.0, -1.0) * (kron(id, H) - kron(H.transpose(), id));
    for (const auto& [rate, op] : channels) {
        if (rate == 0.0) continue;
        const Matrix opdag_op = op.adjoint() * op;
        L += rate * (kron(op.conjugate(), op) -
                     0.5 * (kron(id, opdag_op) + kron(opdag_op.transpose(), id)));
    }
    Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
    const Vector v = svd.matrixV().col(D2 - 1); // right singular vector of the smallest value
    Matrix rho(D, D);
    for (int j = 0; j < D; ++j) rho.col(j) = v.segment(j * D, D);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-12)
        throw SolverError("steady_state_nullspace: traceless kernel vector (degenerate kernel?)");
    rho /= tr;
    return rho;
}

// ----------------------- Long-horizon beat averaging -------------------------

struct SteadyStateOptions {
    double beat_period{0.0};   // 2 pi / |rate| of the driven transition; required for the periodic path
    double drift_tol{1e-4};    // max observable change between consecutive beat averages
    int max_beats{400};
    int samples_per_beat{48};
    double rtol{1e-8};
    Frame frame{Frame::Interaction};
};

struct SteadyStateResult {
    DensityMatrix rho;          // time-averaged over the final beat window
    Observables obs;            // beat-averaged observables
    std::string method;         // "nullspace" or "beat-average"
    int beats_used{0};
    double final_drift{0.0};
};

// Periodic steady state: integrate the master equation beat window by beat
// window, averaging observables over each window, until consecutive averages
// drift less than drift_tol. The asymptote of the figures is an envelope
// average, so the window spans one full effective beat.
inline SteadyStateResult numerical_steady_state(const SystemParams& p, const BasisSpec& basis,
                                                const SteadyStateOptions& opts,
                                                std::optional<DensityMatrix> seed = {}) {
    p.validate();
    if (p.kappa == 0.0 && p.gamma == 0.0 && p.gamma_phi == 0.0)
        throw std::invalid_argument("numerical_steady_state: needs at least one dissipation rate");

    const bool periodic = (p.modulation_target != ModulationTarget::None && p.epsilon != 0.0);
    SteadyStateResult out;
    if (!periodic) {
        const auto ops = fock_operators(basis);
        const Matrix H = hamiltonian_at(p, basis, 0.0).mat;
        const Matrix rho = steady_state_nullspace(
            H, {{p.kappa, ops.a.mat}, {p.gamma, ops.sigma_minus.mat},
                {0.5 * p.gamma_phi, ops.sigma_z.mat}});
        out.rho = {basis, rho};
        out.obs = observables(out.rho, basis);
        out.method = "nullspace";
        return out;
    }

    if (!(opts.beat_period > 0.0))
        throw std::invalid_argument("numerical_steady_state: beat_period required for periodic drive");

    detail::LindbladWorkspace ws(p, basis, opts.frame);
    auto rhs = [&](double t, const Matrix& r) { return ws.rhs(t, r); };

    Matrix y = seed ? seed->rho : pure_density(ground_state(basis)).rho;
    const int D = basis.dim();
    if (opts.frame == Frame::Interaction) {
        // t0 = 0: the frame transform is the identity
    }

    double t = 0.0;
    Observables prev{};
    bool have_prev = false;
    OdeOptions oopts;
    oopts.rtol = opts.rtol;
    oopts.atol = 1e-13;

    Matrix rho_accum(D, D);
    for (int beat = 1; beat <= opts.max_beats; ++beat) {
        Observables accum{};
        rho_accum.setZero();
        int count = 0;
        std::vector<double> samples(opts.samples_per_beat);
        for (int i = 0; i < opts.samples_per_beat; ++i)
            samples[i] = t + opts.beat_period * double(i + 1) / opts.samples_per_beat;
        integrate_dopri5(rhs, y, t, samples, oopts, [&](double, Matrix& rv) {
            rv = 0.5 * (rv + rv.adjoint().eval());
            rv /= rv.trace().real();
            for (int i = 0; i < D; ++i) {
                const double w = rv(i, i).real();
                accum.mean_n += w * BasisSpec::photons_of(i);
                if (BasisSpec::excited_of(i)) accum.p_e += w;
            }
            accum.p_g0 += rv(0, 0).real();
            rho_accum += rv;
            ++count;
        });
        t += opts.beat_period;
        accum.mean_n /= count;
        accum.p_e /= count;
        accum.p_g0 /= count;
        rho_accum /= double(count);
        if (have_prev) {
            const double drift = std::max({std::abs(accum.mean_n - prev.mean_n),
                                           std::abs(accum.p_e - prev.p_e),
                                           std::abs(accum.p_g0 - prev.p_g0)});
            if (drift < opts.drift_tol) {
                // de-rotate the averaged state if integrated in the rotating frame
                Matrix rho_avg = rho_accum;
                if (opts.frame == Frame::Interaction) {
                    // diagonal observables are frame invariant; coherences averaged in
                    // frame are reported as-is in the frame of the final beat start
                }
                out.rho = {basis, rho_avg};
                out.obs = accum;
                out.method = "beat-average";
                out.beats_used = beat;
                out.final_drift = drift;
                return out;
            }
            out.final_drift = drift;
        }
        prev = accum;
        have_prev = true;
    }
    throw SolverError("numerical_steady_state: no convergence within " +
                      std::to_string(opts.max_beats) + " beats (last drift " +
                      std::to_string(out.final_drift) + ")");
}

} // namespace nsqed
