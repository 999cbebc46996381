// effective.hpp — Effective dressed-basis amplitude dynamics: the slow
// amplitude ODE, the small zeta coefficient, and lab-frame reconstruction.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "nsqed/ode.hpp"
#include "nsqed/operators.hpp"
#include "nsqed/rates.hpp"
#include "nsqed/spectrum.hpp"

namespace nsqed {

struct LevelId {
    int m{0};
    Branch S{Branch::Plus}; // ignored for m = 0
};

enum class Parity { Even, Odd, Full };

// Dressed-level ladder carrying the amplitude vector layout. Couplings move
// excitation number by exactly two, so definite-parity initial states stay on
// their own chain.
struct LadderSpec {
    int m_max{12};
    Parity parity{Parity::Even};
    std::vector<LevelId> levels;

    int index_of(int m, Branch S) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i].m == m && (m == 0 || levels[i].S == S)) return int(i);
        throw std::invalid_argument("LadderSpec: level (" + std::to_string(m) + "," + to_string(S) +
                                    ") not in ladder");
    }
    int size() const { return int(levels.size()); }
};

inline LadderSpec make_ladder(int m_max, Parity parity) {
    LadderSpec spec;
    spec.m_max = m_max;
    spec.parity = parity;
    const int m0 = (parity == Parity::Odd) ? 1 : 0;
    for (int m = m0; m <= m_max; ++m) {
        if (parity != Parity::Full && (m - m0) % 2 != 0) continue;
        if (m == 0) {
            spec.levels.push_back({0, Branch::Plus});
        } else {
            spec.levels.push_back({m, Branch::Plus});
            spec.levels.push_back({m, Branch::Minus});
        }
    }
    return spec;
}

struct AmplitudeVector {
    LadderSpec ladder;
    Vector b;

    cplx b0() const { return b(ladder.index_of(0, Branch::Plus)); }
    cplx at(int m, Branch S) const { return b(ladder.index_of(m, S)); }
    double norm2() const { return b.squaredNorm(); }
};

inline AmplitudeVector ground_amplitudes(const LadderSpec& ladder) {
    Vector b = Vector::Zero(ladder.size());
    b(ladder.index_of(0, Branch::Plus)) = 1.0;
    return {ladder, std::move(b)};
}

// Precomputed two-level couplings (lower, upper) with rates and the corrected
// eigenfrequency difference entering the oscillating phases.
struct EffectiveModel {
    SystemParams params;
    LadderSpec ladder;
    struct Coupling {
        int lo, up;
        cplx theta, phi;
        double dlam; // lambda_bar(up) - lambda_bar(lo)
    };
    std::vector<Coupling> couplings;
};

inline EffectiveModel build_effective_model(const SystemParams& p, const SpectrumTable& spectrum,
                                            const LadderSpec& ladder) {
    if (spectrum.m_max < ladder.m_max)
        throw std::invalid_argument("build_effective_model: spectrum does not cover the ladder");
    EffectiveModel model{p, ladder, {}};
    for (const auto& lower : ladder.levels) {
        const int mu = lower.m + 2;
        if (mu > ladder.m_max) continue;
        for (Branch S : kBranches) {
            EffectiveModel::Coupling c;
            c.lo = ladder.index_of(lower.m, lower.S);
            c.up = ladder.index_of(mu, S);
            c.theta = theta_general(p, mu, lower.S, S);
            c.phi = phi_general(p, mu, lower.S, S);
            c.dlam = spectrum.lambda_bar(mu, S) - spectrum.lambda_bar(lower.m, lower.S);
            model.couplings.push_back(c);
        }
    }
    return model;
}

struct EffectiveTrajectory {
    LadderSpec ladder;
    std::vector<double> times;
    std::vector<Vector> amplitudes;
    OdeStats stats;
};

// Integrates the amplitude equation with every oscillating term retained;
// resonance selection emerges from the dynamics. Norm is conserved by the
// exact flow, so drift only reflects integrator tolerance.
inline EffectiveTrajectory evolve_effective(const EffectiveModel& model, const AmplitudeVector& b0,
                                            double t0, double t1, double rtol = 1e-10,
                                            int samples = 400, double trunc_tol = 1e-4) {
    if (b0.ladder.size() != model.ladder.size())
        throw std::invalid_argument("evolve_effective: amplitude layout mismatch");
    const double eta = model.params.eta;
    auto rhs = [&](double t, const Vector& b) {
        Vector db = Vector::Zero(b.size());
        const cplx e1 = std::exp(cplx(0.0, eta * t));
        const cplx e2 = e1 * e1;
        for (const auto& c : model.couplings) {
            const cplx osc = (c.theta * e1 + c.phi * e2);
            const cplx phase = std::exp(cplx(0.0, -c.dlam * t));
            db(c.lo) += osc * phase * b(c.up);
            db(c.up) -= std::conj(osc * phase) * b(c.lo);
        }
        return db;
    };

    EffectiveTrajectory traj;
    traj.ladder = model.ladder;
    std::vector<double> ts(samples);
    for (int i = 0; i < samples; ++i) ts[i] = t0 + (t1 - t0) * double(i) / double(samples - 1);

    Vector b = b0.b;
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    traj.stats = integrate_dopri5(rhs, b, t0, ts, opts, [&](double t, const Vector& y) {
        double top_pop = 0.0;
        for (int i = 0; i < model.ladder.size(); ++i)
            if (model.ladder.levels[i].m == model.ladder.m_max) top_pop += std::norm(y(i));
        if (top_pop > trunc_tol)
            throw TruncationError("evolve_effective: population " + std::to_string(top_pop) +
                                      " at top rung m=" + std::to_string(model.ladder.m_max),
                                  model.ladder.m_max + 4);
        traj.times.push_back(t);
        traj.amplitudes.push_back(y);
    });
    return traj;
}

// zeta_{m,T}^{(k)}(t): the small admixture of the opposite branch generated by
// the intra-manifold modulation matrix elements; vanishes at t = 0.
inline cplx zeta_coefficient(const SystemParams& p, int m, Branch T, double t, ModulationTarget k) {
    if (m < 1) return {0.0, 0.0};
    const double eta = p.eta;
    const double bm = beta_m(p, m);
    const int sT = sign_of(T);
    const double P_cross = detail::pi_or_zero(p, k, m, T, other(T));
    if (P_cross == 0.0) return {0.0, 0.0};
    detail::guard_denominator(eta - bm, p.omega0, "zeta: eta - beta_m");
    detail::guard_denominator(eta + bm, p.omega0, "zeta: eta + beta_m");
    detail::guard_denominator(2.0 * eta - bm, p.omega0, "zeta: 2eta - beta_m");
    const double P_diff =
        detail::pi_or_zero(p, k, m, T, T) - detail::pi_or_zero(p, k, m, other(T), other(T));
    auto osc = [&](double w, double den) {
        return (std::exp(cplx(0.0, w * t)) - 1.0) / den;
    };
    cplx bracket = osc(sT * bm + eta, eta + sT * bm) + osc(sT * bm - eta, eta - sT * bm);
    bracket += (P_diff / (cplx(0.0, 2.0) * eta)) *
               (osc(sT * bm + 2.0 * eta, 2.0 * eta + sT * bm) +
                osc(sT * bm - 2.0 * eta, 2.0 * eta - sT * bm));
    return cplx(0.0, 0.5) * P_cross * std::exp(cplx(0.0, P_diff / eta)) * bracket;
}

// Maps slow amplitudes b back to the lab-frame wavefunction:
//   A_0 = e^{-it nu_0} b_0
//   A_{m,T} = e^{i Pi_{m,T,T}(cos(eta t)-1)/eta} [e^{-it nu_{m,T}} b_{m,T}
//             - zeta_{m,T}(t) e^{-it nu_{m,-T}} b_{m,-T}]
//   |psi> = sum e^{-it lambda} A |phi>.
inline QuantumState reconstruct_state(const AmplitudeVector& amps, const SpectrumTable& spectrum,
                                      const SystemParams& p, double t, const BasisSpec& basis) {
    const ModulationTarget k = p.modulation_target;
    Vector psi = Vector::Zero(basis.dim());
    const double eta = p.eta;
    for (int i = 0; i < amps.ladder.size(); ++i) {
        const LevelId id = amps.ladder.levels[i];
        const auto& lv = spectrum.level(id.m, id.S);
        cplx A;
        if (id.m == 0) {
            A = std::exp(cplx(0.0, -lv.nu * t)) * amps.b(i);
        } else {
            const double Pi_TT = detail::pi_or_zero(p, k, id.m, id.S, id.S);
            const cplx envelope =
                (eta != 0.0) ? std::exp(cplx(0.0, Pi_TT * (std::cos(eta * t) - 1.0) / eta))
                             : cplx(1.0, 0.0);
            cplx inner = std::exp(cplx(0.0, -lv.nu * t)) * amps.b(i);
            const Branch oT = other(id.S);
            // the partner amplitude is present only on two-branch ladders
            bool has_partner = true;
            int j = -1;
            try {
                j = amps.ladder.index_of(id.m, oT);
            } catch (const std::invalid_argument&) {
                has_partner = false;
            }
            if (has_partner) {
                const auto& lo = spectrum.level(id.m, oT);
                inner -= zeta_coefficient(p, id.m, id.S, t, k) *
                         std::exp(cplx(0.0, -lo.nu * t)) * amps.b(j);
            }
            A = envelope * inner;
        }
        const QuantumState phi = dressed_state(p, basis, id.m, id.S);
        psi += std::exp(cplx(0.0, -lv.lambda * t)) * A * phi.amps;
    }
    return {basis, std::move(psi)};
}

} // namespace nsqed
