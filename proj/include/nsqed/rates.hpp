// rates.hpp — First- and second-order modulation-induced transition rates:
// the general expressions and their resonant/dispersive closed forms.

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nsqed/params.hpp"
#include "nsqed/spectrum.hpp"

namespace nsqed {

enum class RateRegime { General, Resonant, AJC, DCE, AntiDCE };

inline const char* to_string(RateRegime r) {
    switch (r) {
        case RateRegime::General:  return "general";
        case RateRegime::Resonant: return "resonant";
        case RateRegime::AJC:      return "ajc";
        case RateRegime::DCE:      return "dce";
        case RateRegime::AntiDCE:  return "anti-dce";
    }
    return "?";
}

// One transition b_{m-2,T} <-> b_{m,S}. The index m is the target (upper)
// excitation number; T labels the lower branch and is inert when m = 2.
struct RateEntry {
    int m{2};
    Branch T{Branch::Plus};
    Branch S{Branch::Plus};
    cplx theta{0.0};
    cplx phi{0.0};
    ModulationTarget k{ModulationTarget::None};
    RateRegime regime{RateRegime::General};
};

namespace detail {

inline cplx safe_term(cplx numerator, double denominator, double omega0, const char* what) {
    if (std::abs(numerator) == 0.0) return {0.0, 0.0};
    guard_denominator(denominator, omega0, what);
    return numerator / denominator;
}

} // namespace detail

// First-order rate Theta_{m,T,S}, m >= 2. The Kronecker deltas gate the beta
// terms: the denominator picks up -S beta_m only for R = -S (and +T beta_{m-2}
// only for R = -T); eta is the actual modulation frequency from params.
inline cplx theta_general(const SystemParams& p, int m, Branch T, Branch S) {
    if (m < 2) throw std::invalid_argument("theta_general: m must be >= 2");
    const ModulationTarget k = p.modulation_target;
    if (k == ModulationTarget::None || p.epsilon == 0.0) return {0.0, 0.0};
    const double eta = p.eta;
    const double bm = beta_m(p, m);
    const double bl = beta_m(p, m - 2);

    using detail::g0_lambda_bar;
    using detail::pi_or_zero;
    using detail::safe_term;

    cplx acc{0.0, 0.0};
    // R = S and R = T contributions share the plain 1/eta denominator.
    acc += safe_term(g0_lambda_bar(p, m, T, S) *
                         (pi_or_zero(p, k, m, S, S) - pi_or_zero(p, k, m - 2, T, T)),
                     eta, p.omega0, "theta: eta");
    acc += safe_term(g0_lambda_bar(p, m, T, other(S)) * pi_or_zero(p, k, m, other(S), S),
                     eta - sign_of(S) * bm, p.omega0, "theta: eta - S*beta_m");
    acc -= safe_term(g0_lambda_bar(p, m, other(T), S) * pi_or_zero(p, k, m - 2, T, other(T)),
                     eta + sign_of(T) * bl, p.omega0, "theta: eta + T*beta_{m-2}");
    if (k == ModulationTarget::Coupling)
        acc -= p.epsilon * lambda_element(p, m, T, S);
    return 0.5 * acc;
}

// Second-order rate Phi_{m,T,S}, m >= 2.
inline cplx phi_general(const SystemParams& p, int m, Branch T, Branch S) {
    if (m < 2) throw std::invalid_argument("phi_general: m must be >= 2");
    const ModulationTarget k = p.modulation_target;
    if (k == ModulationTarget::None || p.epsilon == 0.0) return {0.0, 0.0};
    const double eta = p.eta;
    const double bm = beta_m(p, m);
    const double bl = beta_m(p, m - 2);
    const int sS = sign_of(S), sT = sign_of(T);

    using detail::g0_lambda_bar;
    using detail::pi_or_zero;
    using detail::safe_term;

    const double P_SS = pi_or_zero(p, k, m, S, S);
    const double P_mSmS = pi_or_zero(p, k, m, other(S), other(S));
    const double P_mSS = pi_or_zero(p, k, m, other(S), S);
    const double Q_TT = pi_or_zero(p, k, m - 2, T, T);
    const double Q_mTmT = pi_or_zero(p, k, m - 2, other(T), other(T));
    const double Q_TmT = pi_or_zero(p, k, m - 2, T, other(T));

    cplx acc{0.0, 0.0};
    // (1) squared population-difference term
    acc += g0_lambda_bar(p, m, T, S) * ((P_SS - Q_TT) * (P_SS - Q_TT)) / (2.0 * eta * eta);
    // (2) double cross term with both beta denominators
    {
        const cplx num = g0_lambda_bar(p, m, other(T), other(S)) * P_mSS * Q_TmT;
        if (std::abs(num) != 0.0) {
            detail::guard_denominator(eta - sS * bm, p.omega0, "phi: eta - S*beta_m");
            detail::guard_denominator(eta + sT * bl, p.omega0, "phi: eta + T*beta_{m-2}");
            acc -= num / ((eta - sS * bm) * (eta + sT * bl));
        }
    }
    // (3) upper-manifold mixing
    {
        const cplx pre = g0_lambda_bar(p, m, T, other(S)) * P_mSS / eta;
        if (std::abs(pre) != 0.0) {
            acc += pre * (safe_term(P_mSmS - Q_TT, eta - sS * bm, p.omega0, "phi: eta - S*beta_m") +
                          safe_term(P_SS - P_mSmS, 2.0 * eta - sS * bm, p.omega0,
                                    "phi: 2eta - S*beta_m"));
        }
    }
    // (4) lower-manifold mixing
    {
        const cplx pre = g0_lambda_bar(p, m, other(T), S) * Q_TmT / eta;
        if (std::abs(pre) != 0.0) {
            acc -= pre * (safe_term(P_SS - Q_mTmT, eta + sT * bl, p.omega0,
                                    "phi: eta + T*beta_{m-2}") +
                          safe_term(Q_mTmT - Q_TT, 2.0 * eta + sT * bl, p.omega0,
                                    "phi: 2eta + T*beta_{m-2}"));
        }
    }
    // (5) coupling-modulation counter terms
    if (k == ModulationTarget::Coupling) {
        cplx counter{0.0, 0.0};
        counter += lambda_element(p, m, T, S) * (P_SS - Q_TT) / eta;
        counter += safe_term(cplx(lambda_element(p, m, T, other(S)) * P_mSS), eta - sS * bm,
                             p.omega0, "phi: eta - S*beta_m");
        counter -= safe_term(cplx(lambda_element(p, m, other(T), S) * Q_TmT), eta + sT * bl,
                             p.omega0, "phi: eta + T*beta_{m-2}");
        acc -= p.epsilon * counter;
    }
    return cplx(0.0, 0.25) * acc;
}

// --------------------------- Resonant closed forms ---------------------------

// Delta_- = 0 expressions. Theta is quoted at the 1-order resonance
// (eta ~ lambda difference) and Phi at the 2-order one (eta ~ half of it).
inline RateEntry rates_resonant_closed_form(const SystemParams& p, int m, Branch T, Branch S) {
    if (std::abs(p.delta_minus()) > 1e-12 * p.omega0)
        throw std::invalid_argument("rates_resonant_closed_form: requires Delta_- = 0");
    if (m < 2) throw std::invalid_argument("rates_resonant_closed_form: m must be >= 2");
    const ModulationTarget k = p.modulation_target;
    RateEntry e{m, T, S, {0.0, 0.0}, {0.0, 0.0}, k, RateRegime::Resonant};
    if (k == ModulationTarget::None || p.epsilon == 0.0) return e;
    const double sgn = sign_of(S);
    if (k == ModulationTarget::Omega) {
        const double r = p.epsilon / (8.0 * p.Omega0);
        if (m == 2) {
            e.theta = sgn * p.g0 * std::sqrt(2.0) * r;
            const double chi_ratio = (p.chi0 == 0.0) ? 0.0 : p.chi0 / p.g0;
            e.phi = sgn * p.g0 * std::sqrt(2.0) * r * r * (cplx(0.0, 3.0) - sgn * std::sqrt(2.0) * chi_ratio);
        } else {
            const int mp = m - 2; // paper's lower index, > 0 here
            const double root = std::sqrt(double(mp + 1));
            e.theta = sgn * p.g0 * root * r;
            const double chi_ratio = (p.chi0 == 0.0) ? 0.0 : p.chi0 / p.g0;
            e.phi = sgn * p.g0 * root * r * r *
                    (cplx(0.0, 2.0) -
                     2.0 * chi_ratio * (sgn * std::sqrt(double(mp + 2)) + sign_of(T) * std::sqrt(double(mp))));
        }
    } else {
        const double r = p.epsilon / (2.0 * p.g0);
        if (m == 2) {
            e.theta = -sgn * (p.g0 / std::sqrt(2.0)) * r;
            e.phi = e.theta * r * cplx(0.0, 1.0) * sgn * std::sqrt(2.0) * p.g0 / p.omega0;
        } else {
            const int mp = m - 2;
            const double root = std::sqrt(double(mp + 1));
            e.theta = -sgn * (p.g0 / 2.0) * root * r;
            e.phi = e.theta * r * cplx(0.0, 1.0) * (p.g0 / p.omega0) *
                    (sgn * std::sqrt(double(mp + 2)) - sign_of(T) * std::sqrt(double(mp)));
        }
    }
    return e;
}

// -------------------------- Dispersive closed forms --------------------------

enum class DceBranch { PlusD, MinusD }; // which ladder of the photon-pair chain

// |Delta_-|/2 >> g0 sqrt(m) expressions. The argument m is the target (upper)
// excitation index; the coupled pair follows the regime's branch pattern.
inline RateEntry rates_dispersive_closed_form(const SystemParams& p, RateRegime regime, int m,
                                              DceBranch branch = DceBranch::PlusD,
                                              double validity_ratio = 0.25) {
    if (m < 2) throw std::invalid_argument("rates_dispersive_closed_form: m must be >= 2");
    if (std::abs(p.delta_minus()) < 1e-12 * p.omega0)
        throw DegeneracyError("rates_dispersive_closed_form: requires Delta_- != 0");
    const double ratio = 2.0 * p.g0 * std::sqrt(double(m - 2)) / std::abs(p.delta_minus());
    if (ratio > validity_ratio)
        throw std::invalid_argument(
            "rates_dispersive_closed_form: dispersive validity violated (2 g0 sqrt(m)/|Delta_-| = " +
            std::to_string(ratio) + ")");
    const ModulationTarget k = p.modulation_target;
    const int D = p.detuning_symbol();
    const Branch Dp = D > 0 ? Branch::Plus : Branch::Minus;
    const Branch Dm = other(Dp);
    const int mp = m - 2; // paper's lower index, >= 0
    const double eps = p.epsilon;
    const double dm = p.small_delta_minus();
    const double Dplus = p.delta_plus();
    const double Dminus = p.delta_minus();

    RateEntry e{m, Branch::Plus, Branch::Plus, {0.0, 0.0}, {0.0, 0.0}, k, regime};
    if (k == ModulationTarget::None || eps == 0.0) {
        // branch pattern still recorded
    }
    switch (regime) {
        case RateRegime::AJC: {
            e.T = Dp;
            e.S = Dm;
            const double root = std::sqrt(double(mp + 1));
            if (k == ModulationTarget::Omega) {
                const double r = eps / (2.0 * Dplus);
                e.theta = -double(D) * p.g0 * root * r;
                e.phi = -double(D) * p.g0 * root * r * r * cplx(0.0, 2.0);
            } else if (k == ModulationTarget::Coupling) {
                const double r = eps / (2.0 * p.g0);
                e.theta = double(D) * p.g0 * root * r;
                e.phi = double(D) * p.g0 * root * r * r * (p.g0 / Dplus) *
                        (4.0 * p.g0 * (mp + 1) / cplx(0.0, Dminus));
            }
            break;
        }
        case RateRegime::DCE: {
            const bool plus = (branch == DceBranch::PlusD);
            e.T = plus ? Dp : Dm;
            e.S = e.T;
            const double root = plus ? std::sqrt(double((mp + 1) * (mp + 2)))
                                     : std::sqrt(double(mp * (mp + 1)));
            const double sgn = plus ? +1.0 : -1.0;
            if (k == ModulationTarget::Omega) {
                const double r = eps / (2.0 * Dplus);
                e.theta = sgn * dm * root * r;
                const double chi_val = 2.0 * p.chi0 * (mp + 1) / Dminus;
                e.phi = sgn * dm * root * r * r * (Dplus / p.Omega0) *
                        cplx(plus ? -chi_val : +chi_val, 1.0);
            } else if (k == ModulationTarget::Coupling) {
                const double r = eps / (2.0 * p.g0);
                e.theta = -sgn * dm * root * r * (2.0 * p.Omega0 / Dplus);
                e.phi = -sgn * dm * root * r * r * cplx(0.0, Dminus / p.Omega0);
            }
            break;
        }
        case RateRegime::AntiDCE: {
            e.T = Dm;
            e.S = Dp;
            const double root = std::sqrt(double(mp * (mp + 1) * (mp + 2)));
            if (k == ModulationTarget::Omega) {
                const double r = eps / (2.0 * p.omega0);
                const double pre = 0.5 * D * dm * (p.g0 / Dminus) * root;
                e.theta = pre * r;
                e.phi = pre * r * r * (cplx(0.0, 1.0) - 2.0 * p.chi0 / Dminus);
            } else if (k == ModulationTarget::Coupling) {
                const double r = eps / (2.0 * p.g0);
                const double pre = -double(D) * dm * (p.g0 / Dminus) * root;
                e.theta = pre * r * (p.Omega0 / p.omega0);
                e.phi = pre * r * r * cplx(0.0, 2.0 * Dminus / p.omega0);
            }
            break;
        }
        default:
            throw std::invalid_argument("rates_dispersive_closed_form: regime must be AJC, DCE or AntiDCE");
    }
    return e;
}

// ------------------------------- Rate tables --------------------------------

struct RateTable {
    std::vector<RateEntry> entries;

    const RateEntry& entry(int m, Branch T, Branch S) const {
        for (const auto& e : entries)
            if (e.m == m && (m == 2 || e.T == T) && e.S == S) return e;
        throw std::invalid_argument("RateTable::entry: (" + std::to_string(m) + "," +
                                    to_string(T) + "," + to_string(S) + ") not tabulated");
    }
};

// General rates for every transition (m-2,T) <-> (m,S) with m <= m_max.
inline RateTable build_rate_table(const SystemParams& p, int m_max) {
    if (m_max < 2) throw std::invalid_argument("build_rate_table: m_max must be >= 2");
    RateTable table;
    for (int m = 2; m <= m_max; ++m) {
        for (Branch T : kBranches) {
            for (Branch S : kBranches) {
                RateEntry e{m, T, S, theta_general(p, m, T, S), phi_general(p, m, T, S),
                            p.modulation_target, RateRegime::General};
                table.entries.push_back(e);
            }
            if (m == 2) break; // lower manifold is the ground level: T is inert
        }
    }
    return table;
}

} // namespace nsqed
