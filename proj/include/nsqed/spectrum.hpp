// spectrum.hpp — Jaynes-Cummings dressed spectrum, matrix elements, intrinsic
// shifts nu, corrected eigenfrequencies and validity diagnostics.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nsqed/operators.hpp"
#include "nsqed/params.hpp"

namespace nsqed {

// beta_m = sqrt(Delta_-^2 + 4 g0^2 m); beta_0 = |Delta_-|.
inline double beta_m(const SystemParams& p, int m) {
    const double d = p.delta_minus();
    return std::sqrt(d * d + 4.0 * p.g0 * p.g0 * m);
}

// lambda_0 = 0, lambda_{m>0,S} = omega0 m + (S beta_m - Delta_-)/2.
inline double eigenfrequency(const SystemParams& p, int m, Branch S) {
    if (m < 0) throw std::invalid_argument("eigenfrequency: m must be >= 0");
    if (m == 0) return 0.0;
    return p.omega0 * m + 0.5 * (sign_of(S) * beta_m(p, m) - p.delta_minus());
}

// theta_m = arctan[(Delta_- + beta_m)/(2 g0 sqrt(m))], principal branch.
inline double mixing_angle(const SystemParams& p, int m) {
    if (m < 1) throw std::invalid_argument("mixing_angle: m must be >= 1");
    const double num = p.delta_minus() + beta_m(p, m);
    const double den = 2.0 * p.g0 * std::sqrt(double(m));
    if (num == 0.0 && den == 0.0)
        throw DegeneracyError("mixing_angle: g0 = 0 and Delta_- = 0 (degenerate manifold)");
    return std::atan2(num, den);
}

// Dressed amplitudes (s,c): |phi_{m,S}> = s|g,m> + c|e,m-1>.
// s_{m,+} = sin(theta), s_{m,-} = cos(theta), c_{m,+} = cos(theta), c_{m,-} = -sin(theta).
// The ground level m = 0 carries (s,c) = (1,0) so contraction formulas close uniformly.
inline std::pair<double, double> dressed_amplitudes(const SystemParams& p, int m, Branch S) {
    if (m < 0) throw std::invalid_argument("dressed_amplitudes: m must be >= 0");
    if (m == 0) return {1.0, 0.0};
    const double th = mixing_angle(p, m);
    if (S == Branch::Plus) return {std::sin(th), std::cos(th)};
    return {std::cos(th), -std::sin(th)};
}

inline QuantumState dressed_state(const SystemParams& p, const BasisSpec& basis, int m, Branch S) {
    if (m > basis.n_max) throw std::invalid_argument("dressed_state: m exceeds n_max");
    Vector v = Vector::Zero(basis.dim());
    if (m == 0) {
        v(BasisSpec::index_of(false, 0)) = 1.0;
    } else {
        const auto [s, c] = dressed_amplitudes(p, m, S);
        v(BasisSpec::index_of(false, m)) = s;
        v(BasisSpec::index_of(true, m - 1)) = c;
    }
    return {basis, std::move(v)};
}

// ---------------------- Time-independent matrix elements ----------------------

// Pi^{(Omega)}_{m,T,S} = eps_Omega <phi_T|e><e|phi_S> = eps_Omega c_T c_S
// Pi^{(g)}_{m,T,S}     = eps_g <phi_T|(a sig+ + a† sig-)|phi_S> = eps_g sqrt(m)(s_T c_S + c_T s_S)
inline double pi_element(const SystemParams& p, ModulationTarget k, int m, Branch T, Branch S) {
    if (m < 1) throw std::invalid_argument("pi_element: undefined on the ground level (m = 0)");
    const double eps = p.epsilon_for(k);
    const auto [sT, cT] = dressed_amplitudes(p, m, T);
    const auto [sS, cS] = dressed_amplitudes(p, m, S);
    if (k == ModulationTarget::Omega) return eps * cT * cS;
    if (k == ModulationTarget::Coupling) return eps * std::sqrt(double(m)) * (sT * cS + cT * sS);
    return 0.0;
}

namespace detail {
// Pi with the ground-level convention Pi_0 = 0, used inside rate formulas.
inline double pi_or_zero(const SystemParams& p, ModulationTarget k, int m, Branch T, Branch S) {
    return (m < 1) ? 0.0 : pi_element(p, k, m, T, S);
}
} // namespace detail

// Lambda_{p,T,S} = <phi_{p-2,T}| a sig- |phi_{p,S}> (p >= 2). Real by construction.
inline double lambda_element(const SystemParams& p, int p_upper, Branch T, Branch S) {
    if (p_upper < 2) throw std::invalid_argument("lambda_element: upper index must be >= 2");
    const int m = p_upper - 2;
    const auto [sT, cT] = dressed_amplitudes(p, m, T);
    const auto [sU, cU] = dressed_amplitudes(p, p_upper, S);
    (void)sU;
    return sT * cU * std::sqrt(double(m + 1));
}

// L_{p,T,S} = <phi_{p-2,T}| a² |phi_{p,S}> (p >= 2). Real by construction.
inline double l_element(const SystemParams& p, int p_upper, Branch T, Branch S) {
    if (p_upper < 2) throw std::invalid_argument("l_element: upper index must be >= 2");
    const int m = p_upper - 2;
    const auto [sT, cT] = dressed_amplitudes(p, m, T);
    const auto [sU, cU] = dressed_amplitudes(p, p_upper, S);
    double out = sT * sU * std::sqrt(double(m + 1)) * std::sqrt(double(m + 2));
    if (m >= 1) out += cT * cU * std::sqrt(double(m)) * std::sqrt(double(m + 1));
    return out;
}

// Lambda_bar = Lambda - i (chi0/g0) L; undefined when g0 = 0 with chi0 != 0.
inline cplx lambda_bar_element(const SystemParams& p, int p_upper, Branch T, Branch S) {
    if (p.g0 == 0.0 && p.chi0 != 0.0)
        throw DegeneracyError("lambda_bar_element: chi0/g0 undefined at g0 = 0");
    const double L = lambda_element(p, p_upper, T, S);
    const double l2 = l_element(p, p_upper, T, S);
    const double ratio = (p.g0 == 0.0) ? 0.0 : p.chi0 / p.g0;
    return cplx(L, -ratio * l2);
}

namespace detail {
// g0 * Lambda_bar = g0 Lambda - i chi0 L: finite even at g0 = 0.
inline cplx g0_lambda_bar(const SystemParams& p, int p_upper, Branch T, Branch S) {
    return cplx(p.g0 * lambda_element(p, p_upper, T, S),
                -p.chi0 * l_element(p, p_upper, T, S));
}

inline void guard_denominator(double value, double omega0, const std::string& what) {
    if (std::abs(value) < 1e-9 * omega0)
        throw DegeneracyError("degenerate denominator in " + what);
}
} // namespace detail

struct MatrixElements {
    double Pi_Omega;  // Pi^{(Omega)}_{p,T,S}
    double Pi_g;      // Pi^{(g)}_{p,T,S}
    double Lambda;    // Lambda_{p,T,S}
    double L;         // L_{p,T,S}
    cplx Lambda_bar;  // Lambda - i(chi0/g0) L
};

inline MatrixElements lambda_elements(const SystemParams& p, int p_upper, Branch T, Branch S) {
    if (p_upper < 2) throw std::invalid_argument("lambda_elements: upper index must be >= 2");
    MatrixElements e{};
    e.Pi_Omega = detail::pi_or_zero(p, ModulationTarget::Omega, p_upper, T, S);
    e.Pi_g = detail::pi_or_zero(p, ModulationTarget::Coupling, p_upper, T, S);
    e.Lambda = lambda_element(p, p_upper, T, S);
    e.L = l_element(p, p_upper, T, S);
    e.Lambda_bar = lambda_bar_element(p, p_upper, T, S);
    return e;
}

// ----------------------------- Intrinsic shifts -----------------------------

// nu_{m,T}: second-order shift from the counter-rotating and squeezing terms.
//   nu = -sum_S [ |g0 LamBar_{m+2,T,S}|^2 / (lam_{m+2,S}-lam_{m,T})
//               - |g0 LamBar_{m,S,T}|^2  / (lam_{m,T}-lam_{m-2,S}) ] / g0^0
// written with g0*LamBar so chi0-only configurations stay finite. The ground
// manifold enters sums exactly once.
inline double nu_shift(const SystemParams& p, int m, Branch T) {
    if (m < 0) throw std::invalid_argument("nu_shift: m must be >= 0");
    const double lam_mT = eigenfrequency(p, m, T);
    double nu = 0.0;
    for (Branch S : kBranches) {
        const cplx up = detail::g0_lambda_bar(p, m + 2, T, S);
        const double den = eigenfrequency(p, m + 2, S) - lam_mT;
        detail::guard_denominator(den, p.omega0,
                                  "nu_shift: lambda(" + std::to_string(m + 2) + "," + to_string(S) +
                                      ") - lambda(" + std::to_string(m) + "," + to_string(T) + ")");
        nu -= std::norm(up) / den;
    }
    if (m >= 2) {
        for (Branch S : kBranches) {
            const cplx down = detail::g0_lambda_bar(p, m, S, T);
            const double den = lam_mT - eigenfrequency(p, m - 2, S);
            detail::guard_denominator(den, p.omega0,
                                      "nu_shift: lambda(" + std::to_string(m) + "," + to_string(T) +
                                          ") - lambda(" + std::to_string(m - 2) + "," + to_string(S) + ")");
            nu += std::norm(down) / den;
            if (m - 2 == 0) break; // the ground manifold is a single level
        }
    }
    return nu;
}

// Corrected eigenfrequency lambda_bar = lambda + nu (the residual SEFS is located
// numerically by the resonance tuner, not here).
inline double corrected_eigenfrequency(const SystemParams& p, int m, Branch T) {
    return eigenfrequency(p, m, T) + nu_shift(p, m, T);
}

// ------------------------------ Spectrum table ------------------------------

struct DressedLevel {
    int m{0};
    Branch S{Branch::Plus};
    double lambda{0.0};
    double beta{0.0};
    double theta{0.0};
    double s{1.0}, c{0.0};
    double nu{0.0};
    double lambda_bar{0.0};
};

struct SpectrumTable {
    SystemParams params;
    int m_max{0};
    std::vector<DressedLevel> levels; // m=0 once, then (m,+),(m,-) pairs

    const DressedLevel& level(int m, Branch S) const {
        if (m < 0 || m > m_max) throw std::invalid_argument("SpectrumTable::level: m out of range");
        if (m == 0) return levels[0];
        return levels[1 + 2 * (m - 1) + (S == Branch::Plus ? 0 : 1)];
    }
    double lambda_bar(int m, Branch S) const { return level(m, S).lambda_bar; }
};

inline SpectrumTable build_spectrum(const SystemParams& p, int m_max) {
    if (m_max < 0) throw std::invalid_argument("build_spectrum: m_max must be >= 0");
    SpectrumTable table{p, m_max, {}};
    auto push = [&](int m, Branch S) {
        DressedLevel lv;
        lv.m = m;
        lv.S = S;
        lv.lambda = eigenfrequency(p, m, S);
        lv.beta = beta_m(p, m);
        if (m > 0) {
            lv.theta = mixing_angle(p, m);
            std::tie(lv.s, lv.c) = dressed_amplitudes(p, m, S);
        }
        lv.nu = nu_shift(p, m, S);
        lv.lambda_bar = lv.lambda + lv.nu;
        table.levels.push_back(lv);
    };
    push(0, Branch::Plus);
    for (int m = 1; m <= m_max; ++m) {
        push(m, Branch::Plus);
        push(m, Branch::Minus);
    }
    return table;
}

// ------------------------------ Validity report -----------------------------

struct ValidityItem {
    std::string name;
    double value{0.0}; // angular frequency
    double ratio{0.0}; // value / omega0
    bool pass{true};
};

struct ValidityReport {
    double threshold{0.1};
    std::vector<ValidityItem> items;
    double sefs_order{0.0}; // max of the estimated systematic-error shifts

    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
};

// Evaluates the smallness requirements of the perturbative treatment over
// m <= m_max, plus the order estimate of the systematic-error frequency shifts.
inline ValidityReport validity_check(const SystemParams& p, int m_max, double threshold = 0.1) {
    ValidityReport rep;
    rep.threshold = threshold;
    auto add = [&](const std::string& name, double value) {
        ValidityItem it;
        it.name = name;
        it.value = std::abs(value);
        it.ratio = it.value / p.omega0;
        it.pass = it.ratio <= threshold;
        rep.items.push_back(it);
    };

    const double eps_O = p.epsilon_for(ModulationTarget::Omega);
    const double eps_g = p.epsilon_for(ModulationTarget::Coupling);
    add("eps_Omega", eps_O);
    add("g0*sqrt(m_max)", p.g0 * std::sqrt(double(std::max(m_max, 1))));
    add("eps_g*sqrt(m_max)", eps_g * std::sqrt(double(std::max(m_max, 1))));
    add("chi0*m_max", p.chi0 * std::max(m_max, 1));

    const ModulationTarget ks[2] = {ModulationTarget::Omega, ModulationTarget::Coupling};
    double sefs = 0.0;
    for (ModulationTarget k : ks) {
        if (p.epsilon_for(k) == 0.0) continue;
        const char* kn = (k == ModulationTarget::Omega) ? "Omega" : "g";
        for (int m = 1; m <= m_max; ++m) {
            for (Branch S : kBranches) {
                const double d_same =
                    detail::pi_or_zero(p, k, m, S, S) - detail::pi_or_zero(p, k, m, other(S), other(S));
                const double cross = detail::pi_or_zero(p, k, m, S, other(S));
                add("(" + std::string(kn) + ") |Pi_m,S,S - Pi_m,-S,-S| m=" + std::to_string(m), d_same);
                add("(" + std::string(kn) + ") |Pi_m,S,-S| m=" + std::to_string(m), cross);
                sefs = std::max(sefs, cross * cross / p.omega0);
                sefs = std::max(sefs, d_same * d_same / p.omega0);
                for (int dm : {-2, +2, -1, +1}) {
                    const int mm = m + dm;
                    if (mm < 1 || mm > m_max) continue;
                    const double d = detail::pi_or_zero(p, k, mm, S, S) -
                                     detail::pi_or_zero(p, k, m, other(S), other(S));
                    add("(" + std::string(kn) + ") |Pi_" + std::to_string(mm) + ",S,S - Pi_" +
                            std::to_string(m) + ",-S,-S|",
                        d);
                    if (dm == -2 || dm == +2) sefs = std::max(sefs, d * d / p.omega0);
                }
            }
        }
    }
    for (int m = 0; m <= m_max; ++m) {
        for (Branch T : kBranches) {
            for (Branch S : kBranches) {
                add("|g0*Lambda| p=" + std::to_string(m + 2),
                    p.g0 * lambda_element(p, m + 2, T, S));
                add("|chi0*L| p=" + std::to_string(m + 2), p.chi0 * l_element(p, m + 2, T, S));
            }
            if (m == 0) break; // lower manifold is the ground level: T is inert
        }
    }
    rep.sefs_order = sefs;
    return rep;
}

} // namespace nsqed
