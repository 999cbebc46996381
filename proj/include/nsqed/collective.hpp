// collective.hpp — Large-N collective model: Holstein-Primakoff quadratic
// Hamiltonians, Heisenberg-picture transform, ansatz correction functions,
// effective resonance generators and Gaussian moment propagation.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

#include "nsqed/ode.hpp"
#include "nsqed/operators.hpp"
#include "nsqed/params.hpp"
#include "nsqed/spectrum.hpp"

namespace nsqed::collective {

using nsqed::cplx;

struct CollectiveParams {
    SystemParams base;     // per-qubit parameters; base.n_qubits = N
    int N{1};
    double g_tilde0{0.0};  // sqrt(N) g0
    double eps_omega{0.0};
    double eps_g_tilde{0.0}; // sqrt(N) eps_g

    double omega0() const { return base.omega0; }
    double Omega0() const { return base.Omega0; }
    double chi0() const { return base.chi0; }
    double eta() const { return base.eta; }
    double delta_minus() const { return base.delta_minus(); }
    double delta_plus() const { return base.delta_plus(); }
    double beta() const {
        const double d = delta_minus();
        return std::sqrt(d * d + 4.0 * g_tilde0 * g_tilde0);
    }
    double beta_plus() const { return 0.5 * (beta() + delta_minus()); }
    double beta_minus() const { return 0.5 * (beta() - delta_minus()); }
    double delta_tilde_plus() const { return g_tilde0 * g_tilde0 / delta_plus(); }
    double delta_tilde_minus() const {
        if (std::abs(delta_minus()) < 1e-12 * omega0())
            throw DegeneracyError("delta_tilde_minus: undefined at Delta_- = 0");
        return g_tilde0 * g_tilde0 / delta_minus();
    }
    double delta_chi() const { return base.delta_chi(); }
};

inline CollectiveParams make_collective(const SystemParams& base) {
    base.validate();
    CollectiveParams cp;
    cp.base = base;
    cp.N = base.n_qubits;
    const double root = std::sqrt(double(base.n_qubits));
    cp.g_tilde0 = root * base.g0;
    cp.eps_omega = base.epsilon_for(ModulationTarget::Omega);
    cp.eps_g_tilde = root * base.epsilon_for(ModulationTarget::Coupling);
    return cp;
}

// ------------------------------ Quadratic forms ------------------------------

// One term c e^{-i w t} M + h.c. of a two-mode quadratic Hamiltonian.
enum class Monomial { AA, BB, AB, AdB, NA, NB };

struct QuadraticTerm {
    Monomial kind{Monomial::AA};
    cplx coeff{0.0};
    double freq{0.0};
};

struct QuadraticGenerator {
    std::vector<QuadraticTerm> terms;

    bool empty() const { return terms.empty(); }

    // Largest coefficient magnitude over all terms.
    double max_coeff() const {
        double m = 0.0;
        for (const auto& t : terms) m = std::max(m, std::abs(t.coeff));
        return m;
    }

    // Real symmetric matrix G(t) of H = (1/2) xi^T G xi with xi = (qA,pA,qB,pB),
    // A = (q + i p)/sqrt(2).
    Eigen::Matrix4d quadrature_form(double t) const {
        Eigen::Matrix4d G = Eigen::Matrix4d::Zero();
        auto addAA = [&](int q, int p, cplx z) {
            G(q, q) += 2.0 * z.real();
            G(p, p) -= 2.0 * z.real();
            G(q, p) -= 2.0 * z.imag();
            G(p, q) -= 2.0 * z.imag();
        };
        auto addN = [&](int q, int p, cplx z) {
            G(q, q) += 2.0 * z.real();
            G(p, p) += 2.0 * z.real();
        };
        for (const auto& term : terms) {
            const cplx z = term.coeff * std::exp(cplx(0.0, -term.freq * t));
            switch (term.kind) {
                case Monomial::AA: addAA(0, 1, z); break;
                case Monomial::BB: addAA(2, 3, z); break;
                case Monomial::AB:
                    G(0, 2) += z.real();
                    G(2, 0) += z.real();
                    G(1, 3) -= z.real();
                    G(3, 1) -= z.real();
                    G(0, 3) -= z.imag();
                    G(3, 0) -= z.imag();
                    G(1, 2) -= z.imag();
                    G(2, 1) -= z.imag();
                    break;
                case Monomial::AdB:
                    G(0, 2) += z.real();
                    G(2, 0) += z.real();
                    G(1, 3) += z.real();
                    G(3, 1) += z.real();
                    G(0, 3) -= z.imag();
                    G(3, 0) -= z.imag();
                    G(1, 2) += z.imag();
                    G(2, 1) += z.imag();
                    break;
                case Monomial::NA: addN(0, 1, z); break;
                case Monomial::NB: addN(2, 3, z); break;
            }
        }
        return G;
    }

    // Hermiticity of the implied Hamiltonian holds by construction (every term
    // carries its conjugate); exposed for tests via the quadrature form.
};

inline Eigen::Matrix4d symplectic_form() {
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 1) = 1.0;
    J(1, 0) = -1.0;
    J(2, 3) = 1.0;
    J(3, 2) = -1.0;
    return J;
}

// ---------------------------- Hamiltonian split ------------------------------

struct NonGaussianDescriptor {
    double prefactor{0.0}; // -g_tilde/(2N), recorded but never evolved
    std::string form;
};

struct HpSplit {
    QuadraticGenerator H_jc;
    QuadraticGenerator H_g;
    QuadraticGenerator H_m;
    NonGaussianDescriptor H_ng;
};

// First order in b†b/N: H = H_JC + H_G + H_NG + H_m over the photon mode a
// and the collective atomic mode b.
inline HpSplit hp_hamiltonian_split(const CollectiveParams& cp) {
    HpSplit out;
    out.H_jc.terms = {{Monomial::NA, 0.5 * cp.omega0(), 0.0},
                      {Monomial::NB, 0.5 * cp.Omega0(), 0.0},
                      {Monomial::AdB, cp.g_tilde0, 0.0}};
    out.H_g.terms = {{Monomial::AB, cp.g_tilde0, 0.0}, {Monomial::AA, cplx(0.0, -cp.chi0()), 0.0}};
    if (cp.eps_g_tilde != 0.0) {
        // the counter-rotating part of the g-modulation rides with H_G
        out.H_g.terms.push_back({Monomial::AB, cplx(0.0, 0.5 * cp.eps_g_tilde), cp.eta()});
        out.H_g.terms.push_back({Monomial::AB, cplx(0.0, -0.5 * cp.eps_g_tilde), -cp.eta()});
        out.H_m.terms.push_back({Monomial::AdB, cplx(0.0, 0.5 * cp.eps_g_tilde), cp.eta()});
        out.H_m.terms.push_back({Monomial::AdB, cplx(0.0, -0.5 * cp.eps_g_tilde), -cp.eta()});
    }
    if (cp.eps_omega != 0.0)
        out.H_m.terms.push_back({Monomial::NB, cplx(0.0, 0.5 * cp.eps_omega), cp.eta()});
    out.H_ng.prefactor = -cp.g_tilde0 / (2.0 * cp.N);
    out.H_ng.form = "(a + a†)(b†² b + b† b²)";
    return out;
}

// --------------------------- Heisenberg transform ----------------------------

// 2x2 map (A_h, B_h) -> (a, b) of the counter-rotation-free JC evolution.
inline Eigen::Matrix2cd heisenberg_transform(const CollectiveParams& cp, double t) {
    const double b = cp.beta();
    if (!(b > 0.0)) throw DegeneracyError("heisenberg_transform: beta = 0");
    const double bp = cp.beta_plus(), bm = cp.beta_minus(), g = cp.g_tilde0;
    const cplx pre = std::exp(cplx(0.0, -0.5 * cp.delta_plus() * t)) / b;
    const cplx em = std::exp(cplx(0.0, -0.5 * b * t));
    const cplx ep = std::exp(cplx(0.0, +0.5 * b * t));
    Eigen::Matrix2cd M;
    M(0, 0) = pre * (bp * em + bm * ep);
    M(0, 1) = pre * g * (em - ep);
    M(1, 0) = pre * g * (em - ep);
    M(1, 1) = pre * (bm * em + bp * ep);
    return M;
}

// ---------------------------- Ansatz corrections -----------------------------

struct AnsatzCorrections {
    double F_A{0.0};
    double F_B{0.0};
    cplx F_AB{0.0};
    cplx F_2{0.0};
};

namespace detail {

inline cplx osc_frac(double w, double den, double t) {
    return (std::exp(cplx(0.0, w * t)) - 1.0) / den;
}

// adaptive Simpson on a complex integrand
template <class F>
cplx adaptive_simpson(F&& f, double a, double b, double rel_tol, int depth = 0,
                      cplx fa = {0, 0}, cplx fm = {0, 0}, cplx fb = {0, 0}, bool seeded = false) {
    if (!seeded) {
        fa = f(a);
        fm = f(0.5 * (a + b));
        fb = f(b);
    }
    const double m = 0.5 * (a + b);
    const cplx left_m = f(0.5 * (a + m));
    const cplx right_m = f(0.5 * (m + b));
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * left_m + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * right_m + fb);
    const cplx refined = left + right;
    if (depth > 28 ||
        std::abs(refined - whole) <= 15.0 * rel_tol * std::max(1.0, std::abs(refined)))
        return refined + (refined - whole) / 15.0;
    return adaptive_simpson(f, a, m, rel_tol, depth + 1, fa, left_m, fm, true) +
           adaptive_simpson(f, m, b, rel_tol, depth + 1, fm, right_m, fb, true);
}

} // namespace detail

// The small c-number functions of the Heisenberg ansatz; F_2 is evaluated by
// adaptive quadrature of its defining integral (relative tolerance 1e-8).
inline AnsatzCorrections ansatz_corrections(const CollectiveParams& cp, ModulationTarget k,
                                            double t, double quad_tol = 1e-8) {
    if (k != ModulationTarget::Omega && k != ModulationTarget::Coupling)
        throw std::invalid_argument("ansatz_corrections: k must be Omega or Coupling");
    const double b = cp.beta();
    const double eta = cp.eta();
    const double w0 = cp.omega0();
    nsqed::detail::guard_denominator(eta, w0, "ansatz: eta");
    nsqed::detail::guard_denominator(eta - b, w0, "ansatz: eta - beta");
    nsqed::detail::guard_denominator(eta + b, w0, "ansatz: eta + beta");
    nsqed::detail::guard_denominator(eta - 2.0 * b, w0, "ansatz: eta - 2 beta");

    const double d = cp.delta_minus();
    const double g = cp.g_tilde0;
    const double bp = cp.beta_plus(), bm = cp.beta_minus();
    const bool omega_mod = (k == ModulationTarget::Omega);
    const double eps = omega_mod ? cp.eps_omega : cp.eps_g_tilde;

    const double prefA = omega_mod ? eps * g * g / (2.0 * b * b) : eps * g * d / (2.0 * b * b);
    const double prefAB = omega_mod ? eps * g / (2.0 * b * b) : eps * d / (2.0 * b * b);

    using detail::osc_frac;
    AnsatzCorrections out;
    {
        const cplx half = 2.0 * osc_frac(eta, eta, t) - osc_frac(eta + b, eta + b, t) -
                          osc_frac(eta - b, eta - b, t);
        out.F_A = prefA * 2.0 * half.real();
    }
    {
        cplx half;
        if (omega_mod)
            half = (2.0 + d * d / (g * g)) * osc_frac(eta, eta, t) +
                   osc_frac(eta + b, eta + b, t) + osc_frac(eta - b, eta - b, t);
        else
            half = -2.0 * osc_frac(eta, eta, t) + osc_frac(eta + b, eta + b, t) +
                   osc_frac(eta - b, eta - b, t);
        out.F_B = prefA * 2.0 * half.real();
    }
    const double lead = omega_mod ? -d : 4.0 * cp.delta_tilde_minus();
    {
        cplx sum{0.0, 0.0};
        for (int S : {+1, -1}) {
            sum += lead * osc_frac(S * eta, eta, t);
            sum += bp * osc_frac(S * (eta + S * b), eta + S * b, t);
            sum -= bm * osc_frac(S * (eta - S * b), eta - S * b, t);
        }
        out.F_AB = prefAB * sum;
    }
    if (t > 0.0) {
        auto fa_minus_fb = [&](double tau) {
            const cplx half = 2.0 * osc_frac(eta, eta, tau) - osc_frac(eta + b, eta + b, tau) -
                              osc_frac(eta - b, eta - b, tau);
            cplx halfB;
            if (omega_mod)
                halfB = (2.0 + d * d / (g * g)) * osc_frac(eta, eta, tau) +
                        osc_frac(eta + b, eta + b, tau) + osc_frac(eta - b, eta - b, tau);
            else
                halfB = -2.0 * osc_frac(eta, eta, tau) + osc_frac(eta + b, eta + b, tau) +
                        osc_frac(eta - b, eta - b, tau);
            return prefA * 2.0 * (half - halfB).real();
        };
        auto integrand = [&](double tau) -> cplx {
            cplx sum{0.0, 0.0};
            for (int S : {+1, -1}) {
                sum += lead * std::exp(cplx(0.0, S * eta * tau));
                sum += bp * std::exp(cplx(0.0, S * (eta + S * b) * tau));
                sum -= bm * std::exp(cplx(0.0, S * (eta - S * b) * tau));
            }
            const cplx anti = sum - std::conj(sum);
            return fa_minus_fb(tau) * anti;
        };
        out.F_2 = prefAB * detail::adaptive_simpson(integrand, 0.0, t, quad_tol);
    }
    return out;
}

// ------------------------- Effective resonance forms -------------------------

enum class CollectiveRegime { ResonantCenter, ResonantSplitPlus, ResonantSplitMinus, AJC, DCE, InverseDCE };

inline const char* to_string(CollectiveRegime r) {
    switch (r) {
        case CollectiveRegime::ResonantCenter:     return "resonant-center";
        case CollectiveRegime::ResonantSplitPlus:  return "resonant-split+";
        case CollectiveRegime::ResonantSplitMinus: return "resonant-split-";
        case CollectiveRegime::AJC:                return "ajc";
        case CollectiveRegime::DCE:                return "dce";
        case CollectiveRegime::InverseDCE:         return "inverse-dce";
    }
    return "?";
}

// Modulation frequency that nulls the printed slow phase of the generator
// (residual shifts are located numerically, as in the single-qubit model).
inline double collective_resonant_eta(const CollectiveParams& cp, CollectiveRegime regime,
                                      int order) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("collective_resonant_eta: order must be 1 or 2");
    const double w0 = cp.omega0(), Om = cp.Omega0(), g = cp.g_tilde0;
    const double dp = cp.delta_tilde_plus();
    double num = 0.0;
    switch (regime) {
        case CollectiveRegime::ResonantCenter:     num = 2.0 * (w0 - dp); break;
        case CollectiveRegime::ResonantSplitPlus:  num = 2.0 * (w0 + g - dp); break;
        case CollectiveRegime::ResonantSplitMinus: num = 2.0 * (w0 - g - dp); break;
        case CollectiveRegime::AJC:                num = cp.delta_plus() - 2.0 * dp; break;
        case CollectiveRegime::DCE:                num = 2.0 * (w0 + cp.delta_tilde_minus() - dp); break;
        case CollectiveRegime::InverseDCE:         num = 2.0 * (Om - cp.delta_tilde_minus() - dp); break;
    }
    return num / order;
}

namespace detail {
inline void require_resonant(const CollectiveParams& cp, const char* who) {
    if (std::abs(cp.delta_minus()) > 1e-9 * cp.omega0())
        throw std::invalid_argument(std::string(who) + ": requires Delta_- = 0");
}
inline void require_dispersive(const CollectiveParams& cp, const char* who,
                               double max_ratio = 0.5) {
    const double d = std::abs(cp.delta_minus());
    if (d < 1e-12 * cp.omega0() || 2.0 * cp.g_tilde0 / d > max_ratio)
        throw std::invalid_argument(std::string(who) +
                                    ": requires the dispersive regime |Delta_-|/2 >> g_tilde0");
}
} // namespace detail

// Effective quadratic generators of the appendix resonance catalogue. The
// detuning phases e^{-it(...)} are kept explicitly; chi0 adds delta_chi
// sub-shifts on the A², AB monomials.
inline QuadraticGenerator effective_hamiltonian(const CollectiveParams& cp,
                                                CollectiveRegime regime, int order,
                                                ModulationTarget k) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("effective_hamiltonian: order must be 1 or 2");
    if (k != ModulationTarget::Omega && k != ModulationTarget::Coupling)
        throw std::invalid_argument("effective_hamiltonian: k must be Omega or Coupling");
    const bool om = (k == ModulationTarget::Omega);
    const double eps = om ? cp.eps_omega : cp.eps_g_tilde;
    QuadraticGenerator gen;
    const double w0 = cp.omega0(), Om0 = cp.Omega0(), g = cp.g_tilde0;
    const double eta = cp.eta();
    const double dp = cp.delta_tilde_plus();
    const double dchi = cp.delta_chi();
    const double Dp = cp.delta_plus();

    // push the bracket [cA A² e^{2it dchi} + cAB AB e^{it dchi} + cB B²] e^{-i w t}
    auto push_bracket = [&](cplx pre, cplx cA, cplx cAB, cplx cB, double w) {
        if (std::abs(pre * cA) > 0.0) gen.terms.push_back({Monomial::AA, pre * cA, w - 2.0 * dchi});
        if (std::abs(pre * cAB) > 0.0) gen.terms.push_back({Monomial::AB, pre * cAB, w - dchi});
        if (std::abs(pre * cB) > 0.0) gen.terms.push_back({Monomial::BB, pre * cB, w});
    };

    switch (regime) {
        case CollectiveRegime::ResonantCenter: {
            detail::require_resonant(cp, "effective_hamiltonian(resonant-center)");
            if (!om) return gen; // H1, H2 vanish for coupling modulation here
            const double r = eps / (4.0 * Om0);
            if (order == 1) {
                const cplx pre = cplx(0.0, 1.0) * g * (g / (2.0 * w0)) * r;
                // bracket [A² e^{2it dchi} - B²] with phase 2 w0 - 2 dp - eta
                push_bracket(pre, 1.0, 0.0, -1.0, 2.0 * w0 - 2.0 * dp - eta);
            } else {
                const cplx pre = -g * (g / (2.0 * w0)) * r * r * 8.0;
                push_bracket(pre, 1.0, 0.0, -1.0, 2.0 * (w0 - dp - eta));
            }
            break;
        }
        case CollectiveRegime::ResonantSplitPlus:
        case CollectiveRegime::ResonantSplitMinus: {
            detail::require_resonant(cp, "effective_hamiltonian(resonant-split)");
            const double sgn = (regime == CollectiveRegime::ResonantSplitPlus) ? +1.0 : -1.0;
            const double w1 = 2.0 * w0 + sgn * 2.0 * g - 2.0 * dp - eta;
            const double w2 = 2.0 * (w0 + sgn * g - dp - eta);
            if (om) {
                const double r = eps / (8.0 * Om0);
                if (order == 1)
                    push_bracket(cplx(0.0, 1.0) * g * r, sgn * 0.5, 1.0, sgn * 0.5, w1);
                else
                    push_bracket(-g * r * r * 0.25, sgn * 5.0, 14.0, sgn * 5.0, w2);
            } else {
                const double r = eps / (2.0 * g);
                if (order == 1)
                    push_bracket(cplx(0.0, -0.5) * g * r, sgn * 0.5, 1.0, sgn * 0.5, w1);
                else
                    push_bracket(0.5 * g * r * r * (2.0 * g / w0), 0.5, sgn * 1.0, 0.5, w2);
            }
            break;
        }
        case CollectiveRegime::AJC: {
            detail::require_dispersive(cp, "effective_hamiltonian(ajc)");
            const double d = cp.delta_minus();
            const double w1 = Dp - 2.0 * dp - eta;
            const double w2 = Dp - 2.0 * dp - 2.0 * eta;
            const cplx cA = -g / d, cB = +g / d;
            if (om) {
                const double r = eps / (2.0 * Dp);
                if (order == 1)
                    push_bracket(cplx(0.0, 1.0) * g * r, cA, 1.0, cB, w1);
                else
                    push_bracket(-g * r * r * 2.0, cA, 1.0, cB, w2);
            } else {
                const double r = eps / (2.0 * g);
                if (order == 1)
                    push_bracket(cplx(0.0, -1.0) * g * r, cA, 1.0, cB, w1);
                else
                    push_bracket(-g * r * r * std::pow(2.0 * g / Dp, 2) * 5.0, cA, 1.0, cB, w2);
            }
            break;
        }
        case CollectiveRegime::DCE: {
            detail::require_dispersive(cp, "effective_hamiltonian(dce)");
            const double d = cp.delta_minus();
            const double dm = cp.delta_tilde_minus();
            const double w1 = 2.0 * w0 + 2.0 * dm - 2.0 * dp - eta;
            const double w2 = 2.0 * (w0 + dm - dp - eta);
            if (om) {
                const double r = eps / (2.0 * Om0);
                if (order == 1)
                    push_bracket(cplx(0.0, 1.0) * dm * (Om0 / Dp) * r, 1.0, 2.0 * g / d,
                                 (g / d) * (g / d), w1);
                else
                    push_bracket(-dm * (Om0 / Dp) * r * r, 1.0, 4.0 * g / d,
                                 3.0 * (g / d) * (g / d), w2);
            } else {
                const double r = eps / (2.0 * g);
                if (order == 1)
                    push_bracket(cplx(0.0, -2.0) * dm * (Om0 / Dp) * r, 1.0, 2.0 * g / d,
                                 (g / d) * (g / d), w1);
                else
                    push_bracket(2.0 * dm * (Om0 / Dp) * r * r * (Dp * d / (2.0 * Om0 * Om0)), 1.0,
                                 2.0 * g / d, (g / d) * (g / d), w2);
            }
            break;
        }
        case CollectiveRegime::InverseDCE: {
            detail::require_dispersive(cp, "effective_hamiltonian(inverse-dce)");
            const double d = cp.delta_minus();
            const double dm = cp.delta_tilde_minus();
            const double w1 = 2.0 * Om0 - 2.0 * dm - 2.0 * dp - eta;
            const double w2 = 2.0 * (Om0 - dm - dp - eta);
            // bracket here is [B² - (2g/d) AB e^{it dchi} + (g/d)² A² e^{2it dchi}]
            if (om) {
                const double r = eps / (2.0 * Om0);
                if (order == 1)
                    push_bracket(cplx(0.0, -1.0) * dm * (w0 / Dp) * r, (g / d) * (g / d),
                                 -2.0 * g / d, 1.0, w1);
                else
                    push_bracket(dm * (w0 / Dp) * r * r, 3.0 * (g / d) * (g / d), -4.0 * g / d,
                                 1.0, w2);
            } else {
                const double r = eps / (2.0 * g);
                if (order == 1)
                    push_bracket(cplx(0.0, 2.0) * dm * (w0 / Dp) * r, (g / d) * (g / d),
                                 -2.0 * g / d, 1.0, w1);
                else
                    push_bracket(2.0 * dm * (w0 / Dp) * r * r * (Dp * d / (2.0 * w0 * w0)),
                                 (g / d) * (g / d), -2.0 * g / d, 1.0, w2);
            }
            break;
        }
    }
    return gen;
}

// ------------------------------ Gaussian states -------------------------------

struct GaussianState {
    Eigen::Vector4d mean{Eigen::Vector4d::Zero()};
    Eigen::Matrix4d cov{0.5 * Eigen::Matrix4d::Identity()};

    double occupation_a() const { return 0.5 * (cov(0, 0) + cov(1, 1) + mean(0) * mean(0) + mean(1) * mean(1) - 1.0); }
    double occupation_b() const { return 0.5 * (cov(2, 2) + cov(3, 3) + mean(2) * mean(2) + mean(3) * mean(3) - 1.0); }
};

inline GaussianState vacuum_state() { return {}; }

// symplectic eigenvalues of a 4x4 covariance matrix
inline Eigen::Vector2d symplectic_eigenvalues(const Eigen::Matrix4d& cov) {
    const Eigen::Matrix4d m = symplectic_form() * cov;
    Eigen::EigenSolver<Eigen::Matrix4d> es(m);
    std::vector<double> mags;
    for (int i = 0; i < 4; ++i) mags.push_back(std::abs(es.eigenvalues()(i).imag()));
    std::sort(mags.begin(), mags.end());
    return {mags[0], mags[2]}; // pairs (v, v)
}

struct GaussianTrajectory {
    std::vector<double> times;
    std::vector<double> n_a, n_b;
    std::vector<GaussianState> states;
    OdeStats stats;
};

// Quadratic Hamiltonians close on first and second moments:
//   mu' = J G(t) mu,  V' = (J G) V + V (J G)^T.
inline GaussianTrajectory evolve_gaussian(const QuadraticGenerator& gen, const GaussianState& s0,
                                          double t0, double t1, double rtol = 1e-10,
                                          int samples = 200) {
    const Eigen::Matrix4d J = symplectic_form();
    auto rhs = [&](double t, const Vector& y) -> Vector {
        const Eigen::Matrix4d A = J * gen.quadrature_form(t);
        Eigen::Vector4d mu;
        Eigen::Matrix4d V;
        for (int i = 0; i < 4; ++i) mu(i) = y(i).real();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) V(i, j) = y(4 + 4 * i + j).real();
        const Eigen::Vector4d dmu = A * mu;
        const Eigen::Matrix4d dV = A * V + V * A.transpose();
        Vector dy(20);
        for (int i = 0; i < 4; ++i) dy(i) = dmu(i);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) dy(4 + 4 * i + j) = dV(i, j);
        return dy;
    };

    Vector y(20);
    for (int i = 0; i < 4; ++i) y(i) = s0.mean(i);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) y(4 + 4 * i + j) = s0.cov(i, j);

    GaussianTrajectory traj;
    std::vector<double> ts(samples);
    for (int i = 0; i < samples; ++i) ts[i] = t0 + (t1 - t0) * double(i) / double(samples - 1);
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-3;
    traj.stats = integrate_dopri5(rhs, y, t0, ts, opts, [&](double t, Vector& yv) {
        GaussianState s;
        for (int i = 0; i < 4; ++i) s.mean(i) = yv(i).real();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s.cov(i, j) = yv(4 + 4 * i + j).real();
        s.cov = 0.5 * (s.cov + s.cov.transpose().eval());
        const auto nu = symplectic_eigenvalues(s.cov);
        if (nu(0) < 0.5 - 1e-6)
            throw SolverError("evolve_gaussian: uncertainty relation violated (nu_min = " +
                              std::to_string(nu(0)) + "); tighten rtol");
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) yv(4 + 4 * i + j) = s.cov(i, j);
        traj.times.push_back(t);
        traj.n_a.push_back(s.occupation_a());
        traj.n_b.push_back(s.occupation_b());
        traj.states.push_back(s);
    });
    return traj;
}

// Collective validity: the bosonization is first order in b†b/N.
inline void check_collective_occupation(const CollectiveParams& cp, const GaussianTrajectory& traj,
                                        double max_fraction = 0.1) {
    for (double nb : traj.n_b) {
        if (nb / cp.N > max_fraction)
            throw std::invalid_argument(
                "collective model validity: <B†B>/N exceeded " + std::to_string(max_fraction));
    }
}

} // namespace nsqed::collective
