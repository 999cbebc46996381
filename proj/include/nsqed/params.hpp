// params.hpp — System parameters, detuning combinations, and structured errors

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsqed {

// Which system parameter carries the harmonic modulation X = X0 + eps*sin(eta*t).
enum class ModulationTarget { Omega, Coupling, None };

inline const char* to_string(ModulationTarget k) {
    switch (k) {
        case ModulationTarget::Omega:    return "Omega";
        case ModulationTarget::Coupling: return "Coupling";
        case ModulationTarget::None:     return "None";
    }
    return "?";
}

// Thrown when a formula denominator lands on a resonance/degeneracy.
struct DegeneracyError : std::runtime_error {
    explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when population leaks into the top Fock level beyond tolerance.
struct TruncationError : std::runtime_error {
    int suggested_n_max;
    TruncationError(const std::string& what, int suggested)
        : std::runtime_error(what), suggested_n_max(suggested) {}
};

// Thrown by the scenario layer on malformed configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an integrator or root/peak finder fails to meet its contract.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the perturbative-validity gate fails (overridable at the CLI).
struct ValidityError : std::runtime_error {
    explicit ValidityError(const std::string& what) : std::runtime_error(what) {}
};

// All quantities are angular frequencies in units of omega0 (hbar = 1).
struct SystemParams {
    double omega0{1.0};   // cavity frequency
    double Omega0{1.0};   // qubit transition frequency
    double g0{0.0};       // atom-field coupling
    double chi0{0.0};     // squeezing coefficient

    ModulationTarget modulation_target{ModulationTarget::None};
    double epsilon{0.0};  // modulation depth of the selected target
    double eta{0.0};      // modulation angular frequency; waveform fixed to sin(eta*t)

    double kappa{0.0};    // cavity decay
    double gamma{0.0};    // qubit decay
    double gamma_phi{0.0};// pure dephasing

    int n_qubits{1};

    void validate() const {
        if (!(omega0 > 0.0)) throw std::invalid_argument("SystemParams: omega0 must be > 0");
        if (g0 < 0.0) throw std::invalid_argument("SystemParams: g0 must be >= 0");
        if (epsilon < 0.0) throw std::invalid_argument("SystemParams: epsilon must be >= 0");
        if (eta < 0.0) throw std::invalid_argument("SystemParams: eta must be >= 0");
        if (kappa < 0.0 || gamma < 0.0 || gamma_phi < 0.0)
            throw std::invalid_argument("SystemParams: dissipation rates must be >= 0");
        if (n_qubits < 1) throw std::invalid_argument("SystemParams: n_qubits must be >= 1");
    }

    // Modulation depth seen by channel k; zero unless k is the modulated parameter.
    double epsilon_for(ModulationTarget k) const {
        return (modulation_target == k) ? epsilon : 0.0;
    }

    double delta_minus() const { return omega0 - Omega0; }
    double delta_plus()  const { return omega0 + Omega0; }

    // delta_- = g0^2/Delta_-; undefined on resonance.
    double small_delta_minus() const {
        require_detuned("small_delta_minus");
        return g0 * g0 / delta_minus();
    }
    double small_delta_plus() const { return g0 * g0 / delta_plus(); }
    double delta_chi() const { return 4.0 * chi0 * chi0 / delta_plus(); }

    // Kerr strength alpha = g0^4/Delta_-^3.
    double kerr_alpha() const {
        require_detuned("kerr_alpha");
        const double d = delta_minus();
        return std::pow(g0, 4) / (d * d * d);
    }

    // Detuning symbol D = Delta_-/|Delta_-|.
    int detuning_symbol() const {
        require_detuned("detuning_symbol");
        return delta_minus() > 0.0 ? +1 : -1;
    }

private:
    void require_detuned(const char* who) const {
        if (std::abs(delta_minus()) < 1e-12 * omega0)
            throw DegeneracyError(std::string(who) + ": undefined at Delta_- = 0");
    }
};

// Branch sign S = +/- labelling the two dressed states of an excitation manifold.
enum class Branch : int { Plus = +1, Minus = -1 };

inline int sign_of(Branch s) { return static_cast<int>(s); }
inline Branch other(Branch s) { return s == Branch::Plus ? Branch::Minus : Branch::Plus; }
inline const char* to_string(Branch s) { return s == Branch::Plus ? "+" : "-"; }

constexpr Branch kBranches[2] = {Branch::Plus, Branch::Minus};

} // namespace nsqed
