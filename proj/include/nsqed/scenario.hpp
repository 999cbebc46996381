// scenario.hpp — Configuration-driven runner: scenario execution, resonance
// tuning, parameter sweeps and serialized outputs.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsqed/collective.hpp"
#include "nsqed/dynamics.hpp"
#include "nsqed/effective.hpp"
#include "nsqed/rates.hpp"
#include "nsqed/spectrum.hpp"
#include "nsqed/steady.hpp"

namespace nsqed {

enum class ScenarioRegime { Resonant, AJC, DCE, AntiDCE };
enum class EvolutionType { Lindblad, Schrodinger, Effective };

const char* to_string(ScenarioRegime r);
const char* to_string(EvolutionType t);

struct InitialStateSpec {
    enum class Kind { Zes, Dressed, Fock } kind{Kind::Zes};
    int m{0};                  // dressed level
    Branch S{Branch::Plus};    // dressed branch
    bool excited{false};       // fock qubit flag
    int photons{0};            // fock photon number

    int excitations() const {
        switch (kind) {
            case Kind::Zes: return 0;
            case Kind::Dressed: return m;
            case Kind::Fock: return photons + (excited ? 1 : 0);
        }
        return 0;
    }
};

struct TuneSettings {
    bool enabled{false};
    double window_delta_plus{5.0}; // half-width in units of delta_+ (divided by K)
    double resolution{1e-6};       // frequency resolution in units of omega0
};

struct CollectiveSettings {
    collective::CollectiveRegime regime{collective::CollectiveRegime::DCE};
    double t_final{0.0}; // 0: automatic from the leading squeezing rate
    int samples{400};
    double rtol{1e-10};
};

struct ScenarioConfig {
    SystemParams params;      // params.eta meaningful only when !eta_auto
    bool eta_auto{true};
    ScenarioRegime regime{ScenarioRegime::Resonant};
    int order{1};
    InitialStateSpec initial;
    int n_max{0};             // 0: regime default
    bool n_max_explicit{false};
    int ladder_m_max{12};
    EvolutionType evolution{EvolutionType::Lindblad};
    double t_final{0.0};
    bool t_auto{true};
    int samples{2000};
    double rtol{1e-10};
    Frame frame{Frame::Interaction};
    TuneSettings tune;
    double validity_threshold{0.1};
    int validity_m{4};
    std::optional<double> omega0_over_2pi_ghz;
    std::optional<CollectiveSettings> collective_settings;
    std::string raw_json;     // canonical echo of the parsed configuration
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config_text(const std::string& text);

// Default truncation for the regime (raised automatically on truncation errors
// unless the configuration pins n_max).
int default_n_max(ScenarioRegime regime);

// Branch of the driven target level (2, .) for the regime; AntiDCE uses the
// initial excitation number as the source level.
Branch target_branch(const SystemParams& p, ScenarioRegime regime);

// (lambda_bar_target - lambda_bar_source)/K for the configured transition.
double predicted_eta(const ScenarioConfig& cfg, const SpectrumTable& spectrum);

struct ResonanceTuneResult {
    double eta_star{0.0};
    double predicted{0.0};     // (lambda_bar difference)/K
    double sefs_shift{0.0};    // K eta* - corrected-difference
    double caption_shift{0.0}; // K eta* - bare-difference
    int order{1};
    std::vector<std::pair<double, double>> objective; // (eta, max_t[1 - P_g0])
};

// Unitary-probe maximization of max_t[1 - P_g0] by coarse grid plus golden
// section, to a frequency resolution of cfg.tune.resolution * omega0.
ResonanceTuneResult tune_resonance(const ScenarioConfig& cfg);

struct RunArtifacts {
    std::filesystem::path csv;
    std::filesystem::path meta;
    TimeSeries series;
    double eta_used{0.0};
    double theta1{0.0}; // |Theta| of the driven transition at the 1-order eta
    double theta2{0.0}; // |Phi| at the 2-order eta
    ValidityReport validity;
};

RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                          bool force_validity = false);

struct SweepRow {
    double axis_value{0.0};
    bool ok{false};
    std::string error;
    double max_one_minus_pg0{0.0};
    double final_mean_n{0.0};
    double final_p_e{0.0};
    double final_p_g0{0.0};
    double eta_used{0.0};
};

struct SweepResult {
    std::string axis;
    std::vector<SweepRow> rows;
    std::filesystem::path csv;
};

SweepResult sweep(const ScenarioConfig& cfg, const std::string& axis,
                  const std::vector<double>& grid, const std::filesystem::path& out_dir,
                  bool force_validity = false);

struct SteadyArtifacts {
    SteadyStateResult numerical;
    std::optional<AsymptoticResult> closed_form; // resonant/AJC equal-rate regimes only
    double theta_used{0.0};
    std::filesystem::path meta;
};

SteadyArtifacts run_steady(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                           bool force_validity = false);

struct CollectiveArtifacts {
    collective::GaussianTrajectory trajectory;
    std::filesystem::path csv;
    std::filesystem::path meta;
};

CollectiveArtifacts run_collective(const ScenarioConfig& cfg,
                                   const std::filesystem::path& out_dir);

// Writes columns with 12 significant digits, '.' decimal separator and "\n"
// line endings; reruns with identical inputs produce identical bytes.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

} // namespace nsqed
