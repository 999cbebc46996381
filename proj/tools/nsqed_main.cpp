// nsqed_main.cpp — command-line front end: spectrum tables, rate tables,
// evolutions, resonance tuning, parameter sweeps, steady states and the
// collective model.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "nsqed/scenario.hpp"

using namespace nsqed;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitValidity = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir{"out"};
    bool force{false};
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_flag("--force", args.force, "run even if the validity check fails");
}

std::vector<double> parse_grid(const std::string& text) {
    // "start:stop:n" (inclusive linear grid) or comma-separated values
    const auto c1 = text.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw ConfigError("grid: expected start:stop:n or comma-separated values");
        const double start = std::stod(text.substr(0, c1));
        const double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        const int n = std::stoi(text.substr(c2 + 1));
        if (n < 1) throw ConfigError("grid: n must be >= 1");
        std::vector<double> grid(n);
        for (int i = 0; i < n; ++i)
            grid[i] = (n == 1) ? start : start + (stop - start) * double(i) / (n - 1);
        return grid;
    }
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    if (grid.empty()) throw ConfigError("grid: no values given");
    return grid;
}

void write_spectrum_csv(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                        int m_max) {
    std::filesystem::create_directories(out_dir);
    const auto table = build_spectrum(cfg.params, m_max);
    std::vector<std::vector<double>> cols(8);
    for (const auto& lv : table.levels) {
        cols[0].push_back(lv.m);
        cols[1].push_back(lv.m == 0 ? 0.0 : double(sign_of(lv.S)));
        cols[2].push_back(lv.lambda);
        cols[3].push_back(lv.beta);
        cols[4].push_back(lv.theta);
        cols[5].push_back(lv.nu);
        cols[6].push_back(lv.lambda_bar);
        cols[7].push_back(lv.s);
    }
    write_csv(out_dir / "spectrum.csv",
              {"m", "branch", "lambda", "beta", "theta", "nu", "lambda_bar", "s_amplitude"}, cols);
    std::printf("wrote %s (%zu levels)\n", (out_dir / "spectrum.csv").c_str(),
                table.levels.size());
}

void write_rates_csv(const ScenarioConfig& cfg_in, const std::filesystem::path& out_dir,
                     int m_max) {
    std::filesystem::create_directories(out_dir);
    ScenarioConfig cfg = cfg_in;
    if (cfg.eta_auto) {
        const auto spectrum = build_spectrum(cfg.params, m_max + 2);
        cfg.params.eta = predicted_eta(cfg, spectrum);
    }
    const auto table = build_rate_table(cfg.params, m_max);
    std::vector<std::vector<double>> cols(9);
    for (const auto& e : table.entries) {
        cols[0].push_back(e.m);
        cols[1].push_back(e.m == 2 ? 0.0 : double(sign_of(e.T)));
        cols[2].push_back(double(sign_of(e.S)));
        cols[3].push_back(e.theta.real());
        cols[4].push_back(e.theta.imag());
        cols[5].push_back(std::abs(e.theta));
        cols[6].push_back(e.phi.real());
        cols[7].push_back(e.phi.imag());
        cols[8].push_back(std::abs(e.phi));
    }
    write_csv(out_dir / "rates.csv",
              {"m", "branch_lower", "branch_upper", "re_theta", "im_theta", "abs_theta", "re_phi",
               "im_phi", "abs_phi"},
              cols);
    std::printf("wrote %s (eta = %.12g)\n", (out_dir / "rates.csv").c_str(), cfg.params.eta);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonstationary circuit-QED resonance toolkit"};
    app.require_subcommand(1);

    CommonArgs spectrum_args, rates_args, evolve_args, tune_args, sweep_args, steady_args,
        collective_args;
    int spectrum_m_max = 10, rates_m_max = 8;
    int order_override = 0;
    bool unitary = false, lindblad = false;
    std::string sweep_axis, sweep_grid;
    int tune_order = 0;

    auto* spectrum_cmd = app.add_subcommand("spectrum", "dressed levels and corrected frequencies");
    add_common(spectrum_cmd, spectrum_args);
    spectrum_cmd->add_option("--m-max", spectrum_m_max, "largest excitation number");

    auto* rates_cmd = app.add_subcommand("rates", "first- and second-order transition rates");
    add_common(rates_cmd, rates_args);
    rates_cmd->add_option("--m-max", rates_m_max, "largest target excitation number");

    auto* evolve_cmd = app.add_subcommand("evolve", "time evolution of the configured scenario");
    add_common(evolve_cmd, evolve_args);
    evolve_cmd->add_option("--order", order_override, "resonance order (1 or 2)")
        ->check(CLI::Range(1, 2));
    evolve_cmd->add_flag("--unitary", unitary, "force unitary evolution");
    evolve_cmd->add_flag("--lindblad", lindblad, "force dissipative evolution");

    auto* tune_cmd = app.add_subcommand("tune", "numerically locate the resonant eta");
    add_common(tune_cmd, tune_args);
    tune_cmd->add_option("--order", tune_order, "resonance order (1 or 2)")->check(CLI::Range(1, 2));

    auto* sweep_cmd = app.add_subcommand("sweep", "run the scenario over a parameter grid");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--axis", sweep_axis, "sweep axis, e.g. modulation.eta")->required();
    sweep_cmd->add_option("--grid", sweep_grid, "start:stop:n or comma-separated values")
        ->required();

    auto* steady_cmd = app.add_subcommand("steady", "numerical and closed-form steady state");
    add_common(steady_cmd, steady_args);

    auto* collective_cmd = app.add_subcommand("collective", "large-N Gaussian evolution");
    add_common(collective_cmd, collective_args);
    collective_cmd->add_option("--order", order_override, "resonance order (1 or 2)")
        ->check(CLI::Range(1, 2));

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum_cmd->parsed()) {
            write_spectrum_csv(load_config(spectrum_args.config_path), spectrum_args.out_dir,
                               spectrum_m_max);
        } else if (rates_cmd->parsed()) {
            write_rates_csv(load_config(rates_args.config_path), rates_args.out_dir, rates_m_max);
        } else if (evolve_cmd->parsed()) {
            ScenarioConfig cfg = load_config(evolve_args.config_path);
            if (order_override) cfg.order = order_override;
            if (unitary && lindblad) throw ConfigError("evolve: --unitary conflicts with --lindblad");
            if (unitary) cfg.evolution = EvolutionType::Schrodinger;
            if (lindblad) cfg.evolution = EvolutionType::Lindblad;
            const auto art = run_scenario(cfg, evolve_args.out_dir, evolve_args.force);
            std::printf("wrote %s (eta = %.12g, theta1 = %.6g, theta2 = %.6g)\n",
                        art.csv.c_str(), art.eta_used, art.theta1, art.theta2);
        } else if (tune_cmd->parsed()) {
            ScenarioConfig cfg = load_config(tune_args.config_path);
            if (tune_order) cfg.order = tune_order;
            const auto spectrum = build_spectrum(cfg.params, std::max(cfg.ladder_m_max, 4) + 2);
            if (cfg.eta_auto) cfg.params.eta = predicted_eta(cfg, spectrum);
            const auto result = tune_resonance(cfg);
            std::filesystem::create_directories(tune_args.out_dir);
            std::vector<std::vector<double>> cols(2);
            for (const auto& [eta, value] : result.objective) {
                cols[0].push_back(eta);
                cols[1].push_back(value);
            }
            write_csv(std::filesystem::path(tune_args.out_dir) / "tune_objective.csv",
                      {"eta", "objective"}, cols);
            const double dplus = cfg.params.small_delta_plus();
            std::printf("eta* = %.12g (predicted %.12g)\n", result.eta_star, result.predicted);
            std::printf("sefs_shift = %.6g (%.4g delta_+), caption_shift = %.6g (%.4g delta_+)\n",
                        result.sefs_shift, result.sefs_shift / dplus, result.caption_shift,
                        result.caption_shift / dplus);
        } else if (sweep_cmd->parsed()) {
            const auto result = sweep(load_config(sweep_args.config_path), sweep_axis,
                                      parse_grid(sweep_grid), sweep_args.out_dir,
                                      sweep_args.force);
            std::size_t failures = 0;
            for (const auto& row : result.rows)
                if (!row.ok) ++failures;
            std::printf("wrote %s (%zu rows, %zu failed)\n", result.csv.c_str(),
                        result.rows.size(), failures);
        } else if (steady_cmd->parsed()) {
            const auto art =
                run_steady(load_config(steady_args.config_path), steady_args.out_dir,
                           steady_args.force);
            std::printf("steady state (%s): mean_n = %.6g, p_e = %.6g, p_g0 = %.6g\n",
                        art.numerical.method.c_str(), art.numerical.obs.mean_n,
                        art.numerical.obs.p_e, art.numerical.obs.p_g0);
            if (art.closed_form)
                std::printf("closed form (%s): mean_n = %.6g, p_e = %.6g, p_g0 = %.6g\n",
                            to_string(art.closed_form->regime), art.closed_form->mean_n_inf,
                            art.closed_form->p_e_inf, art.closed_form->p_g0_inf);
        } else if (collective_cmd->parsed()) {
            ScenarioConfig cfg = load_config(collective_args.config_path);
            if (order_override) cfg.order = order_override;
            const auto art = run_collective(cfg, collective_args.out_dir);
            std::printf("wrote %s (final n_a = %.6g, n_b = %.6g)\n", art.csv.c_str(),
                        art.trajectory.n_a.back(), art.trajectory.n_b.back());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ValidityError& e) {
        std::fprintf(stderr, "validity error: %s\n", e.what());
        return kExitValidity;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitSolver;
    }
    return kExitOk;
}
