// Command-line surface: one subcommand per virtual experiment, config files
// merged over a bundled device profile, results written as CSV grids.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "phasemod/config.hpp"
#include "phasemod/grid_io.hpp"
#include "phasemod/version.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

struct CliOptions {
    std::string config_path;
    std::string profile = "paper-device";
    std::string out_dir = ".";
    std::string transfer_path;
    int workers = 0; // 0 = keep config value
};

int run_subcommand(const std::string& name, const CliOptions& opt) {
    phasemod::ExperimentConfig cfg =
        opt.config_path.empty() ? phasemod::parse_config_text("{}", opt.profile)
                                : phasemod::parse_config(opt.config_path, opt.profile);
    cfg.experiment = name;
    if (opt.workers > 0) cfg.workers = opt.workers;

    phasemod::TransferTable table;
    const phasemod::TransferTable* table_ptr = nullptr;
    if (!opt.transfer_path.empty()) {
        table = phasemod::read_transfer_table(opt.transfer_path);
        table_ptr = &table;
    }

    phasemod::SweepGrid grid = phasemod::run_experiment(cfg, table_ptr);
    grid.metadata["tool_version"] = phasemod::version_string;
    grid.metadata["config_hash"] = phasemod::config_hash(cfg);
    grid.metadata["config"] = phasemod::canonical_config(cfg);
    grid.metadata["profile"] = opt.profile;

    std::filesystem::create_directories(opt.out_dir);
    const std::string path = (std::filesystem::path(opt.out_dir) / (name + ".csv")).string();
    phasemod::write_grid(grid, path);
    std::cout << "wrote " << path << " (" << grid.x.size() << " x " << grid.y.size()
              << ", hash " << grid.metadata["config_hash"] << ")\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parametric phase modulation experiments for coupled flux-tunable transmons"};
    app.set_version_flag("--version", phasemod::version_string);
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "experiment config file (JSON)");
    app.add_option("--profile", opt.profile, "bundled defaults profile")->capture_default_str();
    app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    app.add_option("--workers", opt.workers, "worker threads for sweep points");
    app.add_option("--transfer", opt.transfer_path, "transfer table CSV (omega_p, factor)");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"spectrum", "sideband spectrum of q1 vs drive amplitude"},
        {"chevron", "population map vs sweep axis and time"},
        {"phase-sweep", "dual-drive coupling vs relative drive phase"},
        {"amp-coupling", "single-drive coupling vs amplitude with resonance re-finding"},
        {"spectroscopy", "avoided-crossing gap from the dressed sideband spectrum"},
        {"transfer", "transfer-function calibration via the dc-shift observable"},
        {"coupler-sweep", "mediated coupling vs coupler flux"},
        {"param-res", "zeroth-order (parametric-resonance) phase sweep"},
        {"taylor-fourier", "Taylor vs Fourier deviation per expansion order"},
    };
    for (const auto& [name, desc] : commands) app.add_subcommand(name, desc)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run_subcommand(name, opt);
    } catch (const phasemod::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const phasemod::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}
