// snailsim: one subcommand per invocation, driven by a YAML config.
//
//   snailsim kerr-free --config configs/device.yaml --out runs/kf
//
// The output directory defaults to $SNAILSIM_OUT/<subcommand>, or
// ./snailsim_out/<subcommand> when the variable is unset.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "snail/config.hpp"
#include "snail/quantum.hpp"
#include "snail/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Driven SNAIL resonator toolkit"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::optional<int> dim;
    std::optional<int> threads;

    const std::map<std::string, std::string> help = {
        {"fit", "fit circuit parameters to measured resonance frequencies"},
        {"coeffs", "static and ac Hamiltonian coefficients over a flux sweep"},
        {"kerr-free", "locate the Kerr-free flux and sweep K(1)"},
        {"simulate", "integrate the driven master equation for a list of pulses"},
        {"out-and-back", "coherent-state drift after idling"},
        {"squeeze-cal", "calibrate squeezing or trisqueezing versus drive amplitude"},
        {"cubic", "tune up and run the cubic phase state sequence"},
        {"delay-cal", "recover the flux/charge line timing offset"},
        {"budget", "infidelity with individual noise channels removed"},
    };
    for (const auto& name : snail::subcommands()) {
        const auto it = help.find(name);
        auto* sub = app.add_subcommand(name, it == help.end() ? std::string() : it->second);
        sub->add_option("-c,--config", config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out_dir, "output directory");
        sub->add_option("--dim", dim, "Fock truncation override")->check(CLI::Range(2, 400));
        sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::Range(1, 256));
    }

    CLI11_PARSE(app, argc, argv);
    const std::string subcommand = app.get_subcommands().front()->get_name();

    snail::set_warning_handler([](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; });

    try {
        auto cfg = snail::load_config(config_path);
        if (dim) {
            cfg.simulation.dim = *dim;
            cfg.delay_cal.options.dim = *dim;
        }
        if (threads) cfg.simulation.threads = *threads;
        cfg.validate();

        if (out_dir.empty()) {
            const char* env = std::getenv("SNAILSIM_OUT");
            out_dir = std::string(env && *env ? env : "snailsim_out") + "/" + subcommand;
        }
        const auto files = snail::run(subcommand, cfg, out_dir, std::cout);
        for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "snailsim " << subcommand << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
