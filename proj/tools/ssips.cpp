#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "ssips/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Interacting particle systems on self-similar networks"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string output_dir;
    std::string preset;
    int threads = 0;

    const std::map<std::string, std::string> about{
        {"integrate", "integrate a test function against the self-similar measure"},
        {"project", "projection error of a test function across levels"},
        {"transfer", "step functions and graphon images on the unit interval"},
        {"simulate", "integrate deterministic and W-random particle systems"},
        {"rate", "self-convergence rate of the continuum limit"},
        {"vlasov", "mean-field self-convergence of local empirical measures"},
        {"modulus", "fractal modulus of continuity of a test function"},
        {"validate", "check a configuration without running it"}};

    for (const auto& name : ssips::subcommands()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--output", output_dir, "output directory (overrides experiment.output_dir)");
        sub->add_option("--threads", threads, "worker threads (overrides experiment.threads)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--preset", preset, "IFS preset (overrides the [ifs] section)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ssips::ConfigParse parsed;
        if (!config_path.empty()) parsed = ssips::load_config(config_path);
        auto& cfg = parsed.config;
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (threads > 0) cfg.threads = threads;
        if (!preset.empty()) {
            cfg.ifs.preset = preset;
            cfg.ifs.maps.clear();
        }

        auto diagnostics = parsed.diagnostics;
        const auto semantic = ssips::validate(cfg, command);
        diagnostics.insert(diagnostics.end(), semantic.begin(), semantic.end());
        for (const auto& d : diagnostics) std::cerr << ssips::to_string(d) << '\n';
        if (ssips::has_errors(diagnostics)) return 2;
        if (command == "validate") {
            std::cout << (diagnostics.empty() ? "configuration is valid\n" : "configuration is usable\n");
            return 0;
        }

        const auto summary = ssips::run(command, cfg);
        for (const auto& f : summary.files) std::cout << f.string() << '\n';
        std::cout << "config hash " << ssips::config_hash(cfg) << ", " << summary.wall_seconds << " s\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "ssips " << command << ": " << e.what() << '\n';
        return ssips::exit_code_for(e);
    }
}
