#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "indefsl/config.hpp"
#include "indefsl/error.hpp"
#include "indefsl/pipeline.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Indefinite Sturm-Liouville problems with eigenparameter-dependent boundary conditions"};
    app.set_help_flag("-h,--help", "Show help");

    std::string mode_text;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_n;
    std::optional<int> max_eigs;

    app.add_option("mode", mode_text, "check-bc | classify | verify-w | solve | diagnose | all")->required();
    app.add_option("--config", config_path, "Problem configuration file")->required();
    app.add_option("--out", out_dir, "Output directory (overrides [output] dir)");
    app.add_option("--seed", seed, "Seed for randomized verification samples");
    app.add_option("--grid-n", grid_n, "Nodes per half of the operator grid")->check(CLI::PositiveNumber);
    app.add_option("--max-eigs", max_eigs, "Upper bound on eigenvalues searched")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : indefsl::exit_code::config_error;
    }

    const auto mode = indefsl::parse_mode(mode_text);
    if (!mode) {
        std::cerr << "indefsl: unknown mode '" << mode_text << "'\n";
        return indefsl::exit_code::config_error;
    }

    indefsl::ProblemConfig cfg;
    try {
        cfg = indefsl::load_config(config_path);
    } catch (const indefsl::Error& e) {
        std::cerr << "indefsl: " << config_path << ": " << e.what() << "\n";
        return indefsl::exit_code::config_error;
    }
    if (out_dir) cfg.out_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    if (grid_n) cfg.grid_n = *grid_n;
    if (max_eigs) cfg.max_eigs = *max_eigs;

    const indefsl::PipelineOutput out = indefsl::run_pipeline(cfg, *mode);
    try {
        indefsl::write_outputs(out, cfg.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "indefsl: " << e.what() << "\n";
        return indefsl::exit_code::config_error;
    }
    std::cout << "indefsl " << indefsl::to_string(*mode) << ": " << out.status << " (exit " << out.exit_code
              << "), report in " << cfg.out_dir << "/report.json\n";
    return out.exit_code;
}
