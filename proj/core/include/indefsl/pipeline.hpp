#pragma once

#include <optional>
#include <string>

#include "indefsl/config.hpp"

namespace indefsl {

/// Pipeline stages in execution order; each mode runs the prefix ending at it.
enum class Mode { check_bc, classify, verify_w, solve, diagnose, all };

std::optional<Mode> parse_mode(const std::string& text);
const char* to_string(Mode m) noexcept;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int validation_failure = 2;
inline constexpr int no_theorem = 3;
inline constexpr int numerical_failure = 4;
}  // namespace exit_code

struct PipelineOutput {
    int exit_code = exit_code::ok;
    std::string status;
    std::string report_json;
    std::string eigenvalues_csv;  // empty unless the solve stage ran
    std::string kappa_tsv;        // empty unless the diagnose stage ran
};

/// Deterministic in cfg: the seed only feeds the random samples of verify_W.
PipelineOutput run_pipeline(const ProblemConfig& cfg, Mode mode);

/// Writes report.json and, when present, eigenvalues.csv and kappa.tsv.
void write_outputs(const PipelineOutput& out, const std::string& dir);

}  // namespace indefsl
