#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "indefsl/coefficients.hpp"
#include "indefsl/exact_bc.hpp"
#include "indefsl/spectral.hpp"

namespace indefsl {

/// One order-form piece |x - anchor|^order * poly(x) on [lo, hi].
struct PieceSpec {
    double lo = -1.0;
    double hi = 1.0;
    double anchor = 0.0;
    double order = 0.0;
    std::vector<double> poly{1.0};

    bool operator==(const PieceSpec&) const = default;
};

enum class Validation { exact, floating };

/// Everything a run needs. Text form: sectioned key = value lines, see
/// emit_config for the canonical layout.
struct ProblemConfig {
    // [coefficients]
    std::vector<PieceSpec> p, q, r;
    bool allow_p_order = false;
    bool definite_weight = false;
    // [bc]
    ExactRow L, M, N;
    Validation validation = Validation::exact;
    // [solve]
    int count = 30;
    std::optional<Rect> region;  // Weyl heuristic when absent
    int max_eigs = 200;
    std::vector<int> kappa_n{5, 10, 15, 20, 30};
    // [grid]
    int grid_n = 512;
    int spectral_panels = 48;
    int fem_elements = 256;
    // [tolerances]
    double bc_tol = 1e-10;
    double integrator_tol = 1e-12;
    double cluster_rel = 1e-5;
    // [verify]
    int verify_samples = 16;
    std::uint64_t seed = 1;
    // [output]
    std::string out_dir = "out";

    CoefficientModel model() const;
    bool operator==(const ProblemConfig& o) const;
};

/// Throws ConfigError naming the offending line.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

/// Canonical text; parse_config(emit_config(c)) == c.
std::string emit_config(const ProblemConfig& cfg);

}  // namespace indefsl
