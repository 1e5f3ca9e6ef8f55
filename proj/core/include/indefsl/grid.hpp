#pragma once

#include <array>
#include <memory>
#include <vector>

#include "indefsl/coefficients.hpp"

namespace indefsl {

/// Nodes of [-1, 1] split at 0. The left half occupies indices
/// [0, n_half) and runs from the slot at -1 to the slot at 0-; the right
/// half occupies [n_half, 2 n_half) and runs from the slot at 0+ to the slot
/// at 1. Slots hold one-sided traces and carry zero weight.
struct Grid {
    std::vector<double> x;
    std::vector<double> w;    // quadrature weights for int . |r|
    std::vector<double> sgn;  // sign of r at the node (per half for the slots)
    int n_half = 0;

    virtual ~Grid() = default;

    int size() const { return static_cast<int>(x.size()); }
    bool is_left(int i) const { return i < n_half; }
    int slot_minus1() const { return 0; }
    int slot_zero_minus() const { return n_half - 1; }
    int slot_zero_plus() const { return n_half; }
    int slot_plus1() const { return 2 * n_half - 1; }
    bool is_slot(int i) const
    {
        return i == slot_minus1() || i == slot_zero_minus() || i == slot_zero_plus() ||
               i == slot_plus1();
    }
};

/// Anchors that carry a geometric ladder, one per half-neighborhood.
enum class Anchor { minus1 = 0, zero_minus = 1, zero_plus = 2, plus1 = 3 };

Anchor anchor_of(double point, Side side);

/// Ladder of distances d(k, j) = smax 2^(-k-1) (1 + j/M), k in [0, K), j in
/// [0, M), plus the node at distance smax. The set is closed under doubling
/// and halving away from its ends.
struct Ladder {
    int K = 24;
    int M = 8;
    double smax = 0.25;
    // index[anchor][k * M + j]
    std::array<std::vector<int>, 4> index;
    std::array<int, 4> top_index{};  // node at distance smax
    std::array<int, 4> slot_index{};

    double distance(int k, int j) const;
    int node(Anchor a, int k, int j) const { return index[static_cast<int>(a)][k * M + j]; }
};

struct OperatorGrid : Grid {
    Ladder ladder;
};

/// Operator grid with n_half nodes per half (slots included). Needs
/// n_half >= 64.
std::shared_ptr<const OperatorGrid> make_operator_grid(const CoefficientModel& m, int n_half = 512);

/// Composite Gauss-Legendre grid, graded toward 0 and +-1, with trace slots.
/// `panels` per half, `order` points per panel.
std::shared_ptr<const Grid> make_spectral_grid(const CoefficientModel& m, int panels = 48,
                                               int order = 12);

}  // namespace indefsl
