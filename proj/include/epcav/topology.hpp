#pragma once

// Circular parameter loops in the (g, delta_ca) plane: strand tracking, eigenvector holonomy,
// winding numbers and loop classification.
//
// A loop is g = g_center + R cos(theta), delta_ca = delta_center + R sin(theta). Counterclockwise
// means theta increasing, i.e. counterclockwise with g on the horizontal axis.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "epcav/nonhermitian.hpp"

namespace epcav::topo {

using nh::SystemParams;

enum class Orientation { counterclockwise, clockwise };

struct LoopSpec {
    double g_center = 0.0;
    double delta_center = 0.0;
    double radius = 0.0;
    std::size_t n_steps = 256;
    Orientation orientation = Orientation::counterclockwise;

    /// Throws InvalidInput unless radius >= 0, n_steps >= 16 and g_center - radius > 0.
    void validate() const;
    /// Signed loop angle at sample k (k = n_steps closes the loop).
    double theta(std::size_t k) const noexcept;
    double g_at(std::size_t k) const noexcept;
    double delta_at(std::size_t k) const noexcept;
    LoopSpec reversed() const;
};

enum class Permutation { identity, swap };

std::string_view to_string(Permutation p) noexcept;

struct BraidResult {
    /// Loop angle per sample, n_steps + 1 entries; the last sample closes the loop.
    std::vector<double> theta;
    std::vector<cplx> strand_plus;
    std::vector<cplx> strand_minus;
    Permutation permutation = Permutation::identity;
    /// Samples k where the tracked strands cross the principal-root branch cut: the labelling by
    /// continuity and the principal labelling disagree on one side of the step but not the other.
    /// At such a step the principal-labelled imaginary parts exchange.
    std::vector<std::size_t> branch_cut_crossings;
    double continuity_bound = 0.0;
    double max_step = 0.0;
    /// Total winding number when the loop avoids the EP.
    std::optional<double> winding_total;
};

/// Nearest-neighbour strand tracking. Throws NumericError on an ambiguous assignment or when a
/// step exceeds the continuity bound (5x the median step motion).
BraidResult track_eigenvalues_on_loop(const SystemParams& base, const LoopSpec& loop);

struct Holonomy {
    Permutation permutation = Permutation::identity;
    /// Overlap of the transported E+ eigenvector with the start eigenvector it ends on.
    cplx phase_plus{1.0, 0.0};
    cplx phase_minus{1.0, 0.0};
};

/// Transports the c-normalised (v^T v = 1) eigenvectors around the loop n_turns times, fixing the
/// remaining sign by maximal overlap with the previous step.
Holonomy eigenvector_holonomy(const SystemParams& base, const LoopSpec& loop, std::size_t n_turns);

struct Winding {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double w_total = 0.0;
    /// Values before snapping to multiples of 1/2.
    double raw_plus = 0.0;
    double raw_minus = 0.0;
    bool snapped = false;
    /// sign(kappa - gamma) * n / 2 with n the number of times the loop encircles the EP.
    double residue_prediction = 0.0;
};

/// Winding of E'+- = +-sqrt((z - i gamma_-)(conj(z) - i gamma_-)), z = delta_ca / 2 + i g, with
/// W = -(accumulated argument) / 2 pi. Throws InvalidInput when the loop passes through the EP (within
/// the on-EP band of classify_loop), NumericError when a step changes the argument of the product
/// by pi/2 or more, or when the snapped result disagrees with the residue count.
Winding winding_number(const LoopSpec& loop, const SystemParams& base);

enum class LoopClass { trivial, on_ep_ill_defined, nontrivial };

std::string_view to_string(LoopClass c) noexcept;

struct Classification {
    LoopClass cls = LoopClass::trivial;
    /// |EP - center| - R in the (g, delta_ca) plane.
    double distance = 0.0;
    double tolerance = 0.0;
    std::optional<Winding> winding;
};

/// Relative width of the on-EP band, as a fraction of the radius.
inline constexpr double kOnEpBand = 1e-3;

Classification classify_loop(const LoopSpec& loop, const SystemParams& base);

}  // namespace epcav::topo
