#pragma once

#include <vector>

#include "matops.hpp"

namespace cascadecomp {

/**
 * Sampled closed- or open-loop trajectory.
 *
 * All per-sample sequences share `times`. ODE states that a scenario does not
 * have stay empty: the heat problem has no x1, the delay problem keeps its
 * actuator (transport) state in the snapshots instead of x2. Snapshots are
 * sampled on `grid`.
 */
struct SimResult {
    std::vector<double> times;
    std::vector<double> energy; // squared norm of the full state
    std::vector<double> u;
    std::vector<Vector> x1;
    std::vector<Vector> x2;
    std::vector<double> grid;
    std::vector<std::vector<double>> snapshots;

    [[nodiscard]] std::size_t samples() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
};

} // namespace cascadecomp
