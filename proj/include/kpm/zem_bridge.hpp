#pragma once

#include "kpm/dynamics.hpp"
#include "kpm/game_space.hpp"

namespace kpm {

/// Maps a polar estimate into the game space of the linear model, using the
/// frame normal to the current LOS (xi = 0, xi_dot = V_lambda) and
/// t_go = -rho / V_rho.
///
/// Throws EngagementOver when the range rate is nonnegative.
GamePoint zem_from_polar(const RelativeState& rel, const OwnState& own, const Speeds& speeds,
                         const GameParams& params);

// Non-throwing variant for particle sweeps. A receding particle maps to tau = 0
// with its current range as |z_bar| and the sign of its LOS-normal velocity.
GamePoint zem_point(const RelativeState& rel, const OwnState& own, const Speeds& speeds,
                    const GameParams& params, bool* closing = nullptr);

}  // namespace kpm
