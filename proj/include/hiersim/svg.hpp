#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hiersim/planner.hpp"
#include "hiersim/simcore.hpp"

namespace hiersim {

// 2D scene plot: obstacles, goal disc, the certified tube of radius eps
// around the abstract output, both output trajectories, and impulse
// markers. Hand-rolled SVG, world coordinates mapped y-up.
void write_scene_svg(const std::string& path,
                     const std::optional<Workspace>& workspace,
                     const Trace& trace, double eps);

}  // namespace hiersim
