#pragma once

#include <string>
#include <vector>

#include "phaseless/geometry.hpp"

namespace phaseless {

/// Names accepted by builtin_scene():
///   kite_ball        kite (scale 0.6, center (0.15, 0)) with ball at (2, 0.8), rho 0.4
///   circle_ball      circle of radius 0.6 at (0.15, 0), same ball
///   kite_bump_ball   kite_ball with a 1e-3 radial bump at t = pi/2
///   disk_ball        unit disk at the origin, ball at (2, 1.2), rho 0.3
///   medium_disk_ball disk of index 2 and radius 0.5, ball of index 2 at (1.2, 0.6), rho 0.1
///   medium_kite_ball kite-shaped inclusion (scale 0.35) of index 2, same ball
///   rough_ball       smooth bump of height 0.3 and half width 1, ball at (2.5, 1.5), rho 0.3
///   rough_poly_ball  polynomial bump of the same height and width, same ball
std::vector<std::string> builtin_scene_names();
Scene builtin_scene(const std::string& name);

}  // namespace phaseless
