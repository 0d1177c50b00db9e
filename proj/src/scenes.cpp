#include "phaseless/scenes.hpp"

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

Scene obstacle(BoundaryCurve curve, double R, ReferenceBall ball) {
  Scene s;
  s.variant = SceneVariant::Obstacle;
  s.obstacles.push_back({std::move(curve), BoundaryKind::Dirichlet, {}});
  s.enclosing_radius = R;
  s.ball = ball;
  return s;
}

Scene medium(BoundaryCurve region) {
  Scene s;
  s.variant = SceneVariant::Medium;
  s.inclusions.push_back({std::move(region), Complex(2.0, 0.0)});
  s.enclosing_radius = 0.8;
  s.ball = ReferenceBall{{1.2, 0.6}, 0.1};
  s.ball_index = 2.0;
  return s;
}

Scene rough(ProfileKind kind) {
  Scene s;
  s.variant = SceneVariant::RoughSurface;
  s.surface.bumps.push_back({kind, 0.3, 0.0, 1.0});
  s.enclosing_radius = 1.5;
  s.ball = ReferenceBall{{2.5, 1.5}, 0.3};
  return s;
}

const ReferenceBall kKiteBall{{2.0, 0.8}, 0.4};

}  // namespace

std::vector<std::string> builtin_scene_names() {
  return {"kite_ball",        "circle_ball",      "kite_bump_ball", "disk_ball",
          "medium_disk_ball", "medium_kite_ball", "rough_ball",     "rough_poly_ball"};
}

Scene builtin_scene(const std::string& name) {
  if (name == "kite_ball") return obstacle(BoundaryCurve::kite({0.15, 0.0}, 0.6), 1.2, kKiteBall);
  if (name == "circle_ball") return obstacle(BoundaryCurve::circle({0.15, 0.0}, 0.6), 1.2, kKiteBall);
  if (name == "kite_bump_ball") {
    CurveParams p;
    p.center = {0.15, 0.0};
    p.scale = 0.6;
    p.bump_amplitude = 1e-3;
    p.bump_at = kPi / 2;
    return obstacle(BoundaryCurve::make(CurveKind::Kite, p), 1.2, kKiteBall);
  }
  if (name == "disk_ball")
    return obstacle(BoundaryCurve::circle({0.0, 0.0}, 1.0), 1.1, ReferenceBall{{2.0, 1.2}, 0.3});
  if (name == "medium_disk_ball") return medium(BoundaryCurve::circle({0.0, 0.0}, 0.5));
  if (name == "medium_kite_ball") return medium(BoundaryCurve::kite({0.1, 0.0}, 0.35));
  if (name == "rough_ball") return rough(ProfileKind::SmoothBump);
  if (name == "rough_poly_ball") return rough(ProfileKind::PolyBump);
  fail(ErrorKind::Config, "unknown builtin scene '" + name + "'");
}

}  // namespace phaseless
