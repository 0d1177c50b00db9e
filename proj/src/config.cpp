#include "phaseless/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "phaseless/error.hpp"
#include "phaseless/forward_medium.hpp"

namespace phaseless {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatVersion = "phaseless-config-1";

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  fail(ErrorKind::Config, where + ": " + msg);
}

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) bad(where, "unknown key '" + key + "'");
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where, "not finite");
  return v;
}

template <class T>
T opt(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  const std::string w = where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad(w, "expected a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) bad(w, "expected an integer");
    return v.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) bad(w, "expected a string");
    return v.get<std::string>();
  } else {
    return get_number(v, w);
  }
}

Complex get_complex(const Json& j, const std::string& where) {
  if (j.is_number()) return {get_number(j, where), 0.0};
  if (j.is_array() && j.size() == 2)
    return {get_number(j[0], where + "[0]"), get_number(j[1], where + "[1]")};
  bad(where, "expected a number or [re, im]");
}

Json put_complex(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

Point get_point(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) bad(where, "expected [x, y]");
  return {get_number(j[0], where + "[0]"), get_number(j[1], where + "[1]")};
}

std::vector<double> get_reals(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Complex> get_complexes(const Json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
  std::vector<Complex> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(get_complex(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

BoundaryCurve curve_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"kind", "center", "radius", "scale", "rotation", "cos", "sin", "bump"});
  if (!j.contains("kind")) bad(where, "missing 'kind'");
  const CurveKind kind = curve_kind_from_string(opt<std::string>(j, "kind", "", where));
  CurveParams p;
  if (j.contains("center")) p.center = get_point(j["center"], where + ".center");
  p.radius = opt(j, "radius", p.radius, where);
  p.scale = opt(j, "scale", p.scale, where);
  p.rotation = opt(j, "rotation", p.rotation, where);
  if (j.contains("cos")) p.cos_coeffs = get_reals(j["cos"], where + ".cos");
  if (j.contains("sin")) p.sin_coeffs = get_reals(j["sin"], where + ".sin");
  if (j.contains("bump")) {
    const Json& b = j["bump"];
    check_keys(b, where + ".bump", {"amplitude", "at", "concentration"});
    p.bump_amplitude = opt(b, "amplitude", p.bump_amplitude, where + ".bump");
    p.bump_at = opt(b, "at", p.bump_at, where + ".bump");
    p.bump_concentration = opt(b, "concentration", p.bump_concentration, where + ".bump");
  }
  try {
    return BoundaryCurve::make(kind, p);
  } catch (const Error& e) {
    bad(where, e.what());
  }
}

Json curve_to_json(const BoundaryCurve& c) {
  const CurveParams& p = c.params();
  Json j{{"kind", to_string(c.kind())},
         {"center", {p.center.x(), p.center.y()}},
         {"rotation", p.rotation}};
  switch (c.kind()) {
    case CurveKind::Circle: j["radius"] = p.radius; break;
    case CurveKind::Kite: j["scale"] = p.scale; break;
    case CurveKind::TrigPolynomial:
      j["cos"] = p.cos_coeffs;
      j["sin"] = p.sin_coeffs;
      break;
  }
  if (p.bump_amplitude != 0.0)
    j["bump"] = {{"amplitude", p.bump_amplitude}, {"at", p.bump_at}, {"concentration", p.bump_concentration}};
  return j;
}

MediumRaster raster_from_json(const Json& j, const std::string& where, const std::string& base) {
  if (j.is_string()) {
    const fs::path path = fs::path(base) / j.get<std::string>();
    if (!fs::exists(path)) bad(where, "raster file not found: " + path.string());
    return read_medium_raster(path.string());
  }
  check_keys(j, where, {"x0", "y0", "h", "nx", "ny", "index"});
  for (const char* key : {"x0", "y0", "h", "nx", "ny", "index"})
    if (!j.contains(key)) bad(where, std::string("missing '") + key + "'");
  MediumRaster r;
  r.x0 = opt(j, "x0", 0.0, where);
  r.y0 = opt(j, "y0", 0.0, where);
  r.h = opt(j, "h", 0.0, where);
  r.nx = opt(j, "nx", 0, where);
  r.ny = opt(j, "ny", 0, where);
  r.index = get_complexes(j["index"], where + ".index");
  if (!(r.h > 0) || r.nx < 1 || r.ny < 1) bad(where, "bad raster shape");
  if (r.index.size() != static_cast<size_t>(r.nx) * r.ny) bad(where, "index needs nx*ny entries");
  return r;
}

Json raster_to_json(const MediumRaster& r) {
  Json idx = Json::array();
  for (const Complex& z : r.index) idx.push_back(put_complex(z));
  return {{"x0", r.x0}, {"y0", r.y0}, {"h", r.h}, {"nx", r.nx}, {"ny", r.ny}, {"index", idx}};
}

SceneVariant variant_from_string(const std::string& s, const std::string& where) {
  if (s == "obstacle") return SceneVariant::Obstacle;
  if (s == "medium") return SceneVariant::Medium;
  if (s == "rough_surface") return SceneVariant::RoughSurface;
  bad(where, "unknown variant '" + s + "'");
}

ProfileKind profile_from_string(const std::string& s, const std::string& where) {
  if (s == "smooth") return ProfileKind::SmoothBump;
  if (s == "poly") return ProfileKind::PolyBump;
  bad(where, "unknown bump kind '" + s + "'");
}

}  // namespace

Scene scene_from_json(const Json& j, const std::string& base_dir) {
  const std::string w = "scene";
  check_keys(j, w, {"variant", "enclosing_radius", "ball", "ball_index", "obstacles", "inclusions",
                    "raster", "surface"});
  Scene s;
  if (!j.contains("variant")) bad(w, "missing 'variant'");
  s.variant = variant_from_string(opt<std::string>(j, "variant", "", w), w + ".variant");
  if (!j.contains("enclosing_radius")) bad(w, "missing 'enclosing_radius'");
  s.enclosing_radius = opt(j, "enclosing_radius", 0.0, w);
  s.ball_index = opt(j, "ball_index", s.ball_index, w);
  if (j.contains("ball") && !j["ball"].is_null()) {
    const Json& b = j["ball"];
    check_keys(b, w + ".ball", {"center", "radius"});
    if (!b.contains("center") || !b.contains("radius")) bad(w + ".ball", "needs center and radius");
    s.ball = ReferenceBall{get_point(b["center"], w + ".ball.center"),
                           get_number(b["radius"], w + ".ball.radius")};
  }
  if (j.contains("obstacles")) {
    const Json& list = j["obstacles"];
    if (!list.is_array()) bad(w + ".obstacles", "expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      const std::string wi = w + ".obstacles[" + std::to_string(i) + "]";
      check_keys(list[i], wi, {"curve", "condition", "impedance"});
      if (!list[i].contains("curve")) bad(wi, "missing 'curve'");
      ObstacleComponent c{curve_from_json(list[i]["curve"], wi + ".curve"), BoundaryKind::Dirichlet, {}};
      const std::string cond = opt<std::string>(list[i], "condition", "dirichlet", wi);
      if (cond == "impedance") c.condition = BoundaryKind::Impedance;
      else if (cond != "dirichlet") bad(wi + ".condition", "expected dirichlet or impedance");
      if (list[i].contains("impedance")) {
        const Json& eta = list[i]["impedance"];
        const std::string we = wi + ".impedance";
        check_keys(eta, we, {"constant", "cos", "sin"});
        if (eta.contains("constant")) c.impedance.constant = get_complex(eta["constant"], we + ".constant");
        if (eta.contains("cos")) c.impedance.cos_coeffs = get_complexes(eta["cos"], we + ".cos");
        if (eta.contains("sin")) c.impedance.sin_coeffs = get_complexes(eta["sin"], we + ".sin");
      }
      s.obstacles.push_back(std::move(c));
    }
  }
  if (j.contains("inclusions")) {
    const Json& list = j["inclusions"];
    if (!list.is_array()) bad(w + ".inclusions", "expected an array");
    for (size_t i = 0; i < list.size(); ++i) {
      const std::string wi = w + ".inclusions[" + std::to_string(i) + "]";
      check_keys(list[i], wi, {"region", "index"});
      if (!list[i].contains("region") || !list[i].contains("index")) bad(wi, "needs region and index");
      s.inclusions.push_back({curve_from_json(list[i]["region"], wi + ".region"),
                              get_complex(list[i]["index"], wi + ".index")});
    }
  }
  if (j.contains("raster") && !j["raster"].is_null())
    s.raster = raster_from_json(j["raster"], w + ".raster", base_dir);
  if (j.contains("surface")) {
    const Json& surf = j["surface"];
    check_keys(surf, w + ".surface", {"bumps"});
    if (surf.contains("bumps")) {
      const Json& list = surf["bumps"];
      if (!list.is_array()) bad(w + ".surface.bumps", "expected an array");
      for (size_t i = 0; i < list.size(); ++i) {
        const std::string wi = w + ".surface.bumps[" + std::to_string(i) + "]";
        check_keys(list[i], wi, {"kind", "amplitude", "center", "half_width"});
        Bump b;
        b.kind = profile_from_string(opt<std::string>(list[i], "kind", "smooth", wi), wi + ".kind");
        b.amplitude = opt(list[i], "amplitude", 0.0, wi);
        b.center = opt(list[i], "center", 0.0, wi);
        b.half_width = opt(list[i], "half_width", 1.0, wi);
        s.surface.bumps.push_back(b);
      }
    }
  }
  const bool has_obstacles = !s.obstacles.empty();
  const bool has_medium = !s.inclusions.empty() || s.raster.has_value();
  const bool has_surface = !s.surface.bumps.empty();
  if (s.variant != SceneVariant::Obstacle && has_obstacles)
    bad(w, "obstacles are only allowed in obstacle scenes");
  if (s.variant != SceneVariant::Medium && has_medium)
    bad(w, "inclusions and rasters are only allowed in medium scenes");
  if (s.variant != SceneVariant::RoughSurface && has_surface)
    bad(w, "surface bumps are only allowed in rough_surface scenes");
  return s;
}

Json scene_to_json(const Scene& s) {
  Json j{{"variant", to_string(s.variant)}, {"enclosing_radius", s.enclosing_radius}};
  if (s.ball)
    j["ball"] = {{"center", {s.ball->center.x(), s.ball->center.y()}}, {"radius", s.ball->radius}};
  if (s.variant == SceneVariant::Medium) j["ball_index"] = s.ball_index;
  if (!s.obstacles.empty()) {
    Json list = Json::array();
    for (const auto& c : s.obstacles) {
      Json o{{"curve", curve_to_json(c.curve)},
             {"condition", c.condition == BoundaryKind::Impedance ? "impedance" : "dirichlet"}};
      if (c.condition == BoundaryKind::Impedance) {
        Json cs = Json::array(), sn = Json::array();
        for (const Complex& z : c.impedance.cos_coeffs) cs.push_back(put_complex(z));
        for (const Complex& z : c.impedance.sin_coeffs) sn.push_back(put_complex(z));
        o["impedance"] = {{"constant", put_complex(c.impedance.constant)}, {"cos", cs}, {"sin", sn}};
      }
      list.push_back(o);
    }
    j["obstacles"] = list;
  }
  if (!s.inclusions.empty()) {
    Json list = Json::array();
    for (const auto& inc : s.inclusions)
      list.push_back({{"region", curve_to_json(inc.region)}, {"index", put_complex(inc.index)}});
    j["inclusions"] = list;
  }
  if (s.raster) j["raster"] = raster_to_json(*s.raster);
  if (!s.surface.bumps.empty()) {
    Json list = Json::array();
    for (const auto& b : s.surface.bumps)
      list.push_back({{"kind", b.kind == ProfileKind::SmoothBump ? "smooth" : "poly"},
                      {"amplitude", b.amplitude},
                      {"center", b.center},
                      {"half_width", b.half_width}});
    j["surface"] = {{"bumps", list}};
  }
  return j;
}

namespace {

Json parse_file(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) fail(ErrorKind::Config, what + " not found: " + path);
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot read " + what + " " + path);
  try {
    return Json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Config, path + ": " + e.what());
  }
}

}  // namespace

Scene load_scene(const std::string& path) {
  return scene_from_json(parse_file(path, "scene file"), fs::path(path).parent_path().string());
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Forward: return "forward";
    case Stage::Phaseless: return "phaseless";
    case Stage::Recover: return "recover";
    case Stage::Invert: return "invert";
  }
  return "?";
}

Stage stage_from_string(const std::string& s) {
  if (s == "forward") return Stage::Forward;
  if (s == "phaseless") return Stage::Phaseless;
  if (s == "recover") return Stage::Recover;
  if (s == "invert") return Stage::Invert;
  fail(ErrorKind::Config, "unknown stage '" + s + "'");
}

bool ExperimentConfig::has_stage(Stage s) const {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

DirectionGrid ExperimentConfig::obs_grid() const {
  return scene.variant == SceneVariant::RoughSurface ? DirectionGrid::upper(n_obs)
                                                     : DirectionGrid::uniform(n_obs);
}

DirectionGrid ExperimentConfig::inc_grid() const {
  return scene.variant == SceneVariant::RoughSurface ? DirectionGrid::lower(n_inc)
                                                     : DirectionGrid::uniform(n_inc);
}

double ExperimentConfig::medium_h() const { return 2 * kPi / (k * cells_per_wavelength); }

Json ExperimentConfig::canonical() const {
  return {{"scene", scene_to_json(scene)},
          {"k", k},
          {"grid", {{"n_obs", n_obs}, {"n_inc", n_inc}}},
          {"quadrature",
           {{"n", quadrature_n}, {"ball_nodes", ball_nodes}, {"margin_wavelengths", margin_wavelengths}}},
          {"medium", {{"cells_per_wavelength", cells_per_wavelength}}},
          {"lsm", {{"x", {lsm.x0, lsm.x1}}, {"y", {lsm.y0, lsm.y1}}, {"nx", lsm.nx}, {"ny", lsm.ny}}},
          {"d0_index", d0_index},
          {"noise_level", noise_level},
          {"seed", seed},
          {"gauge_fix",
           {{"enabled", fix_gauge},
            {"order", gauge.order},
            {"ball_order", gauge.ball_order},
            {"incidences", gauge.incidences},
            {"boundary_points", gauge.boundary_points}}}};
}

std::string ExperimentConfig::hash() const {
  return hex64(fnv1a64(std::string(kFormatVersion) + "\n" + canonical().dump()));
}

std::string ExperimentConfig::stage_hash(Stage s) const {
  const Json c = canonical();
  auto h = [](const std::string& up, const Json& part) {
    return hex64(fnv1a64(std::string(kFormatVersion) + "\n" + up + "\n" + part.dump()));
  };
  const std::string fwd =
      h("", {c["scene"], c["k"], c["grid"], c["quadrature"], c["medium"]});
  if (s == Stage::Forward) return fwd;
  const std::string pl = h(fwd, {c["d0_index"], c["noise_level"], c["seed"]});
  if (s == Stage::Phaseless) return pl;
  const std::string rec = h(pl, c["gauge_fix"]);
  if (s == Stage::Recover) return rec;
  return h(has_stage(Stage::Recover) ? rec : fwd, c["lsm"]);
}

void ExperimentConfig::validate() const {
  if (!(k > 0) || !std::isfinite(k)) fail(ErrorKind::Config, "k must be positive and finite");
  if (n_obs < 1 || n_inc < 1) fail(ErrorKind::Config, "grid sizes must be >= 1");
  if (has_stage(Stage::Recover) && n_obs != n_inc)
    fail(ErrorKind::Config, "recover stage needs n_obs == n_inc (got " + std::to_string(n_obs) +
                                " and " + std::to_string(n_inc) + ")");
  if (d0_index < 0 || d0_index >= n_inc)
    fail(ErrorKind::Config, "d0_index " + std::to_string(d0_index) + " is outside the incident grid");
  if (!(noise_level >= 0 && noise_level < 1)) fail(ErrorKind::Config, "noise_level must be in [0, 1)");
  if (quadrature_n < 8 || ball_nodes < 8) fail(ErrorKind::Config, "quadrature sizes must be >= 8");
  if (!(margin_wavelengths > 0)) fail(ErrorKind::Config, "margin_wavelengths must be positive");
  if (!(cells_per_wavelength > 0)) fail(ErrorKind::Config, "cells_per_wavelength must be positive");
  if (gauge.incidences < 1 || gauge.boundary_points < 4)
    fail(ErrorKind::Config, "gauge_fix needs incidences >= 1 and boundary_points >= 4");
  lsm.validate();
  if ((has_stage(Stage::Recover)) && !scene.ball)
    fail(ErrorKind::Config, "recover stage needs a reference ball in the scene");
  require_hard_checks(scene, Wavenumber(k));
}

ExperimentConfig config_from_json(const Json& j, const std::string& config_dir) {
  const std::string w = "config";
  check_keys(j, w, {"scene", "k", "grid", "quadrature", "medium", "lsm", "d0_index", "noise_level",
                    "seed", "output", "stages", "gauge_fix"});
  ExperimentConfig c;
  c.config_dir = config_dir;
  if (!j.contains("scene")) bad(w, "missing 'scene'");
  if (j["scene"].is_string()) {
    c.scene_path = (fs::path(config_dir) / j["scene"].get<std::string>()).string();
    c.scene = load_scene(c.scene_path);
  } else {
    c.scene = scene_from_json(j["scene"], config_dir);
  }
  if (!j.contains("k")) bad(w, "missing 'k'");
  c.k = opt(j, "k", c.k, w);
  if (j.contains("grid")) {
    check_keys(j["grid"], w + ".grid", {"n_obs", "n_inc"});
    c.n_obs = opt(j["grid"], "n_obs", c.n_obs, w + ".grid");
    c.n_inc = opt(j["grid"], "n_inc", c.n_inc, w + ".grid");
  }
  if (j.contains("quadrature")) {
    const Json& q = j["quadrature"];
    check_keys(q, w + ".quadrature", {"n", "ball_nodes", "margin_wavelengths"});
    c.quadrature_n = opt(q, "n", c.quadrature_n, w + ".quadrature");
    c.ball_nodes = opt(q, "ball_nodes", c.ball_nodes, w + ".quadrature");
    c.margin_wavelengths = opt(q, "margin_wavelengths", c.margin_wavelengths, w + ".quadrature");
  }
  if (j.contains("medium")) {
    check_keys(j["medium"], w + ".medium", {"cells_per_wavelength"});
    c.cells_per_wavelength = opt(j["medium"], "cells_per_wavelength", c.cells_per_wavelength, w + ".medium");
  }
  if (j.contains("lsm")) {
    const Json& l = j["lsm"];
    check_keys(l, w + ".lsm", {"x", "y", "nx", "ny"});
    if (l.contains("x")) {
      const Point x = get_point(l["x"], w + ".lsm.x");
      c.lsm.x0 = x.x();
      c.lsm.x1 = x.y();
    }
    if (l.contains("y")) {
      const Point y = get_point(l["y"], w + ".lsm.y");
      c.lsm.y0 = y.x();
      c.lsm.y1 = y.y();
    }
    c.lsm.nx = opt(l, "nx", c.lsm.nx, w + ".lsm");
    c.lsm.ny = opt(l, "ny", c.lsm.ny, w + ".lsm");
  }
  c.d0_index = opt(j, "d0_index", c.d0_index, w);
  c.noise_level = opt(j, "noise_level", c.noise_level, w);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad(w + ".seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.output = opt(j, "output", c.output, w);
  if (j.contains("stages")) {
    if (!j["stages"].is_array()) bad(w + ".stages", "expected an array");
    c.stages.clear();
    for (const auto& s : j["stages"]) {
      if (!s.is_string()) bad(w + ".stages", "expected stage names");
      c.stages.push_back(stage_from_string(s.get<std::string>()));
    }
  }
  if (j.contains("gauge_fix")) {
    const Json& g = j["gauge_fix"];
    const std::string wg = w + ".gauge_fix";
    check_keys(g, wg, {"enabled", "order", "ball_order", "incidences", "boundary_points"});
    c.fix_gauge = opt(g, "enabled", c.fix_gauge, wg);
    c.gauge.order = opt(g, "order", c.gauge.order, wg);
    c.gauge.ball_order = opt(g, "ball_order", c.gauge.ball_order, wg);
    c.gauge.incidences = opt(g, "incidences", c.gauge.incidences, wg);
    c.gauge.boundary_points = opt(g, "boundary_points", c.gauge.boundary_points, wg);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const Json j = parse_file(path, "config file");
  ExperimentConfig c = config_from_json(j, fs::path(path).parent_path().string());
  c.validate();
  return c;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 15];
  return s;
}

}  // namespace phaseless
