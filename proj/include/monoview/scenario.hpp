#pragma once

// Scenario description for the synthetic multi-camera simulator: a textured
// ground plane, a rig of pinhole cameras, scripted rig moves, per-camera
// occluder discs and common-mode rig jitter.  Scenarios serialize to JSON so
// the CLI can load them from disk; a few tuned builtins ship with the tool.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "monoview/errors.hpp"

namespace monoview {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

// Plane texture: either procedurally generated (checkerboard + equal-channel
// noise + a central red "field" disc) or loaded from an image file.  The
// equal-channel noise keeps the background at zero saturation, so only the
// field disc lands in the red hue mask used by segmentation.
struct TextureSpec {
  enum class Type { Generated, File };
  Type type = Type::Generated;
  // Generated:
  int width = 1200;
  int height = 1200;
  int checker_px = 24;
  int noise_amplitude = 20;
  std::array<int, 2> gray_levels = {90, 170};
  bool field_disc = true;
  std::array<double, 2> field_center = {0.0, 0.0};  // world coords
  double field_radius = 0.45;                       // world units
  std::array<int, 3> field_rgb = {200, 40, 40};
  // File:
  std::string path;
};

struct PlaneSpec {
  std::array<double, 2> half_extent = {1.2, 1.2};  // world units
  TextureSpec texture;
};

struct CameraSpec {
  Vec3 position;           // world; must be above the plane (z > 0)
  Vec3 look_at;            // world point the optical axis passes through
  double focal_px = 800.0;
};

struct PathKey {
  int frame = 0;
  double x = 0, y = 0;  // image coordinates
};

struct OccluderSpec {
  double radius_px = 100.0;
  std::array<int, 3> rgb = {40, 90, 50};
  std::vector<int> blocks;     // camera indices whose view this disc enters
  std::vector<PathKey> path;   // keyframes, strictly increasing frames
};

// Instantaneous rigid transform applied to every camera starting at `frame`:
// rotation of `angle_deg` about `axis` through `pivot`, then `translate`.
//
// Note on detectability: transforms that map the scene plane to itself
// (vertical-axis rotation plus in-plane translation) leave all inter-view
// homographies unchanged — the common plane-side motion cancels in the
// view-to-view quotient — so only out-of-plane components (tilt, height
// change) register as misalignment downstream.
struct RigMoveSpec {
  int frame = 0;  // first frame rendered with the new pose
  double angle_deg = 0.0;
  Vec3 axis = {0.0, 0.0, 1.0};
  Vec3 pivot;
  Vec3 translate;
};

struct Scenario {
  std::string name = "scenario";
  int width = 640;
  int height = 480;
  int frames = 300;
  double fps = 30.0;
  PlaneSpec plane;
  std::vector<CameraSpec> cameras;
  std::vector<OccluderSpec> occluders;
  std::vector<RigMoveSpec> rig_moves;
  double jitter_sigma = 0.0;  // world units, common-mode rig translation
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate_scenario(const Scenario& s) {
  const auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::InvalidScenario, msg);
  };
  if (s.width < 32 || s.height < 32) fail("frame size must be at least 32x32");
  if (s.frames < 1) fail("scenario needs at least one frame");
  if (!(s.fps > 0)) fail("fps must be positive");
  if (s.cameras.empty()) fail("scenario needs at least one camera");
  if (s.plane.half_extent[0] <= 0 || s.plane.half_extent[1] <= 0)
    fail("plane half extents must be positive");
  const auto& tex = s.plane.texture;
  if (tex.type == TextureSpec::Type::Generated) {
    if (tex.width < 2 || tex.height < 2) fail("texture must be at least 2x2");
    if (tex.checker_px < 1) fail("checker size must be positive");
    if (tex.noise_amplitude < 0) fail("noise amplitude must be non-negative");
    if (tex.field_radius <= 0 && tex.field_disc)
      fail("field disc radius must be positive");
  } else if (tex.path.empty()) {
    fail("file texture needs a path");
  }
  for (size_t i = 0; i < s.cameras.size(); ++i) {
    const auto& cam = s.cameras[i];
    const std::string who = "camera " + std::to_string(i);
    if (cam.focal_px <= 0) fail(who + ": focal length must be positive");
    if (cam.position.z <= 0) fail(who + ": must be above the plane (z > 0)");
    if (cam.look_at.z >= cam.position.z)
      fail(who + ": optical axis must point toward the plane");
  }
  for (size_t i = 0; i < s.occluders.size(); ++i) {
    const auto& occ = s.occluders[i];
    const std::string who = "occluder " + std::to_string(i);
    if (occ.radius_px <= 0) fail(who + ": radius must be positive");
    if (occ.path.empty()) fail(who + ": path needs at least one keyframe");
    for (size_t k = 1; k < occ.path.size(); ++k)
      if (occ.path[k].frame <= occ.path[k - 1].frame)
        fail(who + ": path keyframes must have strictly increasing frames");
    for (int cam : occ.blocks)
      if (cam < 0 || cam >= static_cast<int>(s.cameras.size()))
        fail(who + ": blocked camera index out of range");
  }
  for (size_t i = 0; i < s.rig_moves.size(); ++i) {
    const auto& mv = s.rig_moves[i];
    if (mv.frame < 0 || mv.frame >= s.frames)
      throw Error(ErrorCode::InvalidScenario,
                  "rig move frame out of range: " + std::to_string(mv.frame));
    if (i > 0 && mv.frame <= s.rig_moves[i - 1].frame)
      fail("rig move frames must be strictly increasing");
    const double axis_len = std::sqrt(mv.axis.x * mv.axis.x +
                                      mv.axis.y * mv.axis.y +
                                      mv.axis.z * mv.axis.z);
    if (mv.angle_deg != 0.0 && axis_len < 1e-9)
      fail("rig move rotation axis must be non-zero");
  }
  if (s.jitter_sigma < 0) fail("jitter sigma must be non-negative");
}

// ---------------------------------------------------------------------------
// JSON (de)serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json vec3_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

inline Vec3 vec3_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::InvalidScenario, "expected [x, y, z] array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  json j;
  j["name"] = s.name;
  j["width"] = s.width;
  j["height"] = s.height;
  j["frames"] = s.frames;
  j["fps"] = s.fps;
  json plane;
  plane["half_extent"] = {s.plane.half_extent[0], s.plane.half_extent[1]};
  json tex;
  const auto& t = s.plane.texture;
  if (t.type == TextureSpec::Type::Generated) {
    tex["type"] = "generated";
    tex["size"] = {t.width, t.height};
    tex["checker_px"] = t.checker_px;
    tex["noise_amplitude"] = t.noise_amplitude;
    tex["gray_levels"] = {t.gray_levels[0], t.gray_levels[1]};
    if (t.field_disc) {
      json disc;
      disc["center"] = {t.field_center[0], t.field_center[1]};
      disc["radius"] = t.field_radius;
      disc["rgb"] = {t.field_rgb[0], t.field_rgb[1], t.field_rgb[2]};
      tex["field_disc"] = disc;
    }
  } else {
    tex["type"] = "file";
    tex["path"] = t.path;
  }
  plane["texture"] = tex;
  j["plane"] = plane;
  j["cameras"] = json::array();
  for (const auto& cam : s.cameras) {
    json c;
    c["position"] = detail::vec3_json(cam.position);
    c["look_at"] = detail::vec3_json(cam.look_at);
    c["focal_px"] = cam.focal_px;
    j["cameras"].push_back(c);
  }
  if (!s.occluders.empty()) {
    j["occluders"] = json::array();
    for (const auto& occ : s.occluders) {
      json o;
      o["radius_px"] = occ.radius_px;
      o["rgb"] = {occ.rgb[0], occ.rgb[1], occ.rgb[2]};
      o["blocks"] = occ.blocks;
      o["path"] = json::array();
      for (const auto& key : occ.path)
        o["path"].push_back({{"frame", key.frame}, {"x", key.x}, {"y", key.y}});
      j["occluders"].push_back(o);
    }
  }
  if (!s.rig_moves.empty()) {
    j["rig_moves"] = json::array();
    for (const auto& mv : s.rig_moves) {
      json m;
      m["frame"] = mv.frame;
      m["angle_deg"] = mv.angle_deg;
      m["axis"] = detail::vec3_json(mv.axis);
      m["pivot"] = detail::vec3_json(mv.pivot);
      m["translate"] = detail::vec3_json(mv.translate);
      j["rig_moves"].push_back(m);
    }
  }
  if (s.jitter_sigma != 0.0) j["jitter_sigma"] = s.jitter_sigma;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario s;
    s.name = j.value("name", s.name);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.frames = j.value("frames", s.frames);
    s.fps = j.value("fps", s.fps);
    if (j.contains("plane")) {
      const auto& plane = j.at("plane");
      if (plane.contains("half_extent")) {
        s.plane.half_extent[0] = plane.at("half_extent").at(0).get<double>();
        s.plane.half_extent[1] = plane.at("half_extent").at(1).get<double>();
      }
      if (plane.contains("texture")) {
        const auto& tex = plane.at("texture");
        auto& t = s.plane.texture;
        const std::string type = tex.value("type", "generated");
        if (type == "generated") {
          t.type = TextureSpec::Type::Generated;
          if (tex.contains("size")) {
            t.width = tex.at("size").at(0).get<int>();
            t.height = tex.at("size").at(1).get<int>();
          }
          t.checker_px = tex.value("checker_px", t.checker_px);
          t.noise_amplitude = tex.value("noise_amplitude", t.noise_amplitude);
          if (tex.contains("gray_levels")) {
            t.gray_levels[0] = tex.at("gray_levels").at(0).get<int>();
            t.gray_levels[1] = tex.at("gray_levels").at(1).get<int>();
          }
          if (tex.contains("field_disc")) {
            const auto& disc = tex.at("field_disc");
            t.field_disc = true;
            t.field_center[0] = disc.at("center").at(0).get<double>();
            t.field_center[1] = disc.at("center").at(1).get<double>();
            t.field_radius = disc.at("radius").get<double>();
            if (disc.contains("rgb"))
              for (int c = 0; c < 3; ++c)
                t.field_rgb[c] = disc.at("rgb").at(c).get<int>();
          } else {
            t.field_disc = false;
          }
        } else if (type == "file") {
          t.type = TextureSpec::Type::File;
          t.path = tex.at("path").get<std::string>();
        } else {
          throw Error(ErrorCode::InvalidScenario,
                      "unknown texture type: " + type);
        }
      }
    }
    if (!j.contains("cameras"))
      throw Error(ErrorCode::InvalidScenario, "scenario needs a camera list");
    for (const auto& c : j.at("cameras")) {
      CameraSpec cam;
      cam.position = detail::vec3_from(c.at("position"));
      cam.look_at = detail::vec3_from(c.at("look_at"));
      cam.focal_px = c.value("focal_px", cam.focal_px);
      s.cameras.push_back(cam);
    }
    for (const auto& o : j.value("occluders", nlohmann::json::array())) {
      OccluderSpec occ;
      occ.radius_px = o.value("radius_px", occ.radius_px);
      if (o.contains("rgb"))
        for (int c = 0; c < 3; ++c) occ.rgb[c] = o.at("rgb").at(c).get<int>();
      occ.blocks = o.value("blocks", std::vector<int>{});
      for (const auto& k : o.at("path"))
        occ.path.push_back({k.at("frame").get<int>(), k.at("x").get<double>(),
                            k.at("y").get<double>()});
      s.occluders.push_back(occ);
    }
    for (const auto& m : j.value("rig_moves", nlohmann::json::array())) {
      RigMoveSpec mv;
      mv.frame = m.at("frame").get<int>();
      mv.angle_deg = m.value("angle_deg", 0.0);
      if (m.contains("axis")) mv.axis = detail::vec3_from(m.at("axis"));
      if (m.contains("pivot")) mv.pivot = detail::vec3_from(m.at("pivot"));
      if (m.contains("translate"))
        mv.translate = detail::vec3_from(m.at("translate"));
      s.rig_moves.push_back(mv);
    }
    s.jitter_sigma = j.value("jitter_sigma", 0.0);
    validate_scenario(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidScenario,
                std::string("malformed scenario JSON: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError,
                "cannot parse " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot write scenario file: " + path);
  out << scenario_to_json(s).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Builtin scenarios
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<CameraSpec> ring_rig(int count, double radius, double height,
                                        double focal_px, double inward = 0.4) {
  std::vector<CameraSpec> cams;
  for (int k = 0; k < count; ++k) {
    const double angle = M_PI / 2.0 + 2.0 * M_PI * k / count;
    CameraSpec cam;
    cam.position = {radius * std::cos(angle), radius * std::sin(angle), height};
    // Slight inward tilt per camera: enough projective variety to make the
    // inter-view homographies non-trivial, small enough to keep footprints
    // overlapping.
    cam.look_at = {(1.0 - inward) * cam.position.x,
                   (1.0 - inward) * cam.position.y, 0.0};
    cam.focal_px = focal_px;
    cams.push_back(cam);
  }
  return cams;
}

// Horizontal in-and-out sweep as a triangle wave: keyframes every period/2
// frames alternating between an off-screen x and a position over the field
// centre.  `phase` flips which of the two frame 0 starts at.
inline std::vector<PathKey> sweep_path(int frames, int period, double on_x,
                                       double on_y, double off_x,
                                       int phase = 0) {
  std::vector<PathKey> path;
  const int half = std::max(period / 2, 1);
  int k = phase;
  for (int t = 0; t <= frames + half; t += half, ++k)
    path.push_back({t, (k % 2 == 0) ? off_x : on_x, on_y});
  return path;
}

}  // namespace detail

// Names accepted by `monoview simulate --scenario <name>` in addition to
// JSON files.
inline std::vector<std::string> builtin_scenario_names() {
  return {"static", "one-move", "occluded-then-clear", "two-moves-20min"};
}

inline Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "static") {
    s.width = 640;
    s.height = 480;
    s.frames = 600;
    s.fps = 30.0;
    s.cameras = detail::ring_rig(5, 0.1, 2.0, 800.0);
    s.jitter_sigma = 0.004;
  } else if (name == "one-move") {
    s.width = 640;
    s.height = 480;
    s.frames = 1800;
    s.fps = 30.0;
    s.cameras = detail::ring_rig(5, 0.1, 2.0, 800.0);
    s.jitter_sigma = 0.004;
    // Bumped-boom move: tilt about a horizontal axis through the rig plus a
    // height drop.  Both components are out-of-plane, so the inter-view
    // homographies genuinely change (see RigMoveSpec).
    RigMoveSpec move;
    move.frame = 900;
    move.angle_deg = 6.0;
    move.axis = {1.0, 0.0, 0.0};
    move.pivot = {0.0, 0.0, 2.0};
    move.translate = {0.01, 0.005, -0.2};
    s.rig_moves.push_back(move);
    // One oscillating occluder per camera, each with its own period, so the
    // least-occluded camera changes every few frames.
    const int periods[5] = {40, 56, 72, 88, 104};
    for (int cam = 0; cam < 5; ++cam) {
      OccluderSpec occ;
      occ.radius_px = 130.0;
      occ.rgb = {40, 90, 50};
      occ.blocks = {cam};
      occ.path = detail::sweep_path(s.frames, periods[cam], 320.0, 240.0,
                                    950.0, cam % 2);
      s.occluders.push_back(occ);
    }
  } else if (name == "occluded-then-clear") {
    s.width = 640;
    s.height = 480;
    s.frames = 1500;
    s.fps = 30.0;
    s.cameras = detail::ring_rig(5, 0.1, 2.0, 800.0);
    s.jitter_sigma = 0.002;
    OccluderSpec occ;
    occ.radius_px = 150.0;
    occ.rgb = {40, 90, 50};
    occ.blocks = {2};
    occ.path = {{0, 320.0, 240.0},
                {1199, 320.0, 240.0},
                {1200, 1100.0, 240.0},
                {1499, 1100.0, 240.0}};
    s.occluders.push_back(occ);
  } else if (name == "two-moves-20min") {
    s.width = 320;
    s.height = 240;
    s.frames = 1260;
    s.fps = 1.0;  // one frame per simulated second; 21 simulated minutes
    s.cameras = detail::ring_rig(3, 0.1, 2.0, 400.0);
    s.jitter_sigma = 0.002;
    RigMoveSpec first;
    first.frame = 250;
    first.angle_deg = 6.0;
    first.axis = {1.0, 0.0, 0.0};
    first.pivot = {0.0, 0.0, 2.0};
    first.translate = {0.0, 0.0, -0.15};
    RigMoveSpec second;
    second.frame = 1000;
    second.angle_deg = -5.0;
    second.axis = {0.0, 1.0, 0.0};
    second.pivot = {0.0, 0.0, 1.85};
    second.translate = {0.0, 0.0, 0.12};
    s.rig_moves = {first, second};
  } else {
    throw Error(ErrorCode::InvalidScenario, "unknown builtin scenario: " + name);
  }
  validate_scenario(s);
  return s;
}

}  // namespace monoview
