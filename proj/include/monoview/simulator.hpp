#pragma once

// Synthetic multi-camera simulator.  Renders a planar textured scene from a
// rig of pinhole cameras and reports exact ground truth: inter-view
// homographies, rig move frames and per-frame occlusion fractions.
//
// Determinism: the texture, the jitter sequence and every per-frame pose are
// derived up front from (scenario, seed) in a fixed order, and each frame is
// a pure function of that state — renders are bit-identical regardless of
// the order or number of frame() calls.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "monoview/frame_source.hpp"
#include "monoview/geometry.hpp"
#include "monoview/scenario.hpp"

namespace monoview {

struct GroundTruth {
  std::vector<int> move_frames;
  // homography_to_ref[t][cam] maps view `cam` pixels into camera 0 pixels.
  std::vector<std::vector<Homography>> homography_to_ref;
  // Fraction of the frame covered by occluder discs, exact per rasterization.
  std::vector<std::vector<double>> occlusion_fraction;
};

namespace detail {

inline Vec3 add(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 sub(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(Vec3 v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
inline Vec3 normalize(Vec3 v) {
  const double len = length(v);
  return {v.x / len, v.y / len, v.z / len};
}

struct ResolvedPose {
  Vec3 position;
  Vec3 look_at;
};

// Plane (z=0, world (u,v)) to image homography for a pinhole camera.
inline Homography plane_to_image(const ResolvedPose& pose, double focal_px,
                                 int width, int height) {
  const Vec3 zc = normalize(sub(pose.look_at, pose.position));
  Vec3 up = {0, 1, 0};
  if (length(cross(zc, up)) < 1e-9) up = {1, 0, 0};
  const Vec3 xc = normalize(cross(zc, up));
  const Vec3 yc = cross(zc, xc);
  // Rows of R (world -> camera).
  const Vec3 r0 = xc, r1 = yc, r2 = zc;
  const Vec3& c = pose.position;
  // Column for u, column for v, and -R*C.
  const double m00 = r0.x, m01 = r0.y, m02 = -(r0.x * c.x + r0.y * c.y + r0.z * c.z);
  const double m10 = r1.x, m11 = r1.y, m12 = -(r1.x * c.x + r1.y * c.y + r1.z * c.z);
  const double m20 = r2.x, m21 = r2.y, m22 = -(r2.x * c.x + r2.y * c.y + r2.z * c.z);
  const double cx = width / 2.0, cy = height / 2.0;
  return Homography::from_array({focal_px * m00 + cx * m20,
                                 focal_px * m01 + cx * m21,
                                 focal_px * m02 + cx * m22,
                                 focal_px * m10 + cy * m20,
                                 focal_px * m11 + cy * m21,
                                 focal_px * m12 + cy * m22,
                                 m20, m21, m22});
}

inline Vec3 apply_rig_move(const RigMoveSpec& mv, Vec3 p) {
  Vec3 out = sub(p, mv.pivot);
  if (mv.angle_deg != 0.0) {
    // Rodrigues rotation about the (normalized) move axis.
    const Vec3 k = normalize(mv.axis);
    const double theta = mv.angle_deg * M_PI / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const Vec3 kxp = cross(k, out);
    const double kdp = k.x * out.x + k.y * out.y + k.z * out.z;
    out = {out.x * c + kxp.x * s + k.x * kdp * (1 - c),
           out.y * c + kxp.y * s + k.y * kdp * (1 - c),
           out.z * c + kxp.z * s + k.z * kdp * (1 - c)};
  }
  return add(add(out, mv.pivot), mv.translate);
}

inline cv::Mat generate_texture(const Scenario& scn, std::uint64_t seed) {
  const TextureSpec& t = scn.plane.texture;
  if (t.type == TextureSpec::Type::File) {
    cv::Mat img = cv::imread(t.path, cv::IMREAD_COLOR);
    if (img.empty())
      throw Error(ErrorCode::IoError, "cannot load texture: " + t.path);
    return img;
  }
  const double hx = scn.plane.half_extent[0], hy = scn.plane.half_extent[1];
  const double su = 2.0 * hx / t.width, sv = 2.0 * hy / t.height;
  cv::Mat tex(t.height, t.width, CV_8UC3);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(-t.noise_amplitude,
                                           t.noise_amplitude);
  const double r2 = t.field_radius * t.field_radius;
  for (int y = 0; y < t.height; ++y) {
    cv::Vec3b* row = tex.ptr<cv::Vec3b>(y);
    const double v = -hy + y * sv;
    for (int x = 0; x < t.width; ++x) {
      const double u = -hx + x * su;
      int r, g, b;
      const double du = u - t.field_center[0], dv = v - t.field_center[1];
      if (t.field_disc && du * du + dv * dv <= r2) {
        r = t.field_rgb[0];
        g = t.field_rgb[1];
        b = t.field_rgb[2];
      } else {
        const int cell = (x / t.checker_px + y / t.checker_px) % 2;
        r = g = b = t.gray_levels[cell];
      }
      // Equal-channel noise: texture everywhere, zero saturation outside the
      // field disc, unchanged hue inside it.
      const int n = noise(rng);
      row[x] = cv::Vec3b(cv::saturate_cast<uchar>(b + n),
                         cv::saturate_cast<uchar>(g + n),
                         cv::saturate_cast<uchar>(r + n));
    }
  }
  return tex;
}

inline cv::Point2d occluder_center(const OccluderSpec& occ, int t) {
  const auto& path = occ.path;
  if (t <= path.front().frame) return {path.front().x, path.front().y};
  if (t >= path.back().frame) return {path.back().x, path.back().y};
  for (size_t i = 1; i < path.size(); ++i) {
    if (t <= path[i].frame) {
      const auto& a = path[i - 1];
      const auto& b = path[i];
      const double f = static_cast<double>(t - a.frame) /
                       static_cast<double>(b.frame - a.frame);
      return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
    }
  }
  return {path.back().x, path.back().y};
}

}  // namespace detail

class Simulation : public FrameSource {
 public:
  Simulation(Scenario scenario, std::uint64_t seed)
      : scenario_(std::move(scenario)), seed_(seed) {
    validate_scenario(scenario_);
    texture_ = detail::generate_texture(scenario_, seed_);
    resolve_poses();
    build_ground_truth();
  }

  int frame_count() const override { return scenario_.frames; }
  int camera_count() const override {
    return static_cast<int>(scenario_.cameras.size());
  }

  cv::Mat frame(int t, int camera) const override {
    check_range(t, camera);
    cv::Mat img = warp_image(tex_to_image_[t][camera], texture_,
                             scenario_.width, scenario_.height);
    draw_occluders(t, camera, img);
    return img;
  }

  const Scenario& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  const GroundTruth& ground_truth() const { return ground_truth_; }
  const cv::Mat& texture() const { return texture_; }

  // Plane-texture to image homography for (t, camera); the ground-truth
  // inter-view maps are quotients of these.
  const Homography& texture_homography(int t, int camera) const {
    check_range(t, camera);
    return tex_to_image_[t][camera];
  }

 private:
  void check_range(int t, int camera) const {
    if (t < 0 || t >= scenario_.frames)
      throw Error(ErrorCode::InvalidConfig,
                  "frame index out of range: " + std::to_string(t));
    if (camera < 0 || camera >= camera_count())
      throw Error(ErrorCode::InvalidConfig,
                  "camera index out of range: " + std::to_string(camera));
  }

  void resolve_poses() {
    const int frames = scenario_.frames;
    const int cams = camera_count();
    // Jitter deltas first, in frame order, from their own stream.
    std::vector<Vec3> jitter(frames, Vec3{});
    if (scenario_.jitter_sigma > 0) {
      std::mt19937_64 rng(seed_ ^ 0x9e3779b97f4a7c15ULL);
      std::normal_distribution<double> gauss(0.0, scenario_.jitter_sigma);
      for (int t = 0; t < frames; ++t) {
        const double dx = gauss(rng);
        const double dy = gauss(rng);
        jitter[t] = {dx, dy, 0.0};
      }
    }
    std::vector<detail::ResolvedPose> current;
    current.reserve(cams);
    for (const auto& cam : scenario_.cameras)
      current.push_back({cam.position, cam.look_at});
    tex_to_image_.assign(frames, {});
    const double hx = scenario_.plane.half_extent[0];
    const double hy = scenario_.plane.half_extent[1];
    const Homography tex_to_world = Homography::from_array(
        {2.0 * hx / texture_.cols, 0, -hx, 0, 2.0 * hy / texture_.rows, -hy, 0,
         0, 1});
    size_t move_idx = 0;
    for (int t = 0; t < frames; ++t) {
      while (move_idx < scenario_.rig_moves.size() &&
             scenario_.rig_moves[move_idx].frame == t) {
        const auto& mv = scenario_.rig_moves[move_idx];
        for (auto& pose : current) {
          pose.position = detail::apply_rig_move(mv, pose.position);
          pose.look_at = detail::apply_rig_move(mv, pose.look_at);
        }
        ++move_idx;
      }
      tex_to_image_[t].reserve(cams);
      for (int cam = 0; cam < cams; ++cam) {
        detail::ResolvedPose pose = current[cam];
        pose.position = detail::add(pose.position, jitter[t]);
        pose.look_at = detail::add(pose.look_at, jitter[t]);
        tex_to_image_[t].push_back(
            detail::plane_to_image(pose, scenario_.cameras[cam].focal_px,
                                   scenario_.width, scenario_.height) *
            tex_to_world);
      }
    }
  }

  void build_ground_truth() {
    const int frames = scenario_.frames;
    const int cams = camera_count();
    for (const auto& mv : scenario_.rig_moves)
      ground_truth_.move_frames.push_back(mv.frame);
    ground_truth_.homography_to_ref.assign(frames, {});
    for (int t = 0; t < frames; ++t) {
      auto& row = ground_truth_.homography_to_ref[t];
      row.reserve(cams);
      const Homography& to_ref = tex_to_image_[t][0];
      for (int cam = 0; cam < cams; ++cam)
        row.push_back(to_ref * tex_to_image_[t][cam].inverse());
    }
    ground_truth_.occlusion_fraction.assign(
        frames, std::vector<double>(cams, 0.0));
    if (scenario_.occluders.empty()) return;
    cv::Mat mask(scenario_.height, scenario_.width, CV_8UC1);
    const double total = static_cast<double>(scenario_.width) * scenario_.height;
    for (int t = 0; t < frames; ++t)
      for (int cam = 0; cam < cams; ++cam) {
        bool any = false;
        mask.setTo(0);
        for (const auto& occ : scenario_.occluders) {
          if (std::find(occ.blocks.begin(), occ.blocks.end(), cam) ==
              occ.blocks.end())
            continue;
          const cv::Point2d c = detail::occluder_center(occ, t);
          cv::circle(mask,
                     cv::Point(static_cast<int>(std::lround(c.x)),
                               static_cast<int>(std::lround(c.y))),
                     static_cast<int>(std::lround(occ.radius_px)), 255,
                     cv::FILLED, cv::LINE_8);
          any = true;
        }
        if (any)
          ground_truth_.occlusion_fraction[t][cam] =
              cv::countNonZero(mask) / total;
      }
  }

  void draw_occluders(int t, int camera, cv::Mat& img) const {
    for (const auto& occ : scenario_.occluders) {
      if (std::find(occ.blocks.begin(), occ.blocks.end(), camera) ==
          occ.blocks.end())
        continue;
      const cv::Point2d c = detail::occluder_center(occ, t);
      // Same integer center/radius as the ground-truth mask, so reported
      // occlusion fractions match the rendered pixels exactly.
      cv::circle(img,
                 cv::Point(static_cast<int>(std::lround(c.x)),
                           static_cast<int>(std::lround(c.y))),
                 static_cast<int>(std::lround(occ.radius_px)),
                 cv::Scalar(occ.rgb[2], occ.rgb[1], occ.rgb[0]), cv::FILLED,
                 cv::LINE_8);
    }
  }

  Scenario scenario_;
  std::uint64_t seed_;
  cv::Mat texture_;
  std::vector<std::vector<Homography>> tex_to_image_;  // [t][cam]
  GroundTruth ground_truth_;
};

// Renders a scenario into a lazily evaluated frame source plus ground truth.
inline Simulation simulate(const Scenario& scenario, std::uint64_t seed) {
  return Simulation(scenario, seed);
}

}  // namespace monoview
