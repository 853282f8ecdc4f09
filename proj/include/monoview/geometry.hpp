#pragma once

// Planar geometry: homographies, DLT estimation, RANSAC, image warping.
//
// Conventions used throughout:
//   * pixel coordinates are doubles, origin top-left, x right, y down;
//   * homographies are row-major 3x3, normalized so m[2][2] == 1 whenever
//     m[2][2] != 0, and always invertible (|det| > 1e-12);
//   * (a * b) maps a point p as a(b(p)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <opencv2/core.hpp>

#include "monoview/errors.hpp"

namespace monoview {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

struct Correspondence {
  Point2 src;
  Point2 dst;
};

using CorrespondenceSet = std::vector<Correspondence>;

// ---------------------------------------------------------------------------
// Homography
// ---------------------------------------------------------------------------

class Homography {
 public:
  // Identity by default.
  Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

  // Builds from row-major coefficients, rescaling so m[2][2] == 1 when
  // possible.  Throws DegenerateConfiguration when the matrix is singular
  // (|det| <= 1e-12 after normalization) or contains non-finite values.
  static Homography from_array(const std::array<double, 9>& coeffs) {
    Homography h;
    h.m_ = coeffs;
    for (double v : h.m_) {
      if (!std::isfinite(v))
        throw Error(ErrorCode::DegenerateConfiguration,
                    "homography has non-finite coefficients");
    }
    if (std::abs(h.m_[8]) > 1e-12) {
      const double s = 1.0 / h.m_[8];
      for (double& v : h.m_) v *= s;
    }
    if (std::abs(h.det()) <= 1e-12)
      throw Error(ErrorCode::DegenerateConfiguration,
                  "homography is singular");
    return h;
  }

  static Homography identity() { return Homography(); }

  static Homography translation(double tx, double ty) {
    return from_array({1, 0, tx, 0, 1, ty, 0, 0, 1});
  }

  static Homography scaling(double sx, double sy) {
    return from_array({sx, 0, 0, 0, sy, 0, 0, 0, 1});
  }

  double at(int row, int col) const { return m_[row * 3 + col]; }
  const std::array<double, 9>& data() const { return m_; }

  double det() const {
    const auto& a = m_;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) -
           a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  Homography inverse() const {
    const double d = det();
    if (std::abs(d) <= 1e-12)
      throw Error(ErrorCode::DegenerateConfiguration,
                  "homography is not invertible");
    const auto& a = m_;
    const double s = 1.0 / d;
    std::array<double, 9> inv = {
        (a[4] * a[8] - a[5] * a[7]) * s, (a[2] * a[7] - a[1] * a[8]) * s,
        (a[1] * a[5] - a[2] * a[4]) * s, (a[5] * a[6] - a[3] * a[8]) * s,
        (a[0] * a[8] - a[2] * a[6]) * s, (a[2] * a[3] - a[0] * a[5]) * s,
        (a[3] * a[7] - a[4] * a[6]) * s, (a[1] * a[6] - a[0] * a[7]) * s,
        (a[0] * a[4] - a[1] * a[3]) * s};
    return from_array(inv);
  }

  friend Homography operator*(const Homography& a, const Homography& b) {
    std::array<double, 9> p{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        p[r * 3 + c] = a.at(r, 0) * b.at(0, c) + a.at(r, 1) * b.at(1, c) +
                       a.at(r, 2) * b.at(2, c);
    return from_array(p);
  }

 private:
  std::array<double, 9> m_;
};

// Applies h to p.  Throws DegenerateConfiguration when p maps to infinity.
inline Point2 warp_point(const Homography& h, Point2 p) {
  const auto& a = h.data();
  const double w = a[6] * p.x + a[7] * p.y + a[8];
  if (std::abs(w) <= 1e-12)
    throw Error(ErrorCode::DegenerateConfiguration, "point maps to infinity");
  return {(a[0] * p.x + a[1] * p.y + a[2]) / w,
          (a[3] * p.x + a[4] * p.y + a[5]) / w};
}

inline double reprojection_error(const Homography& h, const Correspondence& c) {
  return norm(warp_point(h, c.src) - c.dst);
}

// ---------------------------------------------------------------------------
// DLT estimation
// ---------------------------------------------------------------------------

namespace detail {

// Twice the signed triangle area; zero for collinear or duplicate points.
inline double triangle_area2(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool has_collinear_triple(const std::vector<Point2>& pts) {
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      for (size_t k = j + 1; k < n; ++k)
        if (std::abs(triangle_area2(pts[i], pts[j], pts[k])) < 2e-9)
          return true;
  return false;
}

struct Normalization {
  // Similarity transform mapping the input points to centroid 0 and mean
  // distance sqrt(2) (Hartley conditioning).
  Homography transform;
  std::vector<Point2> points;
};

inline Normalization normalize_points(const std::vector<Point2>& pts) {
  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12)
    throw Error(ErrorCode::DegenerateConfiguration,
                "all points coincide");
  const double s = std::sqrt(2.0) / mean_dist;
  Normalization out;
  out.transform =
      Homography::from_array({s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1});
  out.points.reserve(pts.size());
  for (const auto& p : pts) out.points.push_back({(p.x - cx) * s, (p.y - cy) * s});
  return out;
}

}  // namespace detail

// Least-squares homography from >= 4 correspondences via the normalized DLT.
//
// Throws TooFewPoints for n < 4 and DegenerateConfiguration when the
// configuration does not determine a homography: for n == 4 any collinear
// (or duplicate) triple among the source or destination points, for larger
// sets a rank-deficient design matrix.  Exact inputs are reproduced to
// ~1e-6 px; noisy inputs get the algebraic least-squares fit.
inline Homography estimate_dlt(const CorrespondenceSet& corr) {
  const size_t n = corr.size();
  if (n < 4)
    throw Error(ErrorCode::TooFewPoints,
                "estimate_dlt needs at least 4 correspondences, got " +
                    std::to_string(n));
  std::vector<Point2> src, dst;
  src.reserve(n);
  dst.reserve(n);
  for (const auto& c : corr) {
    if (!std::isfinite(c.src.x) || !std::isfinite(c.src.y) ||
        !std::isfinite(c.dst.x) || !std::isfinite(c.dst.y))
      throw Error(ErrorCode::DegenerateConfiguration,
                  "correspondence contains non-finite coordinates");
    src.push_back(c.src);
    dst.push_back(c.dst);
  }
  // A minimal set leaves no redundancy, so degeneracy is checked explicitly;
  // overdetermined sets are vetted through the conditioning of the design
  // matrix below (collinear triples are then harmless).
  if (n == 4 && (detail::has_collinear_triple(src) ||
                 detail::has_collinear_triple(dst)))
    throw Error(ErrorCode::DegenerateConfiguration,
                "minimal set contains a collinear or duplicate triple");

  const auto ns = detail::normalize_points(src);
  const auto nd = detail::normalize_points(dst);

  Eigen::MatrixXd A(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    const auto& s = ns.points[i];
    const auto& d = nd.points[i];
    A.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
    A.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank < 8 means the null space is not one-dimensional: the points do not
  // pin down a homography (e.g. everything collinear).
  if (sv(7) < 1e-9 * sv(0))
    throw Error(ErrorCode::DegenerateConfiguration,
                "correspondences do not determine a homography");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  std::array<double, 9> hm;
  for (int i = 0; i < 9; ++i) hm[i] = h(i);
  const Homography h_norm = Homography::from_array(hm);
  return nd.transform.inverse() * h_norm * ns.transform;
}

// ---------------------------------------------------------------------------
// RANSAC
// ---------------------------------------------------------------------------

struct RansacConfig {
  double inlier_tolerance = 3.0;  // px reprojection error
  double confidence = 0.995;
  int max_iterations = 2000;
  std::uint64_t seed = 0;
};

struct RansacResult {
  Homography model;
  std::vector<bool> inlier_mask;  // vs. the returned model, <= tolerance
  int inlier_count = 0;
};

namespace detail {

inline int count_inliers(const Homography& h, const CorrespondenceSet& corr,
                         double tol, std::vector<bool>* mask,
                         double* sse = nullptr) {
  int count = 0;
  double err_sum = 0;
  if (mask) mask->assign(corr.size(), false);
  for (size_t i = 0; i < corr.size(); ++i) {
    double e;
    try {
      e = reprojection_error(h, corr[i]);
    } catch (const Error&) {
      continue;  // point maps to infinity: outlier
    }
    if (e <= tol) {
      ++count;
      err_sum += e * e;
      if (mask) (*mask)[i] = true;
    }
  }
  if (sse) *sse = err_sum;
  return count;
}

}  // namespace detail

// Robust homography estimation.  Deterministic for a fixed seed: the sampler
// is a seeded mt19937_64 and every tie is broken by iteration order.  The
// returned model is refit by DLT on the consensus set and the mask marks
// pairs whose reprojection error against that refit model is within
// tolerance.  Throws TooFewPoints (n < 4) and NoModelFound when no sample
// yields a non-degenerate model with >= 4 inliers.
inline RansacResult estimate_ransac(const CorrespondenceSet& corr,
                                    const RansacConfig& config = {}) {
  const size_t n = corr.size();
  if (n < 4)
    throw Error(ErrorCode::TooFewPoints,
                "estimate_ransac needs at least 4 correspondences, got " +
                    std::to_string(n));
  if (config.inlier_tolerance <= 0 || config.confidence <= 0 ||
      config.confidence >= 1 || config.max_iterations < 1)
    throw Error(ErrorCode::InvalidConfig, "invalid RANSAC configuration");

  std::mt19937_64 rng(config.seed);
  Homography best;
  bool have_best = false;
  int best_count = 0;
  double best_sse = 0;

  const auto try_model = [&](const Homography& h) {
    double sse = 0;
    const int count = detail::count_inliers(h, corr, config.inlier_tolerance,
                                            nullptr, &sse);
    if (count > best_count || (count == best_count && have_best && sse < best_sse)) {
      best = h;
      best_count = count;
      best_sse = sse;
      have_best = true;
    }
  };

  if (n == 4) {
    // Only one sample exists; no point iterating.
    try {
      try_model(estimate_dlt(corr));
    } catch (const Error&) {
    }
  } else {
    int needed = config.max_iterations;
    std::array<size_t, 4> idx{};
    for (int iter = 0; iter < needed; ++iter) {
      // Draw 4 distinct indices.
      for (int k = 0; k < 4; ++k) {
        size_t candidate;
        bool fresh;
        do {
          candidate = static_cast<size_t>(rng() % n);
          fresh = true;
          for (int j = 0; j < k; ++j)
            if (idx[j] == candidate) fresh = false;
        } while (!fresh);
        idx[k] = candidate;
      }
      CorrespondenceSet sample = {corr[idx[0]], corr[idx[1]], corr[idx[2]],
                                  corr[idx[3]]};
      try {
        try_model(estimate_dlt(sample));
      } catch (const Error&) {
        continue;  // degenerate sample; costs one iteration
      }
      if (best_count > 0) {
        const double w =
            static_cast<double>(best_count) / static_cast<double>(n);
        const double p_good = std::pow(w, 4);
        if (p_good >= 1.0 - 1e-12) break;
        const double denom = std::log1p(-p_good);
        if (denom < 0) {
          const int est = static_cast<int>(
              std::ceil(std::log(1.0 - config.confidence) / denom));
          needed = std::clamp(est, iter + 1, config.max_iterations);
        }
      }
    }
  }

  if (!have_best || best_count < 4)
    throw Error(ErrorCode::NoModelFound,
                "RANSAC found no homography with at least 4 inliers");

  // Refit on the consensus set, then once more on the refreshed set so the
  // mask and the returned model agree.
  RansacResult out;
  out.model = best;
  for (int round = 0; round < 2; ++round) {
    std::vector<bool> mask;
    detail::count_inliers(out.model, corr, config.inlier_tolerance, &mask);
    CorrespondenceSet inliers;
    for (size_t i = 0; i < n; ++i)
      if (mask[i]) inliers.push_back(corr[i]);
    if (inliers.size() < 4) break;
    try {
      out.model = estimate_dlt(inliers);
    } catch (const Error&) {
      break;  // keep the previous model; mask recomputed below
    }
  }
  out.inlier_count = detail::count_inliers(
      out.model, corr, config.inlier_tolerance, &out.inlier_mask);
  if (out.inlier_count < 4)
    throw Error(ErrorCode::NoModelFound,
                "RANSAC consensus collapsed below 4 inliers after refit");
  return out;
}

// ---------------------------------------------------------------------------
// Image warping
// ---------------------------------------------------------------------------

// Warps src into an out_width x out_height canvas so that output(p) equals
// src(h^-1 p), sampled bilinearly; pixels mapping outside src are black.
// Accepts 8-bit 1- or 3-channel images.
inline cv::Mat warp_image(const Homography& h, const cv::Mat& src,
                          int out_width, int out_height) {
  if (src.empty())
    throw Error(ErrorCode::ImageTooSmall, "warp_image: empty input");
  if (src.type() != CV_8UC1 && src.type() != CV_8UC3)
    throw Error(ErrorCode::InvalidConfig,
                "warp_image: expected 8-bit 1- or 3-channel image");
  if (out_width <= 0 || out_height <= 0)
    throw Error(ErrorCode::InvalidConfig, "warp_image: invalid output size");

  const Homography hinv = h.inverse();
  const auto& a = hinv.data();
  cv::Mat out = cv::Mat::zeros(out_height, out_width, src.type());
  const int channels = src.channels();
  const int sw = src.cols, sh = src.rows;

  for (int y = 0; y < out_height; ++y) {
    uchar* row = out.ptr<uchar>(y);
    for (int x = 0; x < out_width; ++x) {
      const double w = a[6] * x + a[7] * y + a[8];
      if (std::abs(w) <= 1e-12) continue;
      const double sx = (a[0] * x + a[1] * y + a[2]) / w;
      const double sy = (a[3] * x + a[4] * y + a[5]) / w;
      if (sx < 0 || sy < 0 || sx > sw - 1 || sy > sh - 1) continue;
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, sw - 1);
      const int y1 = std::min(y0 + 1, sh - 1);
      const double fx = sx - x0, fy = sy - y0;
      const double w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy);
      const double w10 = (1 - fx) * fy, w11 = fx * fy;
      const uchar* r0 = src.ptr<uchar>(y0);
      const uchar* r1 = src.ptr<uchar>(y1);
      for (int c = 0; c < channels; ++c) {
        const double v = w00 * r0[x0 * channels + c] +
                         w01 * r0[x1 * channels + c] +
                         w10 * r1[x0 * channels + c] +
                         w11 * r1[x1 * channels + c];
        row[x * channels + c] = cv::saturate_cast<uchar>(std::lround(v));
      }
    }
  }
  return out;
}

}  // namespace monoview
