#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <opencv2/imgproc.hpp>

#include "monoview/geometry.hpp"

using namespace monoview;

namespace {

// ---------------------------------------------------------------------------
// Oracles / generators
// ---------------------------------------------------------------------------

// Random mild-perspective homography with |det| > 0.1 after normalization;
// the generation-and-recovery oracle for the estimators.
Homography random_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> affine(-0.2, 0.2);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  std::uniform_real_distribution<double> persp(-1e-4, 1e-4);
  for (;;) {
    std::array<double, 9> m = {1.0 + affine(rng), affine(rng), shift(rng),
                               affine(rng), 1.0 + affine(rng), shift(rng),
                               persp(rng), persp(rng), 1.0};
    try {
      Homography h = Homography::from_array(m);
      if (std::abs(h.det()) > 0.1) return h;
    } catch (const Error&) {
    }
  }
}

Point2 random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 640.0);
  return {u(rng), u(rng)};
}

CorrespondenceSet exact_pairs(const Homography& h, int n,
                              std::mt19937_64& rng) {
  CorrespondenceSet corr;
  corr.reserve(n);
  while (static_cast<int>(corr.size()) < n) {
    const Point2 p = random_point(rng);
    corr.push_back({p, warp_point(h, p)});
  }
  return corr;
}

double max_coeff_delta(const Homography& a, const Homography& b) {
  double d = 0;
  for (int i = 0; i < 9; ++i)
    d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

cv::Mat textured_image(int width, int height, std::uint64_t seed) {
  cv::Mat img(height, width, CV_8UC3);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, 255);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      auto& px = img.at<cv::Vec3b>(y, x);
      px[0] = static_cast<uchar>(level(rng));
      px[1] = static_cast<uchar>(level(rng));
      px[2] = static_cast<uchar>(level(rng));
    }
  // Smooth so bilinear resampling error stays well below the noise floor.
  cv::GaussianBlur(img, img, cv::Size(9, 9), 2.0);
  return img;
}

}  // namespace

// ---------------------------------------------------------------------------
// estimate_dlt
// ---------------------------------------------------------------------------

TEST(EstimateDlt, ExactIdentityFromCorners) {
  CorrespondenceSet corr = {{{0, 0}, {0, 0}},
                            {{640, 0}, {640, 0}},
                            {{640, 480}, {640, 480}},
                            {{0, 480}, {0, 480}}};
  const Homography h = estimate_dlt(corr);
  EXPECT_NEAR(max_coeff_delta(h, Homography::identity()), 0.0, 1e-9);
  EXPECT_DOUBLE_EQ(h.at(2, 2), 1.0);
}

TEST(EstimateDlt, ExactTranslation) {
  CorrespondenceSet corr;
  for (const Point2 p :
       {Point2{0, 0}, Point2{640, 0}, Point2{640, 480}, Point2{0, 480}})
    corr.push_back({p, {p.x + 10.0, p.y - 5.0}});
  const Homography h = estimate_dlt(corr);
  EXPECT_NEAR(max_coeff_delta(h, Homography::translation(10, -5)), 0.0, 1e-9);
}

TEST(EstimateDlt, RecoversRandomHomographies) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const Homography truth = random_homography(rng);
    const CorrespondenceSet corr = exact_pairs(truth, 20, rng);
    const Homography est = estimate_dlt(corr);
    double mean_err = 0;
    for (const auto& c : corr) mean_err += reprojection_error(est, c);
    mean_err /= static_cast<double>(corr.size());
    ASSERT_LT(mean_err, 1e-6) << "trial " << trial;
    ASSERT_LT(max_coeff_delta(est, truth), 1e-6) << "trial " << trial;
  }
}

TEST(EstimateDlt, ScaleCovariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const Homography truth = random_homography(rng);
    CorrespondenceSet corr = exact_pairs(truth, 12, rng);
    const double s = 3.5;
    CorrespondenceSet scaled;
    for (const auto& c : corr)
      scaled.push_back({{c.src.x * s, c.src.y * s}, {c.dst.x * s, c.dst.y * s}});
    const Homography est = estimate_dlt(scaled);
    for (int k = 0; k < 4; ++k) {
      const Point2 p = random_point(rng);
      const Point2 expect = warp_point(truth, p);
      const Point2 got = warp_point(est, {p.x * s, p.y * s});
      ASSERT_NEAR(got.x, expect.x * s, 1e-5) << "trial " << trial;
      ASSERT_NEAR(got.y, expect.y * s, 1e-5) << "trial " << trial;
    }
  }
}

TEST(EstimateDlt, LeastSquaresUnderNoise) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Homography truth = random_homography(rng);
    CorrespondenceSet corr = exact_pairs(truth, 100, rng);
    for (auto& c : corr) {
      c.dst.x += noise(rng);
      c.dst.y += noise(rng);
    }
    const Homography est = estimate_dlt(corr);
    double mean_err = 0;
    for (const auto& c : corr) mean_err += reprojection_error(est, c);
    mean_err /= static_cast<double>(corr.size());
    ASSERT_LT(mean_err, 1.0) << "trial " << trial;
  }
}

TEST(EstimateDlt, TooFewPoints) {
  CorrespondenceSet corr = {{{0, 0}, {1, 1}}, {{5, 0}, {6, 1}}, {{0, 5}, {1, 6}}};
  try {
    estimate_dlt(corr);
    FAIL() << "expected TooFewPoints";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

TEST(EstimateDlt, CollinearMinimalSet) {
  // Three collinear source points in a minimal set.
  CorrespondenceSet corr = {{{0, 0}, {0, 0}},
                            {{10, 10}, {12, 9}},
                            {{20, 20}, {25, 18}},
                            {{5, 100}, {7, 102}}};
  try {
    estimate_dlt(corr);
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(EstimateDlt, DuplicatePointMinimalSet) {
  CorrespondenceSet corr = {{{0, 0}, {0, 0}},
                            {{0, 0}, {1, 1}},
                            {{100, 20}, {101, 22}},
                            {{5, 100}, {7, 102}}};
  try {
    estimate_dlt(corr);
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(EstimateDlt, AllCollinearLargeSet) {
  CorrespondenceSet corr;
  for (int i = 0; i < 10; ++i) {
    const double t = 10.0 * i;
    corr.push_back({{t, 2.0 * t}, {t + 3.0, 2.0 * t - 1.0}});
  }
  try {
    estimate_dlt(corr);
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(EstimateDlt, NonFiniteInput) {
  std::mt19937_64 rng(3);
  CorrespondenceSet corr = exact_pairs(random_homography(rng), 8, rng);
  corr[2].dst.x = std::numeric_limits<double>::quiet_NaN();
  try {
    estimate_dlt(corr);
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

// ---------------------------------------------------------------------------
// estimate_ransac
// ---------------------------------------------------------------------------

TEST(EstimateRansac, CleanDataMatchesDlt) {
  std::mt19937_64 rng(21);
  const Homography truth = random_homography(rng);
  const CorrespondenceSet corr = exact_pairs(truth, 40, rng);
  RansacConfig config;
  config.seed = 5;
  const RansacResult res = estimate_ransac(corr, config);
  EXPECT_EQ(res.inlier_count, 40);
  EXPECT_LT(max_coeff_delta(res.model, estimate_dlt(corr)), 1e-9);
  for (bool b : res.inlier_mask) EXPECT_TRUE(b);
}

TEST(EstimateRansac, RecoversUnderContamination) {
  std::mt19937_64 rng(31);
  const Homography truth = random_homography(rng);
  CorrespondenceSet corr = exact_pairs(truth, 100, rng);
  for (int i = 0; i < 30; ++i)
    corr.push_back({random_point(rng), random_point(rng)});
  RansacConfig config;
  config.seed = 17;
  const RansacResult res = estimate_ransac(corr, config);
  int true_inliers_flagged = 0;
  double err_sum = 0;
  for (int i = 0; i < 100; ++i) {
    if (res.inlier_mask[i]) ++true_inliers_flagged;
    err_sum += reprojection_error(res.model, corr[i]);
  }
  EXPECT_GE(true_inliers_flagged, 95);
  EXPECT_LT(err_sum / 100.0, 1.0);
}

TEST(EstimateRansac, DeterministicForFixedSeed) {
  std::mt19937_64 rng(77);
  const Homography truth = random_homography(rng);
  CorrespondenceSet corr = exact_pairs(truth, 60, rng);
  for (int i = 0; i < 25; ++i)
    corr.push_back({random_point(rng), random_point(rng)});
  RansacConfig config;
  config.seed = 123;
  const RansacResult a = estimate_ransac(corr, config);
  const RansacResult b = estimate_ransac(corr, config);
  for (int i = 0; i < 9; ++i)
    EXPECT_EQ(a.model.data()[i], b.model.data()[i]);  // bit-identical
  EXPECT_EQ(a.inlier_mask, b.inlier_mask);
  EXPECT_EQ(a.inlier_count, b.inlier_count);
}

TEST(EstimateRansac, MaskConsistentWithTolerance) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Homography truth = random_homography(rng);
    CorrespondenceSet corr = exact_pairs(truth, 30, rng);
    for (int i = 0; i < 10; ++i)
      corr.push_back({random_point(rng), random_point(rng)});
    RansacConfig config;
    config.seed = trial;
    const RansacResult res = estimate_ransac(corr, config);
    int count = 0;
    for (size_t i = 0; i < corr.size(); ++i) {
      const double err = reprojection_error(res.model, corr[i]);
      ASSERT_EQ(res.inlier_mask[i], err <= config.inlier_tolerance)
          << "trial " << trial << " pair " << i;
      if (res.inlier_mask[i]) ++count;
    }
    ASSERT_EQ(count, res.inlier_count);
  }
}

TEST(EstimateRansac, DegenerateMinimalSet) {
  CorrespondenceSet corr = {{{0, 0}, {0, 0}},
                            {{10, 10}, {12, 9}},
                            {{20, 20}, {25, 18}},
                            {{5, 100}, {7, 102}}};
  try {
    estimate_ransac(corr);
    FAIL() << "expected NoModelFound";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoModelFound);
  }
}

TEST(EstimateRansac, TooFewPoints) {
  CorrespondenceSet corr = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}};
  try {
    estimate_ransac(corr);
    FAIL() << "expected TooFewPoints";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

TEST(EstimateRansac, InvalidConfigRejected) {
  std::mt19937_64 rng(5);
  const CorrespondenceSet corr = exact_pairs(random_homography(rng), 10, rng);
  RansacConfig config;
  config.inlier_tolerance = -1.0;
  try {
    estimate_ransac(corr, config);
    FAIL() << "expected InvalidConfig";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

// ---------------------------------------------------------------------------
// Homography algebra / warp_point
// ---------------------------------------------------------------------------

TEST(Homography, ComposeInverseIsIdentity) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    const Homography h = random_homography(rng);
    const Homography round = h * h.inverse();
    ASSERT_LT(max_coeff_delta(round, Homography::identity()), 1e-9)
        << "trial " << trial;
  }
}

TEST(Homography, WarpPointRoundTrip) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 1000; ++trial) {
    const Homography h = random_homography(rng);
    const Homography hinv = h.inverse();
    const Point2 p = random_point(rng);
    const Point2 back = warp_point(hinv, warp_point(h, p));
    ASSERT_NEAR(back.x, p.x, 1e-8);
    ASSERT_NEAR(back.y, p.y, 1e-8);
  }
}

TEST(Homography, SingularMatrixRejected) {
  try {
    Homography::from_array({1, 2, 3, 2, 4, 6, 0, 0, 1});
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(Homography, NormalizesBottomRight) {
  const Homography h = Homography::from_array({2, 0, 0, 0, 2, 0, 0, 0, 2});
  EXPECT_DOUBLE_EQ(h.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(h.at(2, 2), 1.0);
}

TEST(WarpPoint, TranslationFixture) {
  const Homography h = Homography::translation(10, -5);
  const Point2 q = warp_point(h, {3, 4});
  EXPECT_DOUBLE_EQ(q.x, 13.0);
  EXPECT_DOUBLE_EQ(q.y, -1.0);
}

TEST(WarpPoint, PointAtInfinity) {
  const Homography h =
      Homography::from_array({1, 0, 0, 0, 1, 0, 0.01, 0, 1});
  try {
    warp_point(h, {-100.0, 7.0});  // w = 1 + 0.01 * (-100) = 0
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

// ---------------------------------------------------------------------------
// warp_image
// ---------------------------------------------------------------------------

TEST(WarpImage, IdentityIsBitExact) {
  const cv::Mat img = textured_image(160, 120, 9001);
  const cv::Mat out = warp_image(Homography::identity(), img, 160, 120);
  EXPECT_EQ(cv::countNonZero(cv::Mat(out != img).reshape(1)), 0);
}

TEST(WarpImage, IntegerTranslationShiftsExactly) {
  const cv::Mat img = textured_image(160, 120, 9002);
  // h maps src -> out, so content moves by (+5, +3).
  const cv::Mat out = warp_image(Homography::translation(5, 3), img, 160, 120);
  const cv::Mat expected = img(cv::Rect(0, 0, 155, 117));
  const cv::Mat got = out(cv::Rect(5, 3, 155, 117));
  EXPECT_EQ(cv::countNonZero(cv::Mat(got != expected).reshape(1)), 0);
  // Entering band is black.
  const cv::Mat band = out(cv::Rect(0, 0, 5, 120));
  EXPECT_EQ(cv::countNonZero(band.reshape(1)), 0);
}

TEST(WarpImage, RoundTripMad) {
  const cv::Mat img = textured_image(320, 240, 9003);
  const Homography h = Homography::from_array(
      {1.02, 0.015, 4.0, -0.01, 0.985, -2.5, 1e-5, -2e-5, 1.0});
  const cv::Mat once = warp_image(h, img, 320, 240);
  const cv::Mat back = warp_image(h.inverse(), once, 320, 240);
  // Compare only pixels that survived both warps (stay away from borders).
  double sum = 0;
  int count = 0;
  for (int y = 20; y < 220; ++y)
    for (int x = 20; x < 300; ++x) {
      const auto& a = img.at<cv::Vec3b>(y, x);
      const auto& b = back.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) {
        sum += std::abs(int(a[c]) - int(b[c]));
        ++count;
      }
    }
  EXPECT_LT(sum / count, 2.0);
}

TEST(WarpImage, RejectsBadInputs) {
  try {
    warp_image(Homography::identity(), cv::Mat(), 10, 10);
    FAIL() << "expected ImageTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
  cv::Mat floatimg(10, 10, CV_32FC1);
  try {
    warp_image(Homography::identity(), floatimg, 10, 10);
    FAIL() << "expected InvalidConfig";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}
