#include "skyspeed/calibration.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "skyspeed/error.hpp"

namespace skyspeed {
namespace {

std::array<Correspondence, 4> square_to(double dx, double dy) {
  return {Correspondence{{0, 0}, {0 + dx, 0 + dy}}, Correspondence{{1, 0}, {1 + dx, 0 + dy}},
          Correspondence{{1, 1}, {1 + dx, 1 + dy}}, Correspondence{{0, 1}, {0 + dx, 1 + dy}}};
}

double max_abs_diff(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

Eigen::Matrix3d to_matrix(const std::array<double, 9>& m) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 9; ++i) out(i / 3, i % 3) = m[static_cast<std::size_t>(i)];
  return out;
}

TEST(EstimateHomography, UnitSquareToItselfIsIdentity) {
  const auto h = estimate_homography(square_to(0, 0));
  EXPECT_LT(max_abs_diff(h.matrix(), Eigen::Matrix3d::Identity()), 1e-12);
}

TEST(EstimateHomography, ShiftedSquareIsPureTranslation) {
  const auto h = estimate_homography(square_to(10, 5));
  Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
  expected(0, 2) = 10;
  expected(1, 2) = 5;
  EXPECT_LT(max_abs_diff(h.matrix(), expected), 1e-12);
}

TEST(EstimateHomography, RecoversRandomGroundTruth) {
  std::mt19937_64 rng(20240501);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto truth = oracle::random_homography(rng);
    const auto quad = oracle::random_quad(rng);
    std::array<Correspondence, 4> pairs;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto [tx, ty] = oracle::apply3x3(truth, quad[i].first, quad[i].second);
      pairs[i] = {{quad[i].first, quad[i].second}, {tx, ty}};
    }
    const auto h = estimate_homography(pairs);
    worst = std::max(worst, max_abs_diff(h.matrix(), to_matrix(truth)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(EstimateHomography, LeastSquaresWithMoreThanFourPoints) {
  std::mt19937_64 rng(3);
  const auto truth = oracle::random_homography(rng);
  std::vector<Correspondence> pairs;
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < 12; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    const auto [tx, ty] = oracle::apply3x3(truth, x, y);
    pairs.push_back({{x, y}, {tx, ty}});
  }
  const auto h = estimate_homography(pairs);
  EXPECT_LT(max_abs_diff(h.matrix(), to_matrix(truth)), 1e-9);
}

TEST(EstimateHomography, FullFrameCorrespondencesStayAccurate) {
  // Corners spanning a 4000x3000 frame mapped onto a 720x180 rectangle.
  const RoiCorners corners = {ImagePoint{400, 2900}, ImagePoint{3700, 2950},
                              ImagePoint{2600, 120}, ImagePoint{1300, 90}};
  const auto targets = rectified_corners(720, 180);
  std::array<Correspondence, 4> pairs;
  for (std::size_t i = 0; i < 4; ++i) pairs[i] = {corners[i], targets[i]};
  const auto h = estimate_homography(pairs);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto r = apply_homography(h, corners[i]);
    EXPECT_NEAR(r.x, targets[i].x, 1e-6);
    EXPECT_NEAR(r.y, targets[i].y, 1e-6);
  }
}

TEST(EstimateHomography, RejectsDegenerateInput) {
  auto pairs = square_to(0, 0);
  pairs[2].source = {2, 2};  // (0,0), (1,1), (2,2) collinear
  pairs[3].source = {1, 1};
  EXPECT_THROW(estimate_homography(pairs), Error);

  auto dup = square_to(0, 0);
  dup[3].source = dup[0].source;
  try {
    estimate_homography(dup);
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }

  const auto four = square_to(0, 0);
  const std::vector<Correspondence> few(four.begin(), four.begin() + 3);
  EXPECT_THROW(estimate_homography(few), Error);

  // Five points on one line: rank deficient.
  std::vector<Correspondence> line;
  for (int i = 0; i < 5; ++i) line.push_back({{double(i), 2.0 * i}, {double(i), double(i)}});
  EXPECT_THROW(estimate_homography(line), Error);
}

TEST(ApplyHomography, IdentityScalingAndPerspective) {
  const Homography id;
  EXPECT_EQ(apply_homography(id, {5, 7}), (RectifiedPoint{5, 7}));

  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  s(0, 0) = 2;
  s(1, 1) = 2;
  EXPECT_EQ(apply_homography(Homography::from_matrix(s), {3, 4}), (RectifiedPoint{6, 8}));

  // Rows [1,0,0],[0,1,0],[0,0.5,1]; at (2,2) w = 2.
  const std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0.5, 1};
  const auto [ox, oy] = oracle::apply3x3(m, 2, 2);
  const auto r = apply_homography(Homography::from_row_major(m), {2, 2});
  EXPECT_DOUBLE_EQ(r.x, ox);
  EXPECT_DOUBLE_EQ(r.y, oy);
  EXPECT_DOUBLE_EQ(r.x, 1.0);
  EXPECT_DOUBLE_EQ(r.y, 1.0);
}

TEST(ApplyHomography, PointAtInfinity) {
  const std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0.5, 1};
  const auto h = Homography::from_row_major(m);
  try {
    apply_homography(h, {0, -2});  // w = 0
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PointAtInfinity);
  }
}

TEST(ApplyHomography, ScaleInvariance) {
  std::mt19937_64 rng(11);
  const auto m = oracle::random_homography(rng);
  const Eigen::Matrix3d base = to_matrix(m);
  for (const double k : {-3.0, 1e-6, 0.5, 1e6}) {
    // from_matrix canonicalizes, so compare through raw Homography::map of a
    // scaled copy against the original mapping.
    const auto h1 = Homography::from_matrix(base);
    const auto h2 = Homography::from_matrix(base * k);
    const auto a = apply_homography(h1, {123.0, 456.0});
    const auto b = apply_homography(h2, {123.0, 456.0});
    EXPECT_NEAR(a.x, b.x, 1e-9);
    EXPECT_NEAR(a.y, b.y, 1e-9);
  }
}

TEST(Homography, CanonicalScale) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity() * 4.0;
  EXPECT_DOUBLE_EQ(Homography::from_matrix(m)(2, 2), 1.0);

  Eigen::Matrix3d z;
  z << 0, 0, 2, 0, 2, 0, 2, 0, 0;  // bottom-right zero: Frobenius fallback
  const auto h = Homography::from_matrix(z);
  EXPECT_NEAR(h.matrix().norm(), 1.0, 1e-15);

  EXPECT_THROW(Homography::from_matrix(Eigen::Matrix3d::Zero()), Error);
  Eigen::Matrix3d rank2 = Eigen::Matrix3d::Identity();
  rank2(1, 1) = 0;
  EXPECT_THROW(Homography::from_matrix(rank2), Error);
}

TEST(InvertHomography, IdentityAndTranslation) {
  EXPECT_LT(max_abs_diff(invert_homography(Homography()).matrix(), Eigen::Matrix3d::Identity()),
            1e-15);
  const auto t = estimate_homography(square_to(10, 5));
  const auto inv = invert_homography(t);
  EXPECT_NEAR(inv(0, 2), -10.0, 1e-12);
  EXPECT_NEAR(inv(1, 2), -5.0, 1e-12);
}

TEST(InvertHomography, RoundTripRandomPoints) {
  std::mt19937_64 rng(99);
  const auto h = Homography::from_row_major(oracle::random_homography(rng));
  const auto inv = invert_homography(h);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ImagePoint p{u(rng), u(rng)};
    const ImagePoint q = apply_inverse_homography(inv, apply_homography(h, p));
    worst = std::max({worst, std::abs(q.x - p.x), std::abs(q.y - p.y)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(RoiLength, FromMarkings) {
  EXPECT_DOUBLE_EQ(roi_length_from_markings(3), 72.0);
  EXPECT_DOUBLE_EQ(roi_length_from_markings(4), 96.0);
  EXPECT_DOUBLE_EQ(roi_length_from_markings(5), 120.0);
  EXPECT_DOUBLE_EQ(roi_length_from_markings(6), 144.0);
  for (const int bad : {0, -2}) {
    try {
      roi_length_from_markings(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidCount);
    }
  }
}

TEST(BuildRoiCalibration, RectangleCornersGiveIdentity) {
  const auto target = rectified_corners(720, 180);
  RoiCorners corners;
  for (std::size_t i = 0; i < 4; ++i) corners[i] = {target[i].x, target[i].y};
  const auto [cal, h] = build_roi_calibration(corners, 144, 36, 720, 180);
  EXPECT_LT(max_abs_diff(h.matrix(), Eigen::Matrix3d::Identity()), 1e-12);
  EXPECT_DOUBLE_EQ(cal.feet_per_pixel_long, 0.2);
  EXPECT_DOUBLE_EQ(cal.feet_per_pixel_lat, 0.2);
}

TEST(BuildRoiCalibration, ScaleFactors) {
  const RoiCorners trapezoid = {ImagePoint{100, 900}, ImagePoint{900, 900}, ImagePoint{700, 100},
                                ImagePoint{300, 100}};
  const auto [cal, h] = build_roi_calibration(trapezoid, 72, 36, 720, 180);
  EXPECT_DOUBLE_EQ(cal.feet_per_pixel_long, 0.1);
  EXPECT_DOUBLE_EQ(cal.feet_per_pixel_lat, 0.2);
  const auto target = rectified_corners(720, 180);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto r = apply_homography(h, trapezoid[i]);
    EXPECT_NEAR(r.x, target[i].x, 1e-9);
    EXPECT_NEAR(r.y, target[i].y, 1e-9);
  }
}

TEST(BuildRoiCalibration, CyclicCornerPermutationRotatesTargets) {
  const RoiCorners base = {ImagePoint{100, 900}, ImagePoint{900, 880}, ImagePoint{700, 100},
                           ImagePoint{310, 120}};
  const auto target = rectified_corners(720, 180);
  for (std::size_t shift = 1; shift < 4; ++shift) {
    RoiCorners rotated;
    for (std::size_t i = 0; i < 4; ++i) rotated[i] = base[(i + shift) % 4];
    const auto [cal, h] = build_roi_calibration(rotated, 144, 36, 720, 180);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto r = apply_homography(h, base[(i + shift) % 4]);
      EXPECT_NEAR(r.x, target[i].x, 1e-9);
      EXPECT_NEAR(r.y, target[i].y, 1e-9);
    }
  }
}

TEST(BuildRoiCalibration, RejectsBadCorners) {
  const RoiCorners collinear = {ImagePoint{0, 0}, ImagePoint{1, 0}, ImagePoint{2, 0},
                                ImagePoint{0, 5}};
  try {
    build_roi_calibration(collinear, 144, 36, 720, 180);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
    EXPECT_NE(std::string(e.what()).find("corners 1 (near-left), 2 (near-right), 3 (far-right)"),
              std::string::npos)
        << e.what();
  }
  const RoiCorners bowtie = {ImagePoint{0, 0}, ImagePoint{10, 10}, ImagePoint{10, 0},
                             ImagePoint{0, 10}};
  EXPECT_THROW(build_roi_calibration(bowtie, 144, 36, 720, 180), Error);
  const RoiCorners ok = {ImagePoint{0, 0}, ImagePoint{10, 0}, ImagePoint{10, 10},
                         ImagePoint{0, 10}};
  EXPECT_THROW(build_roi_calibration(ok, 0, 36, 720, 180), Error);
}

}  // namespace
}  // namespace skyspeed
