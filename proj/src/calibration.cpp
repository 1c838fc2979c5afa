#include "skyspeed/calibration.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "skyspeed/error.hpp"

namespace skyspeed {

namespace {

constexpr double kCollinearSine = 1e-9;
constexpr double kRankTolerance = 1e-10;

constexpr std::array<const char*, 4> kCornerNames = {"near-left", "near-right",
                                                     "far-right", "far-left"};

bool finite(const Eigen::Vector2d& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); }

// Sine of the angle at `a` spanned by b and c; 0 for coincident points.
double turn_sine(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a;
  const Eigen::Vector2d v = c - a;
  const double scale = u.norm() * v.norm();
  if (scale == 0.0) return 0.0;
  return (u.x() * v.y() - u.y() * v.x()) / scale;
}

void check_point_set(const std::vector<Eigen::Vector2d>& pts, const char* side) {
  const std::size_t n = pts.size();
  double extent = 0.0;
  for (const auto& p : pts) {
    if (!finite(p)) {
      throw Error(ErrorCode::DegenerateConfiguration,
                  fmt::format("non-finite {} point", side));
    }
    extent = std::max(extent, p.cwiseAbs().maxCoeff());
  }
  const double dup_tol = 1e-12 * std::max(extent, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((pts[i] - pts[j]).norm() <= dup_tol) {
        throw Error(ErrorCode::DegenerateConfiguration,
                    fmt::format("duplicate {} points {} and {}", side, i + 1, j + 1));
      }
    }
  }
  if (n != 4) return;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        if (std::abs(turn_sine(pts[i], pts[j], pts[k])) <= kCollinearSine) {
          throw Error(ErrorCode::DegenerateConfiguration,
                      fmt::format("collinear {} points {}, {}, {}", side, i + 1, j + 1, k + 1));
        }
      }
    }
  }
}

// Similarity taking the points to centroid 0 and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(),
       0, s, -s * centroid.y(),
       0, 0, 1;
  return t;
}

Eigen::Vector2d apply_affine(const Eigen::Matrix3d& t, const Eigen::Vector2d& p) {
  return (t * p.homogeneous()).head<2>();
}

}  // namespace

Eigen::Matrix3d canonical_scale(const Eigen::Matrix3d& m) {
  const double frob = m.norm();
  if (!(frob > 0.0) || !std::isfinite(frob)) return m;
  if (std::abs(m(2, 2)) > 1e-12 * frob) return m / m(2, 2);
  Eigen::Matrix3d out = m / frob;
  // Fix the sign so equal projective maps compare equal.
  for (int i = 0; i < 9; ++i) {
    const double c = out(i / 3, i % 3);
    if (std::abs(c) > 1e-15) {
      if (c < 0) out = -out;
      break;
    }
  }
  return out;
}

Homography::Homography() : m_(Eigen::Matrix3d::Identity()) {}

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::SingularMatrix, "homography has non-finite coefficients");
  }
  const Eigen::Matrix3d c = canonical_scale(m);
  const double det = c.determinant();
  if (!(std::abs(det) > kMinAbsDeterminant)) {
    throw Error(ErrorCode::SingularMatrix,
                fmt::format("homography is singular (|det| = {:g})", std::abs(det)));
  }
  return Homography(c);
}

Homography Homography::from_row_major(const std::array<double, 9>& coeffs) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = coeffs[static_cast<std::size_t>(i)];
  return from_matrix(m);
}

std::array<double, 9> Homography::row_major() const {
  std::array<double, 9> out{};
  for (int i = 0; i < 9; ++i) out[static_cast<std::size_t>(i)] = m_(i / 3, i % 3);
  return out;
}

Eigen::Vector2d Homography::map(const Eigen::Vector2d& p) const {
  const Eigen::Vector3d q = m_ * p.homogeneous();
  if (!(std::abs(q.z()) > kMinAbsW)) {
    throw Error(ErrorCode::PointAtInfinity,
                fmt::format("point ({:g}, {:g}) maps to the plane at infinity", p.x(), p.y()));
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

Homography estimate_homography(std::span<const Correspondence> correspondences) {
  const std::size_t n = correspondences.size();
  if (n < 4) {
    throw Error(ErrorCode::DegenerateConfiguration,
                fmt::format("need at least 4 correspondences, got {}", n));
  }
  std::vector<Eigen::Vector2d> src;
  std::vector<Eigen::Vector2d> dst;
  src.reserve(n);
  dst.reserve(n);
  for (const auto& c : correspondences) {
    src.emplace_back(c.source.x, c.source.y);
    dst.emplace_back(c.target.x, c.target.y);
  }
  check_point_set(src, "source");
  check_point_set(dst, "target");

  const Eigen::Matrix3d t_src = normalizing_transform(src);
  const Eigen::Matrix3d t_dst = normalizing_transform(dst);

  // Rows beyond 2n stay zero so the system is at least 9x9.
  const Eigen::Index rows = static_cast<Eigen::Index>(std::max<std::size_t>(2 * n, 9));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d s = apply_affine(t_src, src[i]);
    const Eigen::Vector2d d = apply_affine(t_dst, dst[i]);
    const Eigen::Index r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y(), -d.x();
    a.row(r + 1) << 0, 0, 0, s.x(), s.y(), 1, -d.y() * s.x(), -d.y() * s.y(), -d.y();
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(7) > kRankTolerance * sv(0))) {
    throw Error(ErrorCode::DegenerateConfiguration, "rank-deficient DLT system");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  const Eigen::Matrix3d m = t_dst.inverse() * hn * t_src;
  try {
    return Homography::from_matrix(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateConfiguration, e.what());
  }
}

RectifiedPoint apply_homography(const Homography& h, const ImagePoint& p) {
  const Eigen::Vector2d q = h.map({p.x, p.y});
  return {q.x(), q.y()};
}

ImagePoint apply_inverse_homography(const Homography& inverse, const RectifiedPoint& p) {
  const Eigen::Vector2d q = inverse.map({p.x, p.y});
  return {q.x(), q.y()};
}

Homography invert_homography(const Homography& h) {
  const Eigen::Matrix3d& m = h.matrix();
  if (!(std::abs(m.determinant()) > kMinAbsDeterminant)) {
    throw Error(ErrorCode::SingularMatrix, "cannot invert a singular homography");
  }
  return Homography::from_matrix(m.inverse());
}

double roi_length_from_markings(int solid_segments) {
  if (solid_segments < 1) {
    throw Error(ErrorCode::InvalidCount,
                fmt::format("solid segment count must be >= 1, got {}", solid_segments));
  }
  return kSolidSegmentFt * solid_segments;
}

std::array<RectifiedPoint, 4> rectified_corners(double rectified_length_px,
                                                double rectified_width_px) {
  return {RectifiedPoint{0.0, 0.0}, RectifiedPoint{0.0, rectified_width_px},
          RectifiedPoint{rectified_length_px, rectified_width_px},
          RectifiedPoint{rectified_length_px, 0.0}};
}

void check_convex_corners(const RoiCorners& corners) {
  std::array<Eigen::Vector2d, 4> p;
  for (std::size_t i = 0; i < 4; ++i) {
    p[i] = {corners[i].x, corners[i].y};
    if (!finite(p[i])) {
      throw Error(ErrorCode::DegenerateConfiguration,
                  fmt::format("corner {} ({}) is not finite", i + 1, kCornerNames[i]));
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (p[i] == p[j]) {
        throw Error(ErrorCode::DegenerateConfiguration,
                    fmt::format("corners {} ({}) and {} ({}) coincide", i + 1,
                                kCornerNames[i], j + 1, kCornerNames[j]));
      }
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      for (std::size_t k = j + 1; k < 4; ++k) {
        if (std::abs(turn_sine(p[i], p[j], p[k])) <= kCollinearSine) {
          throw Error(ErrorCode::DegenerateConfiguration,
                      fmt::format("corners {} ({}), {} ({}), {} ({}) are collinear", i + 1,
                                  kCornerNames[i], j + 1, kCornerNames[j], k + 1,
                                  kCornerNames[k]));
        }
      }
    }
  }
  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double s = turn_sine(p[i], p[(i + 1) % 4], p[(i + 3) % 4]);
    const int si = s > 0 ? 1 : -1;
    if (sign == 0) {
      sign = si;
    } else if (si != sign) {
      throw Error(ErrorCode::DegenerateConfiguration,
                  fmt::format("corners are not in convex position (reflex or crossed at "
                              "corner {} ({}))",
                              i + 1, kCornerNames[i]));
    }
  }
}

std::pair<RoiCalibration, Homography> build_roi_calibration(
    const RoiCorners& source_corners, double physical_length_ft, double physical_width_ft,
    double rectified_length_px, double rectified_width_px) {
  for (const double v : {physical_length_ft, physical_width_ft, rectified_length_px,
                         rectified_width_px}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "ROI dimensions must be finite and > 0");
    }
  }
  check_convex_corners(source_corners);
  const auto targets = rectified_corners(rectified_length_px, rectified_width_px);
  std::array<Correspondence, 4> pairs;
  for (std::size_t i = 0; i < 4; ++i) pairs[i] = {source_corners[i], targets[i]};

  RoiCalibration cal;
  cal.source_corners = source_corners;
  cal.physical_length_ft = physical_length_ft;
  cal.physical_width_ft = physical_width_ft;
  cal.rectified_length_px = rectified_length_px;
  cal.rectified_width_px = rectified_width_px;
  cal.feet_per_pixel_long = physical_length_ft / rectified_length_px;
  cal.feet_per_pixel_lat = physical_width_ft / rectified_width_px;
  return {cal, estimate_homography(pairs)};
}

}  // namespace skyspeed
