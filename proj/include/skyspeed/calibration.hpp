#pragma once

#include <array>
#include <span>
#include <utility>

#include <Eigen/Core>

namespace skyspeed {

/// Pixel position in the source (drone) image.
struct ImagePoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

/// Pixel position in the rectified road plane. `x` runs along the direction
/// of travel (near edge = 0), `y` across the road.
struct RectifiedPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const RectifiedPoint&, const RectifiedPoint&) = default;
};

struct Correspondence {
  ImagePoint source;
  RectifiedPoint target;
};

/// 3x3 projective map kept in canonical scale: m(2,2) == 1 when that
/// coefficient is nonzero, otherwise unit Frobenius norm.
class Homography {
 public:
  /// Identity.
  Homography();

  /// Canonicalizes `m`; throws SingularMatrix when |det| <= 1e-12 after
  /// canonical scaling.
  static Homography from_matrix(const Eigen::Matrix3d& m);
  static Homography from_row_major(const std::array<double, 9>& coeffs);

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  std::array<double, 9> row_major() const;
  double operator()(int row, int col) const { return m_(row, col); }

  /// Maps a plane point; throws PointAtInfinity when |w| <= 1e-12.
  Eigen::Vector2d map(const Eigen::Vector2d& p) const;

 private:
  explicit Homography(const Eigen::Matrix3d& canonical) : m_(canonical) {}
  Eigen::Matrix3d m_;
};

inline constexpr double kMinAbsW = 1e-12;
inline constexpr double kMinAbsDeterminant = 1e-12;

/// Scales `m` to canonical form without validating invertibility.
Eigen::Matrix3d canonical_scale(const Eigen::Matrix3d& m);

/// Normalized DLT. Exact for four correspondences, least squares beyond.
/// Throws DegenerateConfiguration on duplicate or collinear points and on a
/// rank-deficient system.
Homography estimate_homography(std::span<const Correspondence> correspondences);

RectifiedPoint apply_homography(const Homography& h, const ImagePoint& p);

/// Maps a rectified point back to the image using the inverse homography
/// (as returned by invert_homography).
ImagePoint apply_inverse_homography(const Homography& inverse, const RectifiedPoint& p);

Homography invert_homography(const Homography& h);

/// Physical ROI length implied by a count of solid lane-line segments, each
/// spanning two 12 ft broken lines.
double roi_length_from_markings(int solid_segments);

inline constexpr double kBrokenLineFt = 12.0;
inline constexpr double kSolidSegmentFt = 2.0 * kBrokenLineFt;

/// Corner order used everywhere: near-left, near-right, far-right, far-left.
/// They map to rectified (0,0), (0,W), (L,W), (L,0).
using RoiCorners = std::array<ImagePoint, 4>;

struct RoiCalibration {
  RoiCorners source_corners;
  double physical_length_ft = 0.0;
  double physical_width_ft = 0.0;
  double rectified_length_px = 0.0;
  double rectified_width_px = 0.0;
  double feet_per_pixel_long = 0.0;
  double feet_per_pixel_lat = 0.0;

  bool contains(const RectifiedPoint& p) const {
    return p.x >= 0.0 && p.x <= rectified_length_px && p.y >= 0.0 &&
           p.y <= rectified_width_px;
  }
};

std::array<RectifiedPoint, 4> rectified_corners(double rectified_length_px,
                                                double rectified_width_px);

/// Throws DegenerateConfiguration naming the offending corners when the
/// quadrilateral is not strictly convex.
void check_convex_corners(const RoiCorners& corners);

std::pair<RoiCalibration, Homography> build_roi_calibration(
    const RoiCorners& source_corners, double physical_length_ft,
    double physical_width_ft, double rectified_length_px, double rectified_width_px);

}  // namespace skyspeed
