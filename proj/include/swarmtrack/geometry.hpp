#pragma once

#include <vector>

#include "swarmtrack/errors.hpp"
#include "swarmtrack/types.hpp"

namespace swarmtrack {

/// One calibrated view: 3x4 projection matrix (world -> homogeneous pixels)
/// plus the raster the camera exposes.
struct CameraModel {
    Mat34 projection = Mat34::Zero();
    int image_width = 0;
    int image_height = 0;
    int view_id = 0;

    /// Throws ConfigError unless projection has rank 3 and the raster is
    /// non-empty.
    void validate() const;

    /// Homogeneous camera center (right null vector of the projection).
    Eigen::Vector4d center_homogeneous() const;

    /// Mean focal length in pixels, recovered from the projection matrix.
    double focal_scale() const;

    /// Signed depth of p in world units along the optical axis.
    double depth_of(const Vec3& p) const;
};

/// Dehomogenized pixel coordinates of p. The result may lie outside the
/// image bounds. Throws PointBehindCamera when the homogeneous depth <= 0.
Pixel project(const CameraModel& camera, const Vec3& p);

/// Integer pixels whose centers lie inside the disc of radius r_px around
/// c, clipped to a width x height raster. The pixel nearest c is always
/// included when in bounds, so r_px = 0 yields exactly that pixel.
PixelSet raster_disc(const Pixel& c, double r_px, int width, int height);

/// Integer pixels covered by the silhouette of a ball, approximated as a
/// filled disc of radius focal_scale*radius/depth around project(center),
/// clipped to the image. A pixel counts as covered when its center lies in
/// the disc; the pixel nearest the projected center is always included when
/// it is in bounds (so radius 0 yields exactly that pixel).
PixelSet project_ball(const CameraModel& camera, const Vec3& center,
                      double radius);

struct Triangulation {
    Vec3 point = Vec3::Zero();
    double residual = 0.0;  // RMS reprojection error over both views, pixels
};

/// Linear (DLT) two-view triangulation. Throws DegenerateRays when the
/// back-projected rays are parallel or the system is rank-deficient.
Triangulation triangulate(const CameraModel& cam1, const Pixel& px1,
                          const CameraModel& cam2, const Pixel& px2);

/// Fundamental matrix mapping view-1 pixels to epipolar lines in view 2
/// (x2' F x1 = 0). Throws DegenerateRig when the camera centers coincide.
Mat3 fundamental_matrix(const CameraModel& cam1, const CameraModel& cam2);

/// Symmetric epipolar distance: mean of the two point-to-epipolar-line
/// pixel distances. Exactly symmetric in its argument pairs.
double epipolar_distance(const CameraModel& cam1, const Pixel& px1,
                         const CameraModel& cam2, const Pixel& px2);

/// Precomputed epipolar geometry for one ordered camera pair, for gating
/// many pixel pairs without re-deriving the fundamental matrices.
class EpipolarGate {
public:
    EpipolarGate(const CameraModel& cam1, const CameraModel& cam2);
    double distance(const Pixel& px1, const Pixel& px2) const;

private:
    Mat3 f12_;  // view1 pixel -> line in view 2
    Mat3 f21_;  // view2 pixel -> line in view 1
};

}  // namespace swarmtrack
