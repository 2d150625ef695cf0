#include "swarmtrack/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace swarmtrack {

std::size_t pixel_intersection_count(const PixelSet& a, const PixelSet& b) {
    std::size_t count = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

void CameraModel::validate() const {
    if (image_width <= 0 || image_height <= 0)
        throw ConfigError("camera " + std::to_string(view_id) +
                          ": image dimensions must be positive");
    Eigen::JacobiSVD<Mat34> svd(projection);
    const auto& sv = svd.singularValues();
    if (!(sv[2] > 1e-12 * sv[0]))
        throw ConfigError("camera " + std::to_string(view_id) +
                          ": projection matrix is rank-deficient");
}

Eigen::Vector4d CameraModel::center_homogeneous() const {
    Eigen::JacobiSVD<Mat34> svd(projection, Eigen::ComputeFullV);
    return svd.matrixV().col(3);
}

double CameraModel::focal_scale() const {
    // For P = K [R|t] the rows of M = KR give the pixel focal lengths:
    // |m0 x m2| / |m2|^2 and |m1 x m2| / |m2|^2 (the principal-point terms
    // drop out of the cross products).
    const Mat3 m = projection.leftCols<3>();
    const Vec3 m2 = m.row(2);
    const double n2 = m2.squaredNorm();
    const double fu = Vec3(m.row(0)).cross(m2).norm() / n2;
    const double fv = Vec3(m.row(1)).cross(m2).norm() / n2;
    return 0.5 * (fu + fv);
}

double CameraModel::depth_of(const Vec3& p) const {
    const double w = projection.row(2).head<3>().dot(p) + projection(2, 3);
    return w / projection.row(2).head<3>().norm();
}

Pixel project(const CameraModel& camera, const Vec3& p) {
    const Vec3 h = camera.projection.leftCols<3>() * p + camera.projection.col(3);
    if (!(h[2] > 0.0))
        throw PointBehindCamera("point has non-positive depth in view " +
                                std::to_string(camera.view_id));
    return Pixel{h[0] / h[2], h[1] / h[2]};
}

PixelSet raster_disc(const Pixel& c, double r_px, int width, int height) {
    PixelSet out;
    const int v0 = std::max(0, static_cast<int>(std::ceil(c.v - r_px)));
    const int v1 =
        std::min(height - 1, static_cast<int>(std::floor(c.v + r_px)));
    const double r2 = r_px * r_px;
    for (int v = v0; v <= v1; ++v) {
        const double dv = v - c.v;
        const double span2 = r2 - dv * dv;
        if (span2 < 0.0) continue;
        const double span = std::sqrt(span2);
        const int u0 = std::max(0, static_cast<int>(std::ceil(c.u - span)));
        const int u1 =
            std::min(width - 1, static_cast<int>(std::floor(c.u + span)));
        for (int u = u0; u <= u1; ++u) out.push_back(pack_pixel(u, v));
    }
    // The pixel nearest the disc center is always part of the footprint
    // when in bounds (covers the radius-0 case).
    const int nearest_u = static_cast<int>(std::lround(c.u));
    const int nearest_v = static_cast<int>(std::lround(c.v));
    if (nearest_u >= 0 && nearest_u < width && nearest_v >= 0 &&
        nearest_v < height) {
        const PixelKey key = pack_pixel(nearest_u, nearest_v);
        auto it = std::lower_bound(out.begin(), out.end(), key);
        if (it == out.end() || *it != key) out.insert(it, key);
    }
    return out;
}

PixelSet project_ball(const CameraModel& camera, const Vec3& center,
                      double radius) {
    const Pixel c = project(camera, center);  // throws when behind camera
    const double depth = camera.depth_of(center);
    const double r_px = camera.focal_scale() * radius / depth;
    return raster_disc(c, r_px, camera.image_width, camera.image_height);
}

Triangulation triangulate(const CameraModel& cam1, const Pixel& px1,
                          const CameraModel& cam2, const Pixel& px2) {
    // A vanishing baseline (same camera center) or parallel back-projected
    // rays leave no finite, unique intersection.
    const Mat3 m1_inv = cam1.projection.leftCols<3>().inverse();
    const Mat3 m2_inv = cam2.projection.leftCols<3>().inverse();
    const Vec3 c1 = -m1_inv * cam1.projection.col(3);
    const Vec3 c2 = -m2_inv * cam2.projection.col(3);
    const double scale = std::max({1.0, c1.norm(), c2.norm()});
    if (!((c1 - c2).norm() > 1e-10 * scale))
        throw DegenerateRays("cameras share one center");
    const Vec3 d1 = m1_inv * Vec3(px1.u, px1.v, 1.0);
    const Vec3 d2 = m2_inv * Vec3(px2.u, px2.v, 1.0);
    const double sin_angle = d1.cross(d2).norm() / (d1.norm() * d2.norm());
    if (!(sin_angle > 1e-10))
        throw DegenerateRays("back-projected rays are parallel");

    Eigen::Matrix4d a;
    a.row(0) = px1.u * cam1.projection.row(2) - cam1.projection.row(0);
    a.row(1) = px1.v * cam1.projection.row(2) - cam1.projection.row(1);
    a.row(2) = px2.u * cam2.projection.row(2) - cam2.projection.row(0);
    a.row(3) = px2.v * cam2.projection.row(2) - cam2.projection.row(1);
    for (int r = 0; r < 4; ++r) {
        const double n = a.row(r).norm();
        if (n > 0.0) a.row(r) /= n;
    }
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv[2] > 1e-10 * sv[0]))
        throw DegenerateRays("triangulation system is rank-deficient");
    Eigen::Vector4d x = svd.matrixV().col(3);
    if (std::abs(x[3]) < 1e-12 * x.norm())
        throw DegenerateRays("triangulated point at infinity");
    const Vec3 p = x.head<3>() / x[3];

    double sum_sq = 0.0;
    bool in_front = true;
    const CameraModel* cams[2] = {&cam1, &cam2};
    const Pixel* pxs[2] = {&px1, &px2};
    for (int i = 0; i < 2; ++i) {
        const Vec3 h =
            cams[i]->projection.leftCols<3>() * p + cams[i]->projection.col(3);
        if (!(h[2] > 0.0)) {
            in_front = false;
            break;
        }
        const double du = h[0] / h[2] - pxs[i]->u;
        const double dv = h[1] / h[2] - pxs[i]->v;
        sum_sq += du * du + dv * dv;
    }
    const double residual = in_front
                                ? std::sqrt(sum_sq / 2.0)
                                : std::numeric_limits<double>::infinity();
    return Triangulation{p, residual};
}

namespace {

Mat3 cross_matrix(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0;
    return m;
}

Mat3 fundamental_impl(const CameraModel& cam1, const CameraModel& cam2) {
    const Eigen::Vector4d c1 = cam1.center_homogeneous();
    const Vec3 e2 = cam2.projection * c1;  // epipole in view 2
    const double scale = cam2.projection.norm() * c1.norm();
    if (!(e2.norm() > 1e-12 * scale))
        throw DegenerateRig("camera centers coincide");
    // P1^+ via SVD pseudo-inverse.
    Eigen::JacobiSVD<Mat34> svd(cam1.projection,
                                Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix<double, 4, 3> p1_pinv =
        svd.solve(Mat3::Identity());
    return cross_matrix(e2) * (cam2.projection * p1_pinv);
}

double line_distance(const Vec3& line, const Pixel& px) {
    const double denom = std::hypot(line[0], line[1]);
    return std::abs(line[0] * px.u + line[1] * px.v + line[2]) / denom;
}

}  // namespace

Mat3 fundamental_matrix(const CameraModel& cam1, const CameraModel& cam2) {
    return fundamental_impl(cam1, cam2);
}

EpipolarGate::EpipolarGate(const CameraModel& cam1, const CameraModel& cam2)
    : f12_(fundamental_impl(cam1, cam2)), f21_(fundamental_impl(cam2, cam1)) {}

double EpipolarGate::distance(const Pixel& px1, const Pixel& px2) const {
    const Vec3 x1(px1.u, px1.v, 1.0);
    const Vec3 x2(px2.u, px2.v, 1.0);
    const double d2 = line_distance(f12_ * x1, px2);
    const double d1 = line_distance(f21_ * x2, px1);
    return 0.5 * (d1 + d2);
}

double epipolar_distance(const CameraModel& cam1, const Pixel& px1,
                         const CameraModel& cam2, const Pixel& px2) {
    return EpipolarGate(cam1, cam2).distance(px1, px2);
}

}  // namespace swarmtrack
