#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace swarmtrack {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat93 = Eigen::Matrix<double, 9, 3>;

// Real-valued image coordinates.
struct Pixel {
    double u = 0.0;
    double v = 0.0;
};

// Integer raster coordinates.
struct PixelCoord {
    int u = 0;
    int v = 0;
};

// Raster pixels are packed row-major (v in the high bits) so that a sorted
// PixelSet is in scanline order. Only valid for non-negative coordinates,
// i.e. pixels already clipped to an image.
using PixelKey = std::uint64_t;

inline PixelKey pack_pixel(int u, int v) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) << 32) |
           static_cast<std::uint32_t>(u);
}

inline PixelCoord unpack_pixel(PixelKey key) {
    return PixelCoord{static_cast<int>(static_cast<std::uint32_t>(key)),
                      static_cast<int>(static_cast<std::uint32_t>(key >> 32))};
}

// Sorted ascending, no duplicates.
using PixelSet = std::vector<PixelKey>;

// Number of common pixels between two sorted sets.
std::size_t pixel_intersection_count(const PixelSet& a, const PixelSet& b);

}  // namespace swarmtrack
