#pragma once

#include <cstdint>
#include <vector>

#include "swarmtrack/association.hpp"
#include "swarmtrack/geometry.hpp"
#include "swarmtrack/manager.hpp"
#include "swarmtrack/rng.hpp"

namespace swarmtrack {

enum class OutOfViewPolicy { Error, Clamp };

/// Synthetic swarm configuration. Speeds follow
///   V(t)    = speed_base + speed_amp * sin(2*pi/speed_period * t + a0)
///   xi(t)   = heading_scale * A_xi * (1 + cos(2*pi/direction_period * t + x0))
///   gamma(t)= climb_scale  * A_g  *      cos(2*pi/direction_period * t + g0)
/// with per-object random phases in [0, 2*pi) and amplitudes in [-1, 1],
/// velocity V * [cos g cos xi, cos g sin xi, sin g], and positions integrated
/// by forward Euler at dt.
struct SimConfig {
    int n_objects = 60;
    double box_half = 20.0;       // init region [-box_half, box_half]^3
    double speed_base = 6.0;      // units/s
    double speed_amp = 2.0;       // units/s
    double speed_period = 5.0;    // s
    double direction_period = 20.0;  // s, heading/climb waveform period
    double heading_scale = 0.5;   // rad, xi amplitude factor
    double climb_scale = 0.25;    // rad, gamma amplitude factor
    double ball_radius = 0.5;     // units
    double dt = 0.1;              // s
    double duration = 5.0;        // s
    double pixel_noise_sigma = 0.5;  // px, centroid measurement noise
    std::uint64_t seed = 1;
    OutOfViewPolicy out_of_view = OutOfViewPolicy::Error;

    // Camera defaults; see default_cameras().
    int image_size = 1024;  // square image, pixels
    double focal_px = 900.0;
    double camera_distance = 150.0;  // from the reachable-region center

    int n_frames() const;
    void validate() const;
};

/// Per-object time series sampled at frames 1..n_frames().
struct ObjectTruth {
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
};

struct GroundTruth {
    std::vector<ObjectTruth> objects;
    double dt = 0.1;

    int n_frames() const {
        return objects.empty() ? 0
                               : static_cast<int>(objects[0].positions.size());
    }
};

/// Analytic velocity waveform for one object (phases/amplitudes resolved).
struct MotionWave {
    double alpha0 = 0.0;  // speed phase
    double xi0 = 0.0;     // heading phase
    double gamma0 = 0.0;  // climb phase
    double a_xi = 0.0;    // heading amplitude in [-1, 1]
    double a_gamma = 0.0; // climb amplitude in [-1, 1]

    Vec3 velocity(const SimConfig& cfg, double t) const;
};

/// Ground truth from random initial positions and waveform parameters.
GroundTruth generate_truth(const SimConfig& cfg);

/// Two orthogonal views framing the region reachable within the configured
/// duration: one camera on the +x side looking back along -x, one on the
/// +y side looking along -y, both aimed at the drift center of the swarm.
std::vector<CameraModel> default_cameras(const SimConfig& cfg);

/// Renders one frame: each object becomes a noise-translated disc per view,
/// and overlapping discs merge into single blobs (connected components,
/// 8-connectivity). `frame_index` is 0-based; the emitted frame number is
/// frame_index + 1. Throws ObjectOutOfView under the Error policy when an
/// object contributes no pixels to some view.
FrameData render_frame(const GroundTruth& truth, int frame_index,
                       const std::vector<CameraModel>& cameras,
                       double noise_sigma, double ball_radius, Rng& rng,
                       OutOfViewPolicy policy);

/// Full synthetic dataset: cameras plus all rendered frames (per-frame
/// random streams derived from cfg.seed, so frames are independent).
Dataset simulate_dataset(const GroundTruth& truth, const SimConfig& cfg,
                         const std::vector<CameraModel>& cameras);

}  // namespace swarmtrack
