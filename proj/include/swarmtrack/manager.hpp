#pragma once

#include <set>
#include <string>
#include <vector>

#include "swarmtrack/filter.hpp"

namespace swarmtrack {

enum class Method { Cvpf, Cskpf };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Gating thresholds for exhaustive cross-view / cross-frame matching.
struct Gates {
    double epipolar_px = 3.0;  // max symmetric epipolar distance
    double v_max = 10.0;       // max speed, units/s (displacement gate v_max*dt)
};

struct ManagerParams {
    Method method = Method::Cskpf;
    FilterParams filter;
    Gates gates;
    int warmup_frames = 10;      // T_h: frames 3..T_h run warm-up updates
    int min_track_length = 3;    // shorter histories are not emitted
    int workers = 1;             // tracker-stepping parallelism
};

/// Calibrated cameras plus the full measurement stream.
struct Dataset {
    std::vector<CameraModel> cameras;
    std::vector<FrameData> frames;  // frames[i].frame == i + 1
};

/// One reconstructed trajectory (contiguous frames).
struct Trajectory {
    int id = 0;
    int start_frame = 0;
    std::vector<StateCSM> states;
    std::vector<std::vector<int>> associations;  // per frame, per view

    int end_frame() const {
        return start_frame + static_cast<int>(states.size()) - 1;
    }
};

struct TrackSet {
    std::vector<Trajectory> trajectories;
};

/// Exhaustive two-frame initialization: cross-view pairs through the
/// epipolar gate are triangulated per frame, and frame-1/frame-2 points
/// within the displacement gate v_max*dt seed one tracker each (position
/// from frame 2, velocity from the finite difference, zero acceleration).
/// `next_id` numbers the new trackers and is advanced.
std::vector<Tracker> bootstrap(const FrameData& frame1, const FrameData& frame2,
                               const std::vector<CameraModel>& cameras,
                               const ManagerParams& params,
                               std::uint64_t run_seed, int& next_id);

/// Bootstrap restricted to measurements unassociated at t-1 and t. New
/// trackers whose position lies within one object radius of an existing
/// active tracker are discarded as duplicate births.
std::vector<Tracker> spawn_new(
    const FrameData& prev_frame, const FrameData& frame,
    const std::vector<std::set<int>>& prev_associated,
    const std::vector<std::set<int>>& associated,
    const std::vector<CameraModel>& cameras,
    const std::vector<Tracker>& active, const ManagerParams& params,
    std::uint64_t run_seed, int& next_id);

/// Runs the chosen method over the whole dataset and parses trajectories
/// from every tracker (active and retired) with enough history.
/// Throws InsufficientFrames (< 3 frames) or CalibrationMissing.
TrackSet run(const Dataset& dataset, const ManagerParams& params,
             std::uint64_t seed);

}  // namespace swarmtrack
