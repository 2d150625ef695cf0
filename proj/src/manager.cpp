#include "swarmtrack/manager.hpp"

#include <algorithm>
#include <cmath>

#include "swarmtrack/parallel.hpp"

namespace swarmtrack {

std::string method_name(Method m) {
    return m == Method::Cvpf ? "cvpf" : "cskpf";
}

Method method_from_name(const std::string& name) {
    if (name == "cvpf") return Method::Cvpf;
    if (name == "cskpf") return Method::Cskpf;
    throw ConfigError("unknown method '" + name + "' (expected cvpf|cskpf)");
}

namespace {

struct StereoPoint {
    Vec3 p;
    double residual;
    int blob1;
    int blob2;
};

/// All cross-view blob pairs passing the epipolar gate, triangulated.
/// Enumeration order is (blob1, blob2) ascending, so downstream tracker
/// creation is deterministic.
std::vector<StereoPoint> enumerate_pairs(
    const FrameData& frame, const std::vector<CameraModel>& cameras,
    double epipolar_gate, const std::vector<int>* allowed1,
    const std::vector<int>* allowed2) {
    const EpipolarGate gate(cameras[0], cameras[1]);
    const auto& blobs1 = frame.views[0];
    const auto& blobs2 = frame.views[1];
    std::vector<StereoPoint> points;
    auto allowed = [](const std::vector<int>* list, int id) {
        return list == nullptr ||
               std::binary_search(list->begin(), list->end(), id);
    };
    for (const Measurement& m1 : blobs1) {
        if (!allowed(allowed1, m1.id)) continue;
        for (const Measurement& m2 : blobs2) {
            if (!allowed(allowed2, m2.id)) continue;
            if (gate.distance(m1.centroid, m2.centroid) > epipolar_gate)
                continue;
            Triangulation tri;
            try {
                tri = triangulate(cameras[0], m1.centroid, cameras[1],
                                  m2.centroid);
            } catch (const DegenerateRays&) {
                continue;
            }
            if (!tri.point.allFinite() || !std::isfinite(tri.residual))
                continue;
            points.push_back(StereoPoint{tri.point, tri.residual, m1.id, m2.id});
        }
    }
    return points;
}

Covariance9 initial_covariance(double residual_px, const FilterParams& fp) {
    constexpr double kRayleighFactor = (4.0 - 3.14159265358979323846) /
                                       3.14159265358979323846;
    const double pos_var = residual_px * residual_px;
    const double dt = fp.csm.dt;
    Covariance9 p0 = Covariance9::Zero();
    for (int axis = 0; axis < 3; ++axis) {
        const double acc_var =
            fp.csm.a_max[axis] * fp.csm.a_max[axis] * kRayleighFactor;
        p0(3 * axis, 3 * axis) = pos_var;
        p0(3 * axis + 1, 3 * axis + 1) = 2.0 * pos_var / (dt * dt);
        p0(3 * axis + 2, 3 * axis + 2) = acc_var;
    }
    return p0;
}

Tracker make_tracker(const StereoPoint& prev_pt, const StereoPoint& pt,
                     const FrameData& frame, const ManagerParams& params,
                     std::uint64_t run_seed, int id) {
    const double dt = params.filter.csm.dt;
    Tracker tr;
    tr.id = id;
    tr.rng = Rng::derive(run_seed, static_cast<std::uint64_t>(id));
    tr.state.setZero();
    const Vec3 velocity = (pt.p - prev_pt.p) / dt;
    for (int axis = 0; axis < 3; ++axis) {
        tr.state[3 * axis] = pt.p[axis];
        tr.state[3 * axis + 1] = velocity[axis];
    }
    tr.cov = initial_covariance(pt.residual, params.filter);
    tr.birth_frame = frame.frame;
    tr.warmup_remaining = params.method == Method::Cskpf
                              ? std::max(0, params.warmup_frames - 2)
                              : 0;
    tr.last_assoc = {frame.views[0][static_cast<std::size_t>(pt.blob1)],
                     frame.views[1][static_cast<std::size_t>(pt.blob2)]};
    tr.history.push_back(HistoryEntry{frame.frame, tr.state, pt.p,
                                      {pt.blob1, pt.blob2}});
    return tr;
}

/// Links stereo points of two consecutive frames through the displacement
/// gate and seeds one tracker per link.
std::vector<Tracker> link_and_seed(const std::vector<StereoPoint>& prev_pts,
                                   const std::vector<StereoPoint>& pts,
                                   const FrameData& frame,
                                   const ManagerParams& params,
                                   std::uint64_t run_seed, int& next_id) {
    const double max_step = params.gates.v_max * params.filter.csm.dt;
    std::vector<Tracker> trackers;
    for (const StereoPoint& pt : pts) {
        for (const StereoPoint& prev_pt : prev_pts) {
            if ((pt.p - prev_pt.p).norm() > max_step) continue;
            trackers.push_back(
                make_tracker(prev_pt, pt, frame, params, run_seed, next_id++));
        }
    }
    return trackers;
}

std::vector<int> sorted_unassociated(const std::vector<Measurement>& blobs,
                                     const std::set<int>& associated) {
    std::vector<int> out;
    for (const Measurement& m : blobs)
        if (associated.count(m.id) == 0) out.push_back(m.id);
    return out;
}

}  // namespace

std::vector<Tracker> bootstrap(const FrameData& frame1, const FrameData& frame2,
                               const std::vector<CameraModel>& cameras,
                               const ManagerParams& params,
                               std::uint64_t run_seed, int& next_id) {
    const auto pts1 = enumerate_pairs(frame1, cameras, params.gates.epipolar_px,
                                      nullptr, nullptr);
    const auto pts2 = enumerate_pairs(frame2, cameras, params.gates.epipolar_px,
                                      nullptr, nullptr);
    return link_and_seed(pts1, pts2, frame2, params, run_seed, next_id);
}

std::vector<Tracker> spawn_new(
    const FrameData& prev_frame, const FrameData& frame,
    const std::vector<std::set<int>>& prev_associated,
    const std::vector<std::set<int>>& associated,
    const std::vector<CameraModel>& cameras,
    const std::vector<Tracker>& active, const ManagerParams& params,
    std::uint64_t run_seed, int& next_id) {
    const auto prev_free1 =
        sorted_unassociated(prev_frame.views[0], prev_associated[0]);
    const auto prev_free2 =
        sorted_unassociated(prev_frame.views[1], prev_associated[1]);
    const auto free1 = sorted_unassociated(frame.views[0], associated[0]);
    const auto free2 = sorted_unassociated(frame.views[1], associated[1]);
    if ((prev_free1.empty() || prev_free2.empty()) ||
        (free1.empty() || free2.empty()))
        return {};

    const auto prev_pts = enumerate_pairs(
        prev_frame, cameras, params.gates.epipolar_px, &prev_free1, &prev_free2);
    const auto pts = enumerate_pairs(frame, cameras, params.gates.epipolar_px,
                                     &free1, &free2);

    int probe_id = next_id;
    std::vector<Tracker> candidates =
        link_and_seed(prev_pts, pts, frame, params, run_seed, probe_id);

    // Births on top of an existing tracker would double-count the object.
    std::vector<Tracker> kept;
    for (Tracker& tr : candidates) {
        const Vec3 pos = position_of(tr.state);
        bool duplicate = false;
        for (const Tracker& existing : active) {
            if ((position_of(existing.state) - pos).norm() <=
                params.filter.object_radius) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(std::move(tr));
    }
    // Renumber compactly so ids stay dense and deterministic.
    for (Tracker& tr : kept) {
        tr.id = next_id++;
        tr.rng = Rng::derive(run_seed, static_cast<std::uint64_t>(tr.id));
    }
    return kept;
}

namespace {

StepOutcome dispatch_step(Tracker& tr, const FrameData& frame,
                          const std::vector<CameraModel>& cameras,
                          const ManagerParams& params) {
    if (params.method == Method::Cvpf)
        return step_cvpf(tr, frame, cameras, params.filter);
    if (tr.warmup_remaining > 0)
        return step_warmup(tr, frame, cameras, params.filter);
    return step_cskpf(tr, frame, cameras, params.filter);
}

Trajectory parse_trajectory(const Tracker& tr) {
    Trajectory traj;
    traj.id = tr.id;
    traj.start_frame = tr.history.front().frame;
    traj.states.reserve(tr.history.size());
    traj.associations.reserve(tr.history.size());
    for (const HistoryEntry& h : tr.history) {
        traj.states.push_back(h.state);
        traj.associations.push_back(h.association);
    }
    return traj;
}

}  // namespace

TrackSet run(const Dataset& dataset, const ManagerParams& params,
             std::uint64_t seed) {
    if (dataset.cameras.size() < 2)
        throw CalibrationMissing("need at least two calibrated cameras");
    if (dataset.frames.size() < 3)
        throw InsufficientFrames("need at least three frames of measurements");
    for (const FrameData& f : dataset.frames) {
        if (f.views.size() != dataset.cameras.size())
            throw InputError("frame " + std::to_string(f.frame) +
                             ": measurement views do not match calibration");
        if (f.indexes.size() != f.views.size())
            throw ContractViolation("frame occupancy indexes not built");
    }

    int next_id = 1;
    std::vector<Tracker> active = bootstrap(
        dataset.frames[0], dataset.frames[1], dataset.cameras, params, seed,
        next_id);
    std::vector<Tracker> retired;

    const std::size_t n_views = dataset.cameras.size();
    std::vector<std::set<int>> assoc_prev(n_views);
    for (const Tracker& tr : active)
        for (std::size_t v = 0; v < n_views; ++v)
            assoc_prev[v].insert(tr.history.front().association[v]);

    for (std::size_t t = 2; t < dataset.frames.size(); ++t) {
        const FrameData& frame = dataset.frames[t];
        std::vector<StepOutcome> outcomes(active.size());
        parallel_for(active.size(), params.workers, [&](std::size_t i) {
            outcomes[i] =
                dispatch_step(active[i], frame, dataset.cameras, params);
        });

        std::vector<std::set<int>> assoc_now(n_views);
        std::vector<Tracker> survivors;
        survivors.reserve(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            commit_outcome(active[i], outcomes[i], frame.frame);
            if (active[i].status == TrackerStatus::Inactive) {
                retired.push_back(std::move(active[i]));
                continue;
            }
            for (std::size_t v = 0; v < n_views; ++v)
                assoc_now[v].insert(outcomes[i].association[v]);
            survivors.push_back(std::move(active[i]));
        }
        active = std::move(survivors);

        std::vector<Tracker> births =
            spawn_new(dataset.frames[t - 1], frame, assoc_prev, assoc_now,
                      dataset.cameras, active, params, seed, next_id);
        for (Tracker& tr : births) {
            for (std::size_t v = 0; v < n_views; ++v)
                assoc_now[v].insert(tr.history.front().association[v]);
            active.push_back(std::move(tr));
        }
        assoc_prev = std::move(assoc_now);
    }

    TrackSet tracks;
    for (const std::vector<Tracker>* pool : {&active, &retired})
        for (const Tracker& tr : *pool)
            if (static_cast<int>(tr.history.size()) >= params.min_track_length)
                tracks.trajectories.push_back(parse_trajectory(tr));
    std::sort(tracks.trajectories.begin(), tracks.trajectories.end(),
              [](const Trajectory& a, const Trajectory& b) {
                  return a.id < b.id;
              });
    return tracks;
}

}  // namespace swarmtrack
