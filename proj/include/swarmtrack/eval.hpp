#pragma once

#include <vector>

#include "swarmtrack/manager.hpp"
#include "swarmtrack/sim.hpp"
#include "swarmtrack/types.hpp"

namespace swarmtrack {

/// A time-indexed 3D point series over contiguous frames (ground truth or
/// the position track of a trajectory).
struct PointSeries {
    int id = 0;
    int start_frame = 0;
    std::vector<Vec3> positions;

    int end_frame() const {
        return start_frame + static_cast<int>(positions.size()) - 1;
    }
    bool alive_at(int frame) const {
        return frame >= start_frame && frame <= end_frame();
    }
    const Vec3& at(int frame) const {
        return positions[static_cast<std::size_t>(frame - start_frame)];
    }
};

struct EvalConfig {
    double d0 = 1.5;  // threshold distance, world units
};

/// Per true-trajectory matching series: matched track id per frame, or 0.
struct MatchSeries {
    std::vector<std::vector<int>> matched;  // [gt index][frame offset]
    std::vector<int> start_frames;          // per gt index
};

/// Position discrepancy between a truth series and a track at one frame:
/// the Euclidean distance when the track exists there, d0 otherwise.
double discrepancy(const PointSeries& gt, const PointSeries& track, int frame,
                   double d0);

/// Frame-by-frame one-to-one matching between truth and tracks with gate d0:
/// matches carried over from the previous frame are kept while they stay
/// within d0, and the remainder is assigned by minimum-cost assignment.
MatchSeries match(const std::vector<PointSeries>& gt,
                  const std::vector<PointSeries>& tracks,
                  const EvalConfig& cfg);

/// Fraction of ground-truth frame-instants that are matched.
double integrity(const MatchSeries& ms);

/// 1 - (identity switches) / (ground-truth frame-instants). A switch is a
/// transition between distinct nonzero ids; zeros are skipped, so resuming
/// the same id after a gap is not a switch.
double continuity(const MatchSeries& ms);

/// Mean discrepancy over matched instants. Throws NoMatches when the
/// series contains no matched instant.
double precision(const MatchSeries& ms, const std::vector<PointSeries>& gt,
                 const std::vector<PointSeries>& tracks);

struct Metrics {
    double integrity = 0.0;
    double continuity = 0.0;
    double precision = 0.0;  // NaN when nothing matched
    long idsw_total = 0;
    long matched_instants = 0;
};

/// All metrics in one pass; precision is NaN instead of a throw when no
/// instant matched.
Metrics evaluate(const std::vector<PointSeries>& gt,
                 const std::vector<PointSeries>& tracks,
                 const EvalConfig& cfg);

/// Minimum-cost one-to-one assignment on a rectangular cost matrix
/// (rows to columns; infeasible pairs cost >= forbidden). Returns, per row,
/// the assigned column or -1. Exposed for verification against exhaustive
/// enumeration.
std::vector<int> min_cost_assignment(
    const std::vector<std::vector<double>>& cost, double forbidden);

/// Position series of every trajectory in a track set.
std::vector<PointSeries> series_from_tracks(const TrackSet& tracks);

/// Position series of simulated ground truth (objects numbered from 1).
std::vector<PointSeries> series_from_truth(const GroundTruth& truth);

/// Restricts each series to [from, to]; series that do not intersect the
/// range are dropped.
std::vector<PointSeries> restrict_series(const std::vector<PointSeries>& s,
                                         int from, int to);

}  // namespace swarmtrack
