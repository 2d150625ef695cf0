#include "swarmtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace swarmtrack {

double discrepancy(const PointSeries& gt, const PointSeries& track, int frame,
                   double d0) {
    if (!gt.alive_at(frame))
        throw ContractViolation("discrepancy: frame outside truth lifespan");
    if (!track.alive_at(frame)) return d0;
    return (gt.at(frame) - track.at(frame)).norm();
}

std::vector<int> min_cost_assignment(
    const std::vector<std::vector<double>>& cost, double forbidden) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const int m_real = static_cast<int>(cost[0].size());
    // Pad to at least as many columns as rows; padded and forbidden cells
    // share one large cost so the assignment first maximizes feasible
    // matches, then minimizes their total cost.
    const int m = std::max(n, m_real);
    const double big = forbidden;

    // Hungarian algorithm with potentials, O(n^2 m).
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);
    auto cell = [&](int i, int j) {  // 1-based
        if (j > m_real) return big;
        const double c = cost[static_cast<std::size_t>(i - 1)]
                             [static_cast<std::size_t>(j - 1)];
        return c >= forbidden ? big : c;
    };
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1,
                                 std::numeric_limits<double>::infinity());
        std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cell(i0, j) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(
                        p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        const int i = p[static_cast<std::size_t>(j)];
        if (i == 0) continue;
        if (j <= m_real &&
            cost[static_cast<std::size_t>(i - 1)]
                [static_cast<std::size_t>(j - 1)] < forbidden)
            row_to_col[static_cast<std::size_t>(i - 1)] = j - 1;
    }
    return row_to_col;
}

MatchSeries match(const std::vector<PointSeries>& gt,
                  const std::vector<PointSeries>& tracks,
                  const EvalConfig& cfg) {
    MatchSeries ms;
    ms.matched.resize(gt.size());
    ms.start_frames.resize(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        ms.start_frames[i] = gt[i].start_frame;
        ms.matched[i].assign(gt[i].positions.size(), 0);
    }
    if (gt.empty()) return ms;

    int frame_lo = gt[0].start_frame;
    int frame_hi = gt[0].end_frame();
    for (const PointSeries& s : gt) {
        frame_lo = std::min(frame_lo, s.start_frame);
        frame_hi = std::max(frame_hi, s.end_frame());
    }

    const double forbidden = 1e9 * std::max(1.0, cfg.d0);
    std::unordered_map<std::size_t, int> carry;  // gt index -> track id
    for (int frame = frame_lo; frame <= frame_hi; ++frame) {
        std::vector<std::size_t> live_gt;
        for (std::size_t i = 0; i < gt.size(); ++i)
            if (gt[i].alive_at(frame)) live_gt.push_back(i);
        std::vector<std::size_t> live_tracks;
        for (std::size_t j = 0; j < tracks.size(); ++j)
            if (tracks[j].alive_at(frame)) live_tracks.push_back(j);
        if (live_gt.empty()) continue;

        std::unordered_map<std::size_t, int> next_carry;
        std::vector<bool> track_used(live_tracks.size(), false);
        std::vector<std::size_t> open_gt;

        // Keep last frame's pairs that are still close enough.
        for (const std::size_t i : live_gt) {
            bool kept = false;
            const auto it = carry.find(i);
            if (it != carry.end()) {
                for (std::size_t tj = 0; tj < live_tracks.size(); ++tj) {
                    const PointSeries& track = tracks[live_tracks[tj]];
                    if (track.id != it->second || track_used[tj]) continue;
                    if ((gt[i].at(frame) - track.at(frame)).norm() <= cfg.d0) {
                        track_used[tj] = true;
                        next_carry[i] = track.id;
                        ms.matched[i][static_cast<std::size_t>(
                            frame - gt[i].start_frame)] = track.id;
                        kept = true;
                    }
                    break;
                }
            }
            if (!kept) open_gt.push_back(i);
        }

        // Optimal assignment for the rest.
        std::vector<std::size_t> open_tracks;
        for (std::size_t tj = 0; tj < live_tracks.size(); ++tj)
            if (!track_used[tj]) open_tracks.push_back(live_tracks[tj]);
        if (!open_gt.empty() && !open_tracks.empty()) {
            std::vector<std::vector<double>> cost(
                open_gt.size(),
                std::vector<double>(open_tracks.size(), forbidden));
            for (std::size_t r = 0; r < open_gt.size(); ++r) {
                for (std::size_t c = 0; c < open_tracks.size(); ++c) {
                    const double d = (gt[open_gt[r]].at(frame) -
                                      tracks[open_tracks[c]].at(frame))
                                         .norm();
                    if (d <= cfg.d0) cost[r][c] = d;
                }
            }
            const std::vector<int> assigned =
                min_cost_assignment(cost, forbidden);
            for (std::size_t r = 0; r < open_gt.size(); ++r) {
                if (assigned[r] < 0) continue;
                const std::size_t i = open_gt[r];
                const int track_id =
                    tracks[open_tracks[static_cast<std::size_t>(assigned[r])]]
                        .id;
                next_carry[i] = track_id;
                ms.matched[i][static_cast<std::size_t>(
                    frame - gt[i].start_frame)] = track_id;
            }
        }
        carry = std::move(next_carry);
    }
    return ms;
}

namespace {

long total_instants(const MatchSeries& ms) {
    long total = 0;
    for (const auto& series : ms.matched)
        total += static_cast<long>(series.size());
    return total;
}

long matched_instants(const MatchSeries& ms) {
    long matched = 0;
    for (const auto& series : ms.matched)
        for (const int id : series)
            if (id != 0) ++matched;
    return matched;
}

long switch_count(const std::vector<int>& series) {
    long idsw = 0;
    int last = 0;
    for (const int id : series) {
        if (id == 0) continue;  // gaps do not break identity
        if (last != 0 && id != last) ++idsw;
        last = id;
    }
    return idsw;
}

}  // namespace

double integrity(const MatchSeries& ms) {
    const long total = total_instants(ms);
    if (total == 0) return 0.0;
    return static_cast<double>(matched_instants(ms)) /
           static_cast<double>(total);
}

double continuity(const MatchSeries& ms) {
    const long total = total_instants(ms);
    if (total == 0) return 1.0;
    long idsw = 0;
    for (const auto& series : ms.matched) idsw += switch_count(series);
    return 1.0 - static_cast<double>(idsw) / static_cast<double>(total);
}

double precision(const MatchSeries& ms, const std::vector<PointSeries>& gt,
                 const std::vector<PointSeries>& tracks) {
    std::unordered_map<int, const PointSeries*> by_id;
    for (const PointSeries& t : tracks) by_id[t.id] = &t;
    double sum = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < ms.matched.size(); ++i) {
        for (std::size_t k = 0; k < ms.matched[i].size(); ++k) {
            const int id = ms.matched[i][k];
            if (id == 0) continue;
            const int frame = ms.start_frames[i] + static_cast<int>(k);
            sum += (gt[i].at(frame) - by_id.at(id)->at(frame)).norm();
            ++count;
        }
    }
    if (count == 0) throw NoMatches("precision: no matched instants");
    return sum / static_cast<double>(count);
}

Metrics evaluate(const std::vector<PointSeries>& gt,
                 const std::vector<PointSeries>& tracks,
                 const EvalConfig& cfg) {
    const MatchSeries ms = match(gt, tracks, cfg);
    Metrics m;
    m.integrity = integrity(ms);
    m.continuity = continuity(ms);
    long idsw = 0;
    for (const auto& series : ms.matched) idsw += switch_count(series);
    m.idsw_total = idsw;
    m.matched_instants = matched_instants(ms);
    m.precision = m.matched_instants > 0
                      ? precision(ms, gt, tracks)
                      : std::numeric_limits<double>::quiet_NaN();
    return m;
}

std::vector<PointSeries> series_from_tracks(const TrackSet& tracks) {
    std::vector<PointSeries> out;
    out.reserve(tracks.trajectories.size());
    for (const Trajectory& traj : tracks.trajectories) {
        PointSeries s;
        s.id = traj.id;
        s.start_frame = traj.start_frame;
        s.positions.reserve(traj.states.size());
        for (const StateCSM& st : traj.states)
            s.positions.push_back(position_of(st));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PointSeries> series_from_truth(const GroundTruth& truth) {
    std::vector<PointSeries> out;
    out.reserve(truth.objects.size());
    for (std::size_t i = 0; i < truth.objects.size(); ++i) {
        PointSeries s;
        s.id = static_cast<int>(i) + 1;
        s.start_frame = 1;
        s.positions = truth.objects[i].positions;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PointSeries> restrict_series(const std::vector<PointSeries>& series,
                                         int from, int to) {
    std::vector<PointSeries> out;
    for (const PointSeries& s : series) {
        const int lo = std::max(from, s.start_frame);
        const int hi = std::min(to, s.end_frame());
        if (lo > hi) continue;
        PointSeries r;
        r.id = s.id;
        r.start_frame = lo;
        r.positions.assign(
            s.positions.begin() + (lo - s.start_frame),
            s.positions.begin() + (hi - s.start_frame) + 1);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace swarmtrack
