#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "swarmtrack/eval.hpp"
#include "swarmtrack/rng.hpp"

using namespace swarmtrack;

namespace {

PointSeries line_series(int id, int start_frame, int n, const Vec3& origin,
                        const Vec3& step) {
    PointSeries s;
    s.id = id;
    s.start_frame = start_frame;
    for (int k = 0; k < n; ++k) s.positions.push_back(origin + k * step);
    return s;
}

/// Exhaustive assignment oracle: maximize matches, then minimize cost.
struct OracleResult {
    int matches = 0;
    double cost = 0.0;
};

void oracle_recurse(const std::vector<std::vector<double>>& cost,
                    double forbidden, std::size_t row, std::vector<bool>& used,
                    int matches, double total, OracleResult& best) {
    if (row == cost.size()) {
        if (matches > best.matches ||
            (matches == best.matches && total < best.cost)) {
            best.matches = matches;
            best.cost = total;
        }
        return;
    }
    oracle_recurse(cost, forbidden, row + 1, used, matches, total, best);
    for (std::size_t c = 0; c < cost[row].size(); ++c) {
        if (used[c] || cost[row][c] >= forbidden) continue;
        used[c] = true;
        oracle_recurse(cost, forbidden, row + 1, used, matches + 1,
                       total + cost[row][c], best);
        used[c] = false;
    }
}

OracleResult assignment_oracle(const std::vector<std::vector<double>>& cost,
                               double forbidden) {
    OracleResult best;
    best.matches = -1;
    std::vector<bool> used(cost.empty() ? 0 : cost[0].size(), false);
    oracle_recurse(cost, forbidden, 0, used, 0, 0.0, best);
    return best;
}

}  // namespace

TEST_CASE("discrepancy: identical point gives 0, offset (3,4,0) gives 5") {
    const PointSeries gt = line_series(1, 1, 5, Vec3(0, 0, 0), Vec3(1, 0, 0));
    PointSeries track = gt;
    track.id = 7;
    CHECK(discrepancy(gt, track, 3, 1.5) == 0.0);
    for (Vec3& p : track.positions) p += Vec3(3, 4, 0);
    CHECK(discrepancy(gt, track, 3, 10.0) == 5.0);
}

TEST_CASE("discrepancy: missing track frame falls back to d0") {
    const PointSeries gt = line_series(1, 1, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    const PointSeries track =
        line_series(2, 1, 3, Vec3(0, 0, 0), Vec3(1, 0, 0));
    CHECK(discrepancy(gt, track, 8, 1.5) == 1.5);
}

TEST_CASE("min_cost_assignment: matches the exhaustive oracle") {
    Rng rng(31);
    const double forbidden = 1e9;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform(0, 3));
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform(0, 4));
        std::vector<std::vector<double>> cost(n, std::vector<double>(m));
        for (auto& row : cost)
            for (double& c : row)
                c = rng.uniform(0.0, 1.0) < 0.3 ? forbidden
                                                : rng.uniform(0.0, 10.0);
        const std::vector<int> assigned = min_cost_assignment(cost, forbidden);

        // One-to-one and feasible.
        std::vector<bool> used(m, false);
        int matches = 0;
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            if (assigned[r] < 0) continue;
            const std::size_t c = static_cast<std::size_t>(assigned[r]);
            CHECK(!used[c]);
            used[c] = true;
            CHECK(cost[r][c] < forbidden);
            ++matches;
            total += cost[r][c];
        }
        const OracleResult best = assignment_oracle(cost, forbidden);
        CHECK(matches == best.matches);
        if (matches == best.matches)
            CHECK(total == doctest::Approx(best.cost).epsilon(1e-9));
    }
}

// --- The five frozen metric fixtures ----------------------------------

TEST_CASE("fixture 1: perfect single track scores (1, 1, 0)") {
    const PointSeries gt = line_series(1, 1, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    PointSeries track = gt;
    track.id = 5;
    const Metrics m = evaluate({gt}, {track}, EvalConfig{1.5});
    CHECK(m.integrity == 1.0);
    CHECK(m.continuity == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.idsw_total == 0);
    CHECK(m.matched_instants == 10);
}

TEST_CASE("fixture 2: half-covered truth scores integrity 0.5") {
    const PointSeries gt = line_series(1, 1, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    PointSeries track = line_series(5, 6, 5, Vec3(5, 0, 0), Vec3(1, 0, 0));
    const Metrics m = evaluate({gt}, {track}, EvalConfig{1.5});
    CHECK(m.integrity == 0.5);
    CHECK(m.continuity == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.matched_instants == 5);
}

TEST_CASE("fixture 3: matching series (1,1,0,1,2,2) counts one switch") {
    // Truth over frames 1..6 along x = frame - 1.
    const PointSeries gt = line_series(9, 1, 6, Vec3(0, 0, 0), Vec3(1, 0, 0));
    // Track 1 covers frames 1..4 but strays beyond d0 at frame 3.
    PointSeries t1 = line_series(1, 1, 4, Vec3(0, 0, 0), Vec3(1, 0, 0));
    t1.positions[2] += Vec3(0, 50, 0);
    // Track 2 covers frames 5..6 on the truth.
    const PointSeries t2 = line_series(2, 5, 2, Vec3(4, 0, 0), Vec3(1, 0, 0));

    const MatchSeries ms = match({gt}, {t1, t2}, EvalConfig{1.5});
    CHECK(ms.matched[0] == std::vector<int>{1, 1, 0, 1, 2, 2});
    const Metrics m = evaluate({gt}, {t1, t2}, EvalConfig{1.5});
    CHECK(m.idsw_total == 1);
    CHECK(m.integrity == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(m.continuity == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(m.precision == 0.0);
}

TEST_CASE("fixture 4: constant (3,4,0) offset scores precision exactly 5") {
    const PointSeries gt = line_series(1, 1, 8, Vec3(0, 0, 0), Vec3(1, 0, 0));
    PointSeries track = gt;
    track.id = 3;
    for (Vec3& p : track.positions) p += Vec3(3, 4, 0);
    const Metrics m = evaluate({gt}, {track}, EvalConfig{6.0});
    CHECK(m.integrity == 1.0);
    CHECK(m.continuity == 1.0);
    CHECK(m.precision == 5.0);
}

TEST_CASE("fixture 5: crossing tracks keep their carried-over pairing") {
    // Two trajectories passing through each other within d0.
    const PointSeries gt_a =
        line_series(1, 1, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    const PointSeries gt_b =
        line_series(2, 1, 10, Vec3(9, 0, 0), Vec3(-1, 0, 0));
    PointSeries t_a = gt_a;
    t_a.id = 11;
    PointSeries t_b = gt_b;
    t_b.id = 22;
    const EvalConfig cfg{1.5};

    const MatchSeries ms = match({gt_a, gt_b}, {t_a, t_b}, cfg);
    for (int k = 0; k < 10; ++k) {
        CHECK(ms.matched[0][static_cast<std::size_t>(k)] == 11);
        CHECK(ms.matched[1][static_cast<std::size_t>(k)] == 22);
    }
    const Metrics m = evaluate({gt_a, gt_b}, {t_a, t_b}, cfg);
    CHECK(m.integrity == 1.0);
    CHECK(m.continuity == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.idsw_total == 0);

    // Per-frame sanity against the exhaustive assignment oracle: the
    // carried-over solution attains the oracle's match count everywhere.
    for (int frame = 1; frame <= 10; ++frame) {
        std::vector<std::vector<double>> cost(2, std::vector<double>(2));
        const std::vector<const PointSeries*> gts = {&gt_a, &gt_b};
        const std::vector<const PointSeries*> tracks = {&t_a, &t_b};
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                const double d =
                    (gts[static_cast<std::size_t>(r)]->at(frame) -
                     tracks[static_cast<std::size_t>(c)]->at(frame))
                        .norm();
                cost[static_cast<std::size_t>(r)]
                    [static_cast<std::size_t>(c)] = d <= cfg.d0 ? d : 1e9;
            }
        const OracleResult best = assignment_oracle(cost, 1e9);
        int matched_here = 0;
        for (int i = 0; i < 2; ++i)
            if (ms.matched[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(frame - 1)] != 0)
                ++matched_here;
        CHECK(matched_here == best.matches);
    }
}

// --- Operations and properties -----------------------------------------

TEST_CASE("match: no tracks leaves every instant unmatched") {
    const PointSeries gt = line_series(1, 1, 5, Vec3(0, 0, 0), Vec3(1, 0, 0));
    const MatchSeries ms = match({gt}, {}, EvalConfig{1.5});
    CHECK(ms.matched[0] == std::vector<int>{0, 0, 0, 0, 0});
    const Metrics m = evaluate({gt}, {}, EvalConfig{1.5});
    CHECK(m.integrity == 0.0);
    CHECK(m.continuity == 1.0);
    CHECK(std::isnan(m.precision));
}

TEST_CASE("match: a track id serves at most one truth per frame") {
    const PointSeries gt_a =
        line_series(1, 1, 5, Vec3(0, 0, 0), Vec3(0, 0, 0));
    const PointSeries gt_b =
        line_series(2, 1, 5, Vec3(0.5, 0, 0), Vec3(0, 0, 0));
    const PointSeries track =
        line_series(9, 1, 5, Vec3(0.2, 0, 0), Vec3(0, 0, 0));
    const MatchSeries ms = match({gt_a, gt_b}, {track}, EvalConfig{1.5});
    for (int k = 0; k < 5; ++k) {
        const bool a = ms.matched[0][static_cast<std::size_t>(k)] != 0;
        const bool b = ms.matched[1][static_cast<std::size_t>(k)] != 0;
        CHECK((a ^ b));
    }
}

TEST_CASE("continuity: zeros are skipped, resumption is not a switch") {
    MatchSeries ms;
    ms.start_frames = {1};
    ms.matched = {{1, 1, 0, 1, 2, 2}};
    CHECK(continuity(ms) == doctest::Approx(1.0 - 1.0 / 6.0).epsilon(1e-15));
    ms.matched = {{1, 0, 0, 1, 1, 1}};
    CHECK(continuity(ms) == 1.0);
}

TEST_CASE("precision: throws without matches") {
    MatchSeries ms;
    ms.start_frames = {1};
    ms.matched = {{0, 0, 0}};
    const PointSeries gt = line_series(1, 1, 3, Vec3(0, 0, 0), Vec3(1, 0, 0));
    CHECK_THROWS_AS(precision(ms, {gt}, {}), NoMatches);
}

TEST_CASE("metrics are invariant under track id relabeling") {
    Rng rng(5);
    const PointSeries gt_a =
        line_series(1, 1, 20, Vec3(0, 0, 0), Vec3(1, 0, 0));
    const PointSeries gt_b =
        line_series(2, 5, 16, Vec3(0, 5, 0), Vec3(0.5, 0, 0));
    PointSeries t1 = gt_a;
    t1.id = 3;
    for (Vec3& p : t1.positions)
        p += Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0);
    PointSeries t2 = gt_b;
    t2.id = 4;
    const Metrics m1 = evaluate({gt_a, gt_b}, {t1, t2}, EvalConfig{1.5});
    t1.id = 1234;
    t2.id = 77;
    const Metrics m2 = evaluate({gt_a, gt_b}, {t1, t2}, EvalConfig{1.5});
    CHECK(m1.integrity == m2.integrity);
    CHECK(m1.continuity == m2.continuity);
    CHECK(m1.precision == m2.precision);
    CHECK(m1.idsw_total == m2.idsw_total);
}

TEST_CASE("adding a never-matching track changes no metric") {
    const PointSeries gt = line_series(1, 1, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    PointSeries track = gt;
    track.id = 5;
    const PointSeries far =
        line_series(6, 1, 10, Vec3(0, 100, 0), Vec3(1, 0, 0));
    const Metrics m1 = evaluate({gt}, {track}, EvalConfig{1.5});
    const Metrics m2 = evaluate({gt}, {track, far}, EvalConfig{1.5});
    CHECK(m1.integrity == m2.integrity);
    CHECK(m1.continuity == m2.continuity);
    CHECK(m1.precision == m2.precision);
    CHECK(m1.matched_instants == m2.matched_instants);
}

TEST_CASE("deleting matched instants never increases integrity") {
    const PointSeries gt = line_series(1, 1, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    PointSeries track = gt;
    track.id = 5;
    double last = 1.0;
    for (int keep = 10; keep >= 2; keep -= 2) {
        PointSeries shorter = track;
        shorter.positions.resize(static_cast<std::size_t>(keep));
        const Metrics m = evaluate({gt}, {shorter}, EvalConfig{1.5});
        CHECK(m.integrity <= last + 1e-15);
        last = m.integrity;
    }
}

TEST_CASE("metric ranges: integrity/continuity in [0,1], precision in "
          "[0,d0]") {
    Rng rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<PointSeries> gts, tracks;
        const int n_gt = 1 + static_cast<int>(rng.uniform(0, 3));
        for (int i = 0; i < n_gt; ++i)
            gts.push_back(line_series(
                i + 1, 1 + static_cast<int>(rng.uniform(0, 3)),
                3 + static_cast<int>(rng.uniform(0, 8)),
                Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), 0),
                Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0)));
        const int n_tr = static_cast<int>(rng.uniform(0, 3));
        for (int j = 0; j < n_tr; ++j) {
            PointSeries t = gts[static_cast<std::size_t>(j % n_gt)];
            t.id = 100 + j;
            for (Vec3& p : t.positions)
                p += Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0);
            tracks.push_back(t);
        }
        const EvalConfig cfg{1.5};
        const Metrics m = evaluate(gts, tracks, cfg);
        CHECK(m.integrity >= 0.0);
        CHECK(m.integrity <= 1.0);
        CHECK(m.continuity >= 0.0);
        CHECK(m.continuity <= 1.0);
        if (!std::isnan(m.precision)) {
            CHECK(m.precision >= 0.0);
            CHECK(m.precision <= cfg.d0);
        }
    }
}

TEST_CASE("restrict_series: trims to the window and drops empty series") {
    const PointSeries s = line_series(1, 5, 10, Vec3(0, 0, 0), Vec3(1, 0, 0));
    const auto trimmed = restrict_series({s}, 8, 11);
    REQUIRE(trimmed.size() == 1);
    CHECK(trimmed[0].start_frame == 8);
    CHECK(trimmed[0].positions.size() == 4);
    CHECK(trimmed[0].positions[0][0] == 3.0);
    CHECK(restrict_series({s}, 20, 30).empty());
}
