#include "swarmtrack/filter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace swarmtrack {

ParticleSet sample_particles_cv(const StateCV& mean, double sigma2, int n,
                                Rng& rng) {
    if (n < 1 || sigma2 < 0.0)
        throw ContractViolation("sample_particles_cv: need n >= 1, sigma2 >= 0");
    const double sigma = std::sqrt(sigma2);
    ParticleSet ps;
    ps.states.reserve(static_cast<std::size_t>(n));
    ps.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
    for (int i = 0; i < n; ++i) {
        StateCV s;
        for (int k = 0; k < 6; ++k) s[k] = mean[k] + sigma * rng.gaussian();
        ps.states.push_back(csm_from_cv(s));
    }
    return ps;
}

ParticleSet sample_particles_csm(const StateCSM& mean, const Covariance9& P,
                                 int n, Rng& rng) {
    if (n < 1)
        throw ContractViolation("sample_particles_csm: need n >= 1");
    const double jitter = 1e-9 * P.trace() / 9.0;
    Covariance9 jittered = P + jitter * Covariance9::Identity();
    jittered = 0.5 * (jittered + jittered.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Covariance9> eig(jittered);
    if (eig.info() != Eigen::Success)
        throw FactorizationFailure("particle covariance factorization failed");
    const Vec9 evals = eig.eigenvalues();
    const double scale = std::max(1.0, evals[8]);
    if (evals[0] < -1e-6 * scale)
        throw FactorizationFailure(
            "particle covariance has a significant negative eigenvalue");
    Mat9 sqrt_factor = eig.eigenvectors();
    for (int k = 0; k < 9; ++k)
        sqrt_factor.col(k) *= std::sqrt(std::max(0.0, evals[k]));

    ParticleSet ps;
    ps.states.reserve(static_cast<std::size_t>(n));
    ps.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
    Vec9 z;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 9; ++k) z[k] = rng.gaussian();
        ps.states.push_back(mean + sqrt_factor * z);
    }
    return ps;
}

namespace {

/// Appearance term per blob: ncc against the previous associated
/// measurement, clamped at 0; 1 when either side has no patch.
std::vector<double> appearance_terms(const std::vector<Measurement>& blobs,
                                     const Measurement* prev) {
    std::vector<double> terms(blobs.size(), 1.0);
    if (prev == nullptr || prev->patch.empty()) return terms;
    for (std::size_t k = 0; k < blobs.size(); ++k) {
        if (blobs[k].patch.empty()) continue;
        terms[k] = std::max(0.0, ncc(blobs[k].patch, prev->patch));
    }
    return terms;
}

}  // namespace

void weigh_particles(ParticleSet& ps, const FrameData& frame,
                     const std::vector<CameraModel>& cameras,
                     const std::vector<Measurement>& prev_assoc,
                     double object_radius) {
    const std::size_t n_views = frame.views.size();
    if (frame.indexes.size() != n_views)
        throw ContractViolation("weigh_particles: frame indexes not built");

    std::vector<std::vector<double>> appearance(n_views);
    for (std::size_t v = 0; v < n_views; ++v) {
        const Measurement* prev =
            v < prev_assoc.size() ? &prev_assoc[v] : nullptr;
        appearance[v] = appearance_terms(frame.views[v], prev);
    }

    std::vector<std::pair<int, int>> hits;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Vec3 pos = position_of(ps.states[i]);
        // Best candidate credibility factorizes over views: the weight is
        // exp(sum_v (max_k tau_vk - 1)), and it is zero as soon as one
        // view has no overlapping measurement.
        double exponent = 0.0;
        bool alive = true;
        for (std::size_t v = 0; v < n_views && alive; ++v) {
            PixelSet disc;
            try {
                disc = project_ball(cameras[v], pos, object_radius);
            } catch (const PointBehindCamera&) {
                alive = false;
                break;
            }
            frame.indexes[v].overlaps(disc, hits);
            double best_tau = -1.0;
            for (const auto& [blob, count] : hits) {
                const double eta =
                    static_cast<double>(count) /
                    static_cast<double>(frame.indexes[v].blob_size(blob));
                const double tau =
                    std::clamp(eta * appearance[v][static_cast<std::size_t>(blob)],
                               0.0, 1.0);
                best_tau = std::max(best_tau, tau);
            }
            if (best_tau < 0.0) {
                alive = false;
                break;
            }
            exponent += best_tau - 1.0;
        }
        ps.weights[i] = alive ? std::exp(exponent) : 0.0;
    }
}

StateCSM estimate_state(const ParticleSet& ps) {
    double total = 0.0;
    for (const double w : ps.weights) total += w;
    if (!(total > 0.0))
        throw AllZeroWeights("estimate_state: particle weights sum to zero");
    StateCSM out = StateCSM::Zero();
    for (std::size_t i = 0; i < ps.size(); ++i)
        out += (ps.weights[i] / total) * ps.states[i];
    return out;
}

namespace {

struct AssociationResult {
    bool found = false;
    Vec3 observation = Vec3::Zero();
    std::vector<int> indices;
    std::vector<Measurement> matched;
};

/// Association of the estimated state: candidate group at the estimate,
/// best candidate, stereo reconstruction of its centroids.
AssociationResult associate_estimate(const StateCSM& estimate,
                                     const FrameData& frame,
                                     const std::vector<CameraModel>& cameras,
                                     const std::vector<Measurement>& prev_assoc,
                                     double object_radius) {
    AssociationResult result;
    const std::size_t n_views = frame.views.size();
    const Vec3 pos = position_of(estimate);

    std::vector<PixelSet> projections(n_views);
    for (std::size_t v = 0; v < n_views; ++v) {
        try {
            projections[v] = project_ball(cameras[v], pos, object_radius);
        } catch (const PointBehindCamera&) {
            return result;
        }
    }
    std::vector<const Measurement*> prev(n_views, nullptr);
    for (std::size_t v = 0; v < n_views && v < prev_assoc.size(); ++v)
        prev[v] = &prev_assoc[v];

    const CandidateGroup group = candidate_groups(projections, frame.views, prev);
    const CandidateAssociation* best = best_candidate(group);
    if (best == nullptr) return result;

    const Measurement& m1 =
        frame.views[0][static_cast<std::size_t>(best->indices[0])];
    const Measurement& m2 =
        frame.views[1][static_cast<std::size_t>(best->indices[1])];
    const Triangulation tri =
        triangulate(cameras[0], m1.centroid, cameras[1], m2.centroid);

    result.found = true;
    result.observation = tri.point;
    result.indices = best->indices;
    result.matched.reserve(n_views);
    for (std::size_t v = 0; v < n_views; ++v)
        result.matched.push_back(
            frame.views[v][static_cast<std::size_t>(best->indices[v])]);
    return result;
}

}  // namespace

StepOutcome step_cvpf(Tracker& tr, const FrameData& frame,
                      const std::vector<CameraModel>& cameras,
                      const FilterParams& params) {
    if (tr.status != TrackerStatus::Active)
        throw ContractViolation("step_cvpf: tracker is inactive");
    const StateCV predicted = predict_cv(cv_from_csm(tr.state), params.csm.dt);
    ParticleSet ps = sample_particles_cv(predicted, params.sigma2,
                                         params.n_particles, tr.rng);
    weigh_particles(ps, frame, cameras, tr.last_assoc, params.object_radius);

    StepOutcome outcome;
    double total = 0.0;
    for (const double w : ps.weights) total += w;
    if (!(total > 0.0)) return outcome;  // lost: every candidate group empty

    const StateCSM estimate = estimate_state(ps);
    const AssociationResult assoc = associate_estimate(
        estimate, frame, cameras, tr.last_assoc, params.object_radius);
    if (!assoc.found) return outcome;  // nothing overlaps the estimate

    outcome.updated = true;
    outcome.state = estimate;
    outcome.cov = tr.cov;
    outcome.a_bar = tr.a_bar;
    outcome.observation = assoc.observation;
    outcome.association = assoc.indices;
    outcome.matched = assoc.matched;
    return outcome;
}

StepOutcome step_cskpf(Tracker& tr, const FrameData& frame,
                       const std::vector<CameraModel>& cameras,
                       const FilterParams& params) {
    if (tr.status != TrackerStatus::Active)
        throw ContractViolation("step_cskpf: tracker is inactive");
    if (tr.warmup_remaining > 0)
        throw ContractViolation("step_cskpf: warm-up has not elapsed");

    const Predicted pred =
        predict_csm(tr.state, tr.cov, params.csm, tr.a_bar);
    ParticleSet ps = sample_particles_csm(pred.state, pred.cov,
                                          params.n_particles, tr.rng);
    weigh_particles(ps, frame, cameras, tr.last_assoc, params.object_radius);

    StepOutcome outcome;
    double total = 0.0;
    for (const double w : ps.weights) total += w;
    if (!(total > 0.0)) return outcome;

    const StateCSM estimate = estimate_state(ps);
    const AssociationResult assoc = associate_estimate(
        estimate, frame, cameras, tr.last_assoc, params.object_radius);
    if (!assoc.found) return outcome;

    const Corrected corr =
        kalman_correct(estimate, pred.cov, assoc.observation, params.obs);

    outcome.updated = true;
    outcome.state = corr.state;
    outcome.cov = corr.cov;
    outcome.a_bar =
        MeanAcceleration::clamped(acceleration_of(corr.state), params.csm);
    outcome.observation = assoc.observation;
    outcome.association = assoc.indices;
    outcome.matched = assoc.matched;
    return outcome;
}

StepOutcome step_warmup(Tracker& tr, const FrameData& frame,
                        const std::vector<CameraModel>& cameras,
                        const FilterParams& params) {
    if (tr.status != TrackerStatus::Active)
        throw ContractViolation("step_warmup: tracker is inactive");

    const Vec3 prev_velocity = velocity_of(tr.state);
    // Covariance machinery runs alongside so P and a_bar are converged by
    // the time the CSM pipeline takes over; the state update itself is the
    // constant-velocity one.
    const Predicted pred = predict_csm(tr.state, tr.cov, params.csm, tr.a_bar);
    StepOutcome outcome = step_cvpf(tr, frame, cameras, params);
    if (!outcome.updated) return outcome;

    const Corrected corr =
        kalman_correct(pred.state, pred.cov, outcome.observation, params.obs);
    outcome.cov = corr.cov;

    // Acceleration is not part of the CV state: estimate the running mean
    // by finite-differencing consecutive velocity estimates.
    const Vec3 accel =
        (velocity_of(outcome.state) - prev_velocity) / params.csm.dt;
    outcome.a_bar = MeanAcceleration::clamped(accel, params.csm);
    StateCSM with_accel = outcome.state;
    with_accel[2] = outcome.a_bar.a_bar[0];
    with_accel[5] = outcome.a_bar.a_bar[1];
    with_accel[8] = outcome.a_bar.a_bar[2];
    outcome.state = with_accel;
    return outcome;
}

void commit_outcome(Tracker& tr, const StepOutcome& outcome, int frame) {
    if (!outcome.updated) {
        tr.status = TrackerStatus::Inactive;
        return;
    }
    tr.state = outcome.state;
    tr.cov = outcome.cov;
    tr.a_bar = outcome.a_bar;
    tr.last_assoc = outcome.matched;
    tr.history.push_back(HistoryEntry{frame, outcome.state,
                                      outcome.observation,
                                      outcome.association});
    if (tr.warmup_remaining > 0) --tr.warmup_remaining;
}

}  // namespace swarmtrack
