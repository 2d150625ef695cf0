#pragma once

#include <optional>
#include <vector>

#include "swarmtrack/association.hpp"
#include "swarmtrack/geometry.hpp"
#include "swarmtrack/motion.hpp"
#include "swarmtrack/rng.hpp"

namespace swarmtrack {

/// Particle cloud for one tracker step. CV-mode particles carry zero
/// acceleration entries.
struct ParticleSet {
    std::vector<StateCSM> states;
    std::vector<double> weights;

    std::size_t size() const { return states.size(); }
};

enum class TrackerStatus { Active, Inactive };

struct HistoryEntry {
    int frame = 0;
    StateCSM state = StateCSM::Zero();
    Vec3 observation = Vec3::Zero();
    std::vector<int> association;  // measurement index per view
};

/// One tracked object: current state, covariance, association memory and
/// the tracker-owned random stream.
struct Tracker {
    int id = 0;
    TrackerStatus status = TrackerStatus::Active;
    StateCSM state = StateCSM::Zero();
    Covariance9 cov = Covariance9::Zero();
    MeanAcceleration a_bar;
    std::vector<Measurement> last_assoc;  // one per view, previous frame
    std::vector<HistoryEntry> history;    // frames strictly increasing
    int birth_frame = 0;
    int warmup_remaining = 0;
    Rng rng{0};
};

struct FilterParams {
    int n_particles = 100;
    double sigma2 = 0.09;      // CV particle variance, units^2
    CsmParams csm;             // CSM model parameters (holds dt)
    ObservationModel obs;      // Kalman observation model
    double object_radius = 0.5;
};

/// Isotropic Gaussian cloud around a CV mean; weights renewed to 1/n.
ParticleSet sample_particles_cv(const StateCV& mean, double sigma2, int n,
                                Rng& rng);

/// Multivariate Gaussian cloud from a factorization of P + eps*I with
/// eps = 1e-9 * trace(P)/9; weights renewed to 1/n. Throws
/// FactorizationFailure when the jittered covariance is not factorizable.
ParticleSet sample_particles_csm(const StateCSM& mean, const Covariance9& P,
                                 int n, Rng& rng);

/// Updates each particle weight to the credibility of its best candidate
/// association (0 when the candidate group is empty). Weights are left
/// unnormalized so an all-zero cloud stays detectable.
void weigh_particles(ParticleSet& ps, const FrameData& frame,
                     const std::vector<CameraModel>& cameras,
                     const std::vector<Measurement>& prev_assoc,
                     double object_radius);

/// Weight-normalized particle mean. Throws AllZeroWeights when the total
/// weight is zero.
StateCSM estimate_state(const ParticleSet& ps);

/// Result of one tracker step. `updated` is false when the target is lost.
struct StepOutcome {
    bool updated = false;
    StateCSM state = StateCSM::Zero();
    Covariance9 cov = Covariance9::Zero();
    MeanAcceleration a_bar;
    Vec3 observation = Vec3::Zero();
    std::vector<int> association;
    std::vector<Measurement> matched;  // measurement per view, for memory
};

/// One constant-velocity particle-filter step: predict, sample, weigh,
/// estimate, associate at the estimate, triangulate. The estimate becomes
/// the corrected state. Advances only the tracker's random stream; state
/// changes are applied later via commit_outcome.
StepOutcome step_cvpf(Tracker& tr, const FrameData& frame,
                      const std::vector<CameraModel>& cameras,
                      const FilterParams& params);

/// One CSM Kalman particle-filter step: CSM predict of state and
/// covariance, covariance-shaped sampling, weigh/estimate/associate, then
/// Kalman correction of the estimate by the triangulated observation.
/// Throws ContractViolation while tracker warm-up has not elapsed.
StepOutcome step_cskpf(Tracker& tr, const FrameData& frame,
                       const std::vector<CameraModel>& cameras,
                       const FilterParams& params);

/// Warm-up step: constant-velocity state update (accepted as the output)
/// while the CSM covariance and Kalman machinery run alongside, and the
/// mean acceleration is estimated by finite-differencing consecutive
/// velocity estimates.
StepOutcome step_warmup(Tracker& tr, const FrameData& frame,
                        const std::vector<CameraModel>& cameras,
                        const FilterParams& params);

/// Applies an outcome to the tracker: state/cov/a_bar update, history
/// append, association memory, warm-up countdown. Lost outcomes flip the
/// status to Inactive.
void commit_outcome(Tracker& tr, const StepOutcome& outcome, int frame);

}  // namespace swarmtrack
