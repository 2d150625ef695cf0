#pragma once

#include <array>

#include "swarmtrack/errors.hpp"
#include "swarmtrack/types.hpp"

namespace swarmtrack {

// State layouts:
//   StateCV  = [x, vx, y, vy, z, vz]
//   StateCSM = [x, vx, ax, y, vy, ay, z, vz, az]
using StateCV = Vec6;
using StateCSM = Vec9;
using Covariance9 = Mat9;

StateCSM csm_from_cv(const StateCV& s);
StateCV cv_from_csm(const StateCSM& s);

inline Vec3 position_of(const StateCSM& s) { return Vec3(s[0], s[3], s[6]); }
inline Vec3 velocity_of(const StateCSM& s) { return Vec3(s[1], s[4], s[7]); }
inline Vec3 acceleration_of(const StateCSM& s) {
    return Vec3(s[2], s[5], s[8]);
}

/// Parameters of the current-statistical-model acceleration process.
struct CsmParams {
    std::array<double, 3> alpha{5.0, 5.0, 5.0};   // 1/s, per axis
    std::array<double, 3> a_max{5.0, 5.0, 5.0};   // units/s^2, per axis
    double dt = 0.1;                              // s

    void validate() const;
};

/// Current average acceleration, clamped so |a_bar[i]| <= a_max[i].
struct MeanAcceleration {
    Vec3 a_bar = Vec3::Zero();

    static MeanAcceleration clamped(const Vec3& a, const CsmParams& p);
};

/// Linear observation of the position block with Gaussian noise R.
struct ObservationModel {
    Mat39 H = Mat39::Zero();
    Mat3 R = Mat3::Identity();

    /// Observation of (x, y, z) with the given noise covariance.
    static ObservationModel position(const Mat3& noise);
};

/// Constant-velocity prediction over dt.
StateCV predict_cv(const StateCV& s, double dt);

struct CsmTransition {
    Mat9 G;   // state transition
    Mat93 U;  // input control (columns act per axis)
};

/// State transition and input control matrices of the CSM model,
/// block-diagonal per axis (alpha may differ between axes).
CsmTransition csm_transition(const CsmParams& p);

/// Time-varying CSM process noise Q = blockdiag(Q1, Q2, Q3), where
/// Qi = 2*alpha_i*sigma_i^2 [q_jk] and sigma_i^2 follows the modified
/// Rayleigh variance around the current average acceleration.
Covariance9 csm_process_noise(const CsmParams& p, const MeanAcceleration& a);

struct Predicted {
    StateCSM state;
    Covariance9 cov;
};

/// CSM prediction: state = G s + U a_bar, cov = G P G' + Q (symmetrized).
Predicted predict_csm(const StateCSM& s, const Covariance9& P,
                      const CsmParams& p, const MeanAcceleration& a);

struct Corrected {
    StateCSM state;
    Covariance9 cov;
    Mat93 gain;  // Kalman gain used for the correction
};

/// Kalman correction of a predicted state by a position observation.
/// The corrected covariance is computed as P - M M' with M = P H' L^-T,
/// L the Cholesky factor of the innovation covariance, which keeps the
/// position-block trace non-increasing in floating point.
/// Throws SingularInnovation when H P H' + R is numerically singular.
Corrected kalman_correct(const StateCSM& s_pred, const Covariance9& P_pred,
                         const Vec3& y, const ObservationModel& m);

}  // namespace swarmtrack
