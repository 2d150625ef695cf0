#include "swarmtrack/motion.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace swarmtrack {

StateCSM csm_from_cv(const StateCV& s) {
    StateCSM out = StateCSM::Zero();
    for (int axis = 0; axis < 3; ++axis) {
        out[3 * axis] = s[2 * axis];
        out[3 * axis + 1] = s[2 * axis + 1];
    }
    return out;
}

StateCV cv_from_csm(const StateCSM& s) {
    StateCV out;
    for (int axis = 0; axis < 3; ++axis) {
        out[2 * axis] = s[3 * axis];
        out[2 * axis + 1] = s[3 * axis + 1];
    }
    return out;
}

void CsmParams::validate() const {
    if (!(dt > 0.0)) throw ConfigError("CsmParams: dt must be positive");
    for (int i = 0; i < 3; ++i) {
        if (!(alpha[i] > 0.0))
            throw ConfigError("CsmParams: alpha must be positive");
        if (!(a_max[i] > 0.0))
            throw ConfigError("CsmParams: a_max must be positive");
    }
}

MeanAcceleration MeanAcceleration::clamped(const Vec3& a, const CsmParams& p) {
    MeanAcceleration out;
    for (int i = 0; i < 3; ++i)
        out.a_bar[i] = std::clamp(a[i], -p.a_max[i], p.a_max[i]);
    return out;
}

ObservationModel ObservationModel::position(const Mat3& noise) {
    ObservationModel m;
    m.H.setZero();
    m.H(0, 0) = 1.0;
    m.H(1, 3) = 1.0;
    m.H(2, 6) = 1.0;
    m.R = noise;
    return m;
}

StateCV predict_cv(const StateCV& s, double dt) {
    StateCV out = s;
    for (int axis = 0; axis < 3; ++axis)
        out[2 * axis] += dt * s[2 * axis + 1];
    return out;
}

namespace {

// Cancellation-safe kernels in x = alpha*dt. Each bracket below is the
// closed form divided by its alpha power; the leading terms cancel to
// O(x^3)..O(x^5), so the small-x branch sums the exact Taylor series
// (coefficients verified symbolically) and the large-x branch evaluates
// the closed form directly.
constexpr double kSeriesSwitch = 0.5;
constexpr int kSeriesTerms = 30;

// x + expm1(-x) = x^2/2 - x^3/6 + ...  (accurate for all x)
double x_plus_expm1_neg(double x) { return x + std::expm1(-x); }

// -x + x^2/2 + 1 - e^{-x} = sum_{n>=3} (-1)^{n+1} x^n / n!
double u_pos_bracket(double x) {
    if (x > kSeriesSwitch) return x * x / 2.0 - x_plus_expm1_neg(x);
    double sum = 0.0;
    double term = x * x * x / 6.0;  // n = 3 term magnitude
    double sign = 1.0;
    for (int n = 3; n < kSeriesTerms; ++n) {
        sum += sign * term;
        sign = -sign;
        term *= x / (n + 1);
    }
    return sum;
}

// 1 - e^{-2x} + 2x + (2/3)x^3 - 2x^2 - 4x e^{-x}
//   = sum_{n>=5} (-1)^n (4n - 2^n) x^n / n!
double q11_bracket(double x) {
    if (x > kSeriesSwitch)
        return 1.0 - std::exp(-2.0 * x) + 2.0 * x +
               (2.0 / 3.0) * x * x * x - 2.0 * x * x -
               4.0 * x * std::exp(-x);
    double sum = 0.0;
    double xn = std::pow(x, 5);
    double fact = 120.0;  // 5!
    double sign = -1.0;   // (-1)^5
    double p2 = 32.0;     // 2^5
    for (int n = 5; n < kSeriesTerms; ++n) {
        sum += sign * (4.0 * n - p2) * xn / fact;
        sign = -sign;
        xn *= x;
        fact *= (n + 1);
        p2 *= 2.0;
    }
    return sum;
}

// 1 - e^{-2x} - 2x e^{-x} = sum_{n>=3} (-1)^n (2n - 2^n) x^n / n!
double q13_bracket(double x) {
    if (x > kSeriesSwitch)
        return 1.0 - std::exp(-2.0 * x) - 2.0 * x * std::exp(-x);
    double sum = 0.0;
    double xn = x * x * x;
    double fact = 6.0;   // 3!
    double sign = -1.0;  // (-1)^3
    double p2 = 8.0;     // 2^3
    for (int n = 3; n < kSeriesTerms; ++n) {
        sum += sign * (2.0 * n - p2) * xn / fact;
        sign = -sign;
        xn *= x;
        fact *= (n + 1);
        p2 *= 2.0;
    }
    return sum;
}

// 4e^{-x} - 3 - e^{-2x} + 2x = sum_{n>=3} (-1)^n (4 - 2^n) x^n / n!
double q22_bracket(double x) {
    if (x > kSeriesSwitch)
        return 4.0 * std::exp(-x) - 3.0 - std::exp(-2.0 * x) + 2.0 * x;
    double sum = 0.0;
    double xn = x * x * x;
    double fact = 6.0;
    double sign = -1.0;
    double p2 = 8.0;
    for (int n = 3; n < kSeriesTerms; ++n) {
        sum += sign * (4.0 - p2) * xn / fact;
        sign = -sign;
        xn *= x;
        fact *= (n + 1);
        p2 *= 2.0;
    }
    return sum;
}

Mat3 axis_transition(double alpha, double dt) {
    const double x = alpha * dt;
    Mat3 g;
    g << 1.0, dt, x_plus_expm1_neg(x) / (alpha * alpha),
         0.0, 1.0, -std::expm1(-x) / alpha,
         0.0, 0.0, std::exp(-x);
    return g;
}

Vec3 axis_control(double alpha, double dt) {
    const double x = alpha * dt;
    return Vec3(u_pos_bracket(x) / (alpha * alpha),
                x_plus_expm1_neg(x) / alpha,
                -std::expm1(-x));
}

Mat3 axis_noise_shape(double alpha, double dt) {
    const double x = alpha * dt;
    const double em1 = std::expm1(-x);          // e^{-x} - 1
    const double k1 = x_plus_expm1_neg(x);      // x + e^{-x} - 1
    const double a2 = alpha * alpha;
    const double a3 = a2 * alpha;
    const double a4 = a2 * a2;
    const double a5 = a4 * alpha;
    Mat3 q;
    const double q11 = q11_bracket(x) / (2.0 * a5);
    const double q12 = k1 * k1 / (2.0 * a4);
    const double q13 = q13_bracket(x) / (2.0 * a3);
    const double q22 = q22_bracket(x) / (2.0 * a3);
    const double q23 = em1 * em1 / (2.0 * a2);
    const double q33 = -std::expm1(-2.0 * x) / (2.0 * alpha);
    q << q11, q12, q13, q12, q22, q23, q13, q23, q33;
    return q;
}

}  // namespace

CsmTransition csm_transition(const CsmParams& p) {
    p.validate();
    CsmTransition t;
    t.G.setZero();
    t.U.setZero();
    for (int axis = 0; axis < 3; ++axis) {
        t.G.block<3, 3>(3 * axis, 3 * axis) =
            axis_transition(p.alpha[axis], p.dt);
        t.U.block<3, 1>(3 * axis, axis) = axis_control(p.alpha[axis], p.dt);
    }
    return t;
}

Covariance9 csm_process_noise(const CsmParams& p, const MeanAcceleration& a) {
    p.validate();
    constexpr double kRayleighFactor = (4.0 - 3.14159265358979323846) /
                                       3.14159265358979323846;
    Covariance9 q = Covariance9::Zero();
    for (int axis = 0; axis < 3; ++axis) {
        const double abar = a.a_bar[axis];
        // Modified Rayleigh variance about the current mean acceleration;
        // the two sign branches coincide at abar = 0.
        const double dev = abar >= 0.0 ? p.a_max[axis] - abar
                                       : -p.a_max[axis] - abar;
        const double sigma2 = kRayleighFactor * dev * dev;
        q.block<3, 3>(3 * axis, 3 * axis) =
            2.0 * p.alpha[axis] * sigma2 * axis_noise_shape(p.alpha[axis], p.dt);
    }
    return q;
}

Predicted predict_csm(const StateCSM& s, const Covariance9& P,
                      const CsmParams& p, const MeanAcceleration& a) {
    const CsmTransition t = csm_transition(p);
    Predicted out;
    out.state = t.G * s + t.U * a.a_bar;
    out.cov = t.G * P * t.G.transpose() + csm_process_noise(p, a);
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

Corrected kalman_correct(const StateCSM& s_pred, const Covariance9& P_pred,
                         const Vec3& y, const ObservationModel& m) {
    const Eigen::Matrix<double, 3, 9> hp = m.H * P_pred;
    const Mat3 innovation_cov = hp * m.H.transpose() + m.R;
    Eigen::JacobiSVD<Mat3> svd(innovation_cov);
    const auto& sv = svd.singularValues();
    if (!(sv[2] > 1e-12 * sv[0]))
        throw SingularInnovation("innovation covariance is singular");
    Eigen::LLT<Mat3> llt(innovation_cov);
    if (llt.info() != Eigen::Success)
        throw SingularInnovation("innovation covariance is not positive definite");

    // S = L L'; M = P H' L^-T, so K = M L^-1 and P - K H P = P - M M'.
    const Mat3 l = llt.matrixL();
    const Mat93 mfac =
        l.triangularView<Eigen::Lower>()
            .solve(Eigen::Matrix<double, 3, 9>(hp))
            .transpose();
    const Mat93 gain =
        l.transpose().triangularView<Eigen::Upper>().solve(mfac.transpose())
            .transpose();

    Corrected out;
    out.gain = gain;
    out.state = s_pred + gain * (y - m.H * s_pred);
    Covariance9 cov = P_pred - mfac * mfac.transpose();
    out.cov = 0.5 * (cov + cov.transpose()).eval();
    return out;
}

}  // namespace swarmtrack
