#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Eigenvalues>
#include <cmath>
#include <quadmath.h>

#include "doctest.h"
#include "swarmtrack/motion.hpp"
#include "swarmtrack/rng.hpp"

using namespace swarmtrack;

namespace {

// ---------------------------------------------------------------------
// Quad-precision oracle: the closed forms evaluated verbatim in
// __float128, with no series switching (independent of the library's
// evaluation strategy; 113-bit mantissas absorb the cancellation).
// ---------------------------------------------------------------------
struct AxisOracle {
    double g[3][3];
    double u[3];
    double q[3][3];  // Qi = 2 alpha sigma^2 [q_jk], before the prefactor
};

AxisOracle axis_oracle(double alpha_d, double dt_d) {
    const __float128 a = alpha_d;
    const __float128 t = dt_d;
    const __float128 x = a * t;
    const __float128 e1 = expq(-x);
    const __float128 e2 = expq(-2.0q * x);
    const __float128 one = 1.0q;

    AxisOracle o;
    o.g[0][0] = 1.0;
    o.g[0][1] = dt_d;
    o.g[0][2] = static_cast<double>((-one + x + e1) / (a * a));
    o.g[1][0] = 0.0;
    o.g[1][1] = 1.0;
    o.g[1][2] = static_cast<double>((one - e1) / a);
    o.g[2][0] = 0.0;
    o.g[2][1] = 0.0;
    o.g[2][2] = static_cast<double>(e1);

    o.u[0] = static_cast<double>(
        (-x + x * x / 2.0q + one - e1) / (a * a));
    o.u[1] = static_cast<double>((x - one + e1) / a);
    o.u[2] = static_cast<double>(one - e1);

    const __float128 a2 = a * a;
    const __float128 a3 = a2 * a;
    const __float128 a4 = a2 * a2;
    const __float128 a5 = a4 * a;
    const __float128 q11 =
        (one - e2 + 2.0q * x + (2.0q / 3.0q) * x * x * x - 2.0q * x * x -
         4.0q * x * e1) /
        (2.0q * a5);
    const __float128 q12 =
        (e2 + one - 2.0q * e1 + 2.0q * x * e1 - 2.0q * x + x * x) /
        (2.0q * a4);
    const __float128 q13 = (one - e2 - 2.0q * x * e1) / (2.0q * a3);
    const __float128 q22 = (4.0q * e1 - 3.0q - e2 + 2.0q * x) / (2.0q * a3);
    const __float128 q23 = (e2 + one - 2.0q * e1) / (2.0q * a2);
    const __float128 q33 = (one - e2) / (2.0q * a);
    o.q[0][0] = static_cast<double>(q11);
    o.q[0][1] = o.q[1][0] = static_cast<double>(q12);
    o.q[0][2] = o.q[2][0] = static_cast<double>(q13);
    o.q[1][1] = static_cast<double>(q22);
    o.q[1][2] = o.q[2][1] = static_cast<double>(q23);
    o.q[2][2] = static_cast<double>(q33);
    return o;
}

double sigma2_oracle(double a_max, double a_bar) {
    const __float128 pi = M_PIq;
    const __float128 factor = (4.0q - pi) / pi;
    const __float128 dev = a_bar >= 0.0
                               ? __float128(a_max) - __float128(a_bar)
                               : -__float128(a_max) - __float128(a_bar);
    return static_cast<double>(factor * dev * dev);
}

void check_rel(double actual, double expected, double tol,
               double abs_floor = 1e-300) {
    const double denom = std::max(std::abs(expected), abs_floor);
    CHECK(std::abs(actual - expected) <= tol * denom);
}

CsmParams params_of(double alpha, double a_max, double dt) {
    CsmParams p;
    p.alpha = {alpha, alpha, alpha};
    p.a_max = {a_max, a_max, a_max};
    p.dt = dt;
    return p;
}

Covariance9 random_psd9(Rng& rng, double scale) {
    Mat9 a;
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) a(r, c) = rng.uniform(-scale, scale);
    Covariance9 p = a * a.transpose();
    return 0.5 * (p + p.transpose()).eval();
}

}  // namespace

TEST_CASE("predict_cv: zero velocity is a fixed point") {
    StateCV s;
    s << 1.0, 0.0, -2.0, 0.0, 3.0, 0.0;
    CHECK((predict_cv(s, 0.5) - s).norm() == 0.0);
}

TEST_CASE("predict_cv: unit velocity moves position by dt") {
    StateCV s;
    s << 0.0, 1.0, 0.0, 0.0, 0.0, 0.0;
    const StateCV out = predict_cv(s, 0.1);
    StateCV expect;
    expect << 0.1, 1.0, 0.0, 0.0, 0.0, 0.0;
    CHECK((out - expect).norm() <= 1e-15);
}

TEST_CASE("predict_cv: equals the block transition matrix product") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        StateCV s;
        for (int k = 0; k < 6; ++k) s[k] = rng.uniform(-10.0, 10.0);
        const double dt = rng.uniform(0.01, 1.0);
        Mat6 f = Mat6::Identity();
        for (int axis = 0; axis < 3; ++axis) f(2 * axis, 2 * axis + 1) = dt;
        const StateCV expect = f * s;
        CHECK((predict_cv(s, dt) - expect).norm() <= 1e-12 * expect.norm());
    }
}

TEST_CASE("csm_transition: dt -> 0 limit gives identity and zero control") {
    const CsmTransition t = csm_transition(params_of(5.0, 5.0, 1e-6));
    CHECK((t.G - Mat9::Identity()).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(t.U.cwiseAbs().maxCoeff() <= 1e-5);
    // The acceleration-decay entry is within 1e-8 of 1 at alpha*dt = 5e-6.
    CHECK(std::abs(t.G(2, 2) - 1.0) <= 1e-5);
    CHECK(std::abs(t.G(0, 2)) <= 1e-8);
    CHECK(std::abs(t.U(0, 0)) <= 1e-8);
}

TEST_CASE("csm_transition: acceleration decay entry at alpha=5, dt=0.1") {
    const CsmTransition t = csm_transition(params_of(5.0, 5.0, 0.1));
    CHECK(t.G(2, 2) == doctest::Approx(0.60653065971263342).epsilon(1e-12));
}

TEST_CASE("csm_transition: alpha*dt -> 0 matches the series-expansion oracle "
          "and approaches the constant-acceleration form") {
    const double alpha = 1e-4;
    const double dt = 0.1;
    const double x = alpha * dt;
    const CsmTransition t = csm_transition(params_of(alpha, 1.0, dt));

    // Series oracle: three Taylor terms per entry (truncation ~x^3 scale).
    const double g02 =
        (x * x / 2.0 - x * x * x / 6.0 + x * x * x * x / 24.0) /
        (alpha * alpha);
    const double g12 = (x - x * x / 2.0 + x * x * x / 6.0) / alpha;
    const double g22 = 1.0 - x + x * x / 2.0 - x * x * x / 6.0;
    CHECK(std::abs(t.G(0, 2) - g02) <= 1e-6);
    CHECK(std::abs(t.G(1, 2) - g12) <= 1e-6);
    CHECK(std::abs(t.G(2, 2) - g22) <= 1e-6);
    const double u0 =
        (x * x * x / 6.0 - x * x * x * x / 24.0) / (alpha * alpha);
    const double u1 = (x * x / 2.0 - x * x * x / 6.0) / alpha;
    const double u2 = x - x * x / 2.0 + x * x * x / 6.0;
    CHECK(std::abs(t.U(0, 0) - u0) <= 1e-6);
    CHECK(std::abs(t.U(1, 0) - u1) <= 1e-6);
    CHECK(std::abs(t.U(2, 0) - u2) <= 1e-6);

    // Constant-acceleration limit, allowing the first-order alpha*dt terms.
    CHECK(std::abs(t.G(0, 2) - dt * dt / 2.0) <= dt * dt * x);
    CHECK(std::abs(t.G(1, 2) - dt) <= dt * x);
    CHECK(std::abs(t.G(2, 2) - 1.0) <= 2.0 * x);
}

TEST_CASE("csm_transition and csm_process_noise: quad-precision oracle grid") {
    Rng rng(2024);
    const double a_max = 5.0;
    for (int trial = 0; trial < 400; ++trial) {
        const double alpha = rng.uniform(0.1, 10.0);
        const double dt = rng.uniform(0.001, 1.0);
        const double abar = rng.uniform(-a_max, a_max);
        const CsmParams p = params_of(alpha, a_max, dt);
        const AxisOracle oracle = axis_oracle(alpha, dt);

        const CsmTransition t = csm_transition(p);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                check_rel(t.G(r, c), oracle.g[r][c], 1e-9);
        for (int r = 0; r < 3; ++r) check_rel(t.U(r, 0), oracle.u[r], 1e-9);

        MeanAcceleration a;
        a.a_bar = Vec3(abar, abar, abar);
        const Covariance9 q = csm_process_noise(p, a);
        const double prefactor = 2.0 * alpha * sigma2_oracle(a_max, abar);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                check_rel(q(r, c), prefactor * oracle.q[r][c], 1e-9, 1e-30);

        // Exact symmetry and block structure.
        CHECK((q - q.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(q.block<3, 3>(0, 3).cwiseAbs().maxCoeff() == 0.0);

        // PSD within tolerance.
        Eigen::SelfAdjointEigenSolver<Mat9> eig(q);
        CHECK(eig.eigenvalues()[0] >=
              -1e-9 * std::max(1.0, eig.eigenvalues()[8]));
    }
}

TEST_CASE("csm_process_noise: a_bar at the acceleration ceiling kills Q") {
    CsmParams p = params_of(5.0, 5.0, 0.1);
    MeanAcceleration a;
    a.a_bar = Vec3(5.0, 5.0, 5.0);
    CHECK(csm_process_noise(p, a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csm_process_noise: zero mean acceleration variance") {
    // sigma^2 = (4 - pi)/pi * a_max^2 for a_bar = 0; probe via the q33
    // entry where the shape factor is (1 - e^{-2x}) / (2 alpha).
    const double alpha = 5.0, dt = 0.1, a_max = 3.0;
    CsmParams p = params_of(alpha, a_max, dt);
    const Covariance9 q = csm_process_noise(p, MeanAcceleration{});
    const double sigma2 = (4.0 - M_PI) / M_PI * a_max * a_max;
    const double q33 = -std::expm1(-2.0 * alpha * dt) / (2.0 * alpha);
    CHECK(q(2, 2) ==
          doctest::Approx(2.0 * alpha * sigma2 * q33).epsilon(1e-12));
}

TEST_CASE("csm_process_noise: per-axis parameters act on their own blocks") {
    CsmParams p;
    p.alpha = {1.0, 5.0, 10.0};
    p.a_max = {2.0, 3.0, 4.0};
    p.dt = 0.05;
    const Covariance9 q = csm_process_noise(p, MeanAcceleration{});
    for (int axis = 0; axis < 3; ++axis) {
        const AxisOracle oracle = axis_oracle(p.alpha[axis], p.dt);
        const double prefactor =
            2.0 * p.alpha[axis] * sigma2_oracle(p.a_max[axis], 0.0);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                check_rel(q(3 * axis + r, 3 * axis + c),
                          prefactor * oracle.q[r][c], 1e-9, 1e-30);
    }
}

TEST_CASE("predict_csm: stationary state with zero a_bar keeps position") {
    StateCSM s = StateCSM::Zero();
    s[0] = 2.0;
    s[3] = -1.0;
    s[6] = 4.0;
    const Predicted out = predict_csm(s, Covariance9::Zero(),
                                      params_of(5.0, 5.0, 0.1),
                                      MeanAcceleration{});
    CHECK(std::abs(out.state[0] - 2.0) <= 1e-12);
    CHECK(std::abs(out.state[3] + 1.0) <= 1e-12);
    CHECK(std::abs(out.state[6] - 4.0) <= 1e-12);
}

TEST_CASE("predict_csm: zero input covariance still injects process noise") {
    const CsmParams p = params_of(5.0, 5.0, 0.1);
    const Predicted out = predict_csm(StateCSM::Zero(), Covariance9::Zero(), p,
                                      MeanAcceleration{});
    const Covariance9 q = csm_process_noise(p, MeanAcceleration{});
    CHECK((out.cov - q).cwiseAbs().maxCoeff() <= 1e-15 * q.cwiseAbs().maxCoeff());
    CHECK(out.cov.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("predict_csm: matches the explicit matrix-algebra oracle") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        StateCSM s;
        for (int k = 0; k < 9; ++k) s[k] = rng.uniform(-5.0, 5.0);
        const Covariance9 p_in = random_psd9(rng, 2.0);
        const CsmParams p = params_of(rng.uniform(0.5, 8.0), 4.0,
                                      rng.uniform(0.01, 0.5));
        MeanAcceleration a;
        for (int k = 0; k < 3; ++k) a.a_bar[k] = rng.uniform(-4.0, 4.0);

        const Predicted out = predict_csm(s, p_in, p, a);
        const CsmTransition t = csm_transition(p);
        const StateCSM expect_state = t.G * s + t.U * a.a_bar;
        Covariance9 expect_cov =
            t.G * p_in * t.G.transpose() + csm_process_noise(p, a);
        expect_cov = 0.5 * (expect_cov + expect_cov.transpose()).eval();
        CHECK((out.state - expect_state).norm() <= 1e-9 * expect_state.norm());
        CHECK((out.cov - expect_cov).cwiseAbs().maxCoeff() <=
              1e-9 * expect_cov.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("predict_csm: preserves covariance invariants on random input") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Covariance9 p_in = random_psd9(rng, 3.0);
        const CsmParams p = params_of(rng.uniform(0.1, 10.0), 5.0,
                                      rng.uniform(0.001, 1.0));
        MeanAcceleration a;
        for (int k = 0; k < 3; ++k) a.a_bar[k] = rng.uniform(-5.0, 5.0);
        const Predicted out = predict_csm(StateCSM::Zero(), p_in, p, a);
        CHECK((out.cov - out.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Mat9> eig(out.cov);
        CHECK(eig.eigenvalues()[0] >=
              -1e-9 * std::max(1.0, eig.eigenvalues()[8]));
    }
}

TEST_CASE("CV/CSM consistency: tiny alpha*dt reduces CSM to CV prediction") {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        StateCV cv;
        for (int k = 0; k < 6; ++k) cv[k] = rng.uniform(-10.0, 10.0);
        const double dt = rng.uniform(0.01, 0.1);
        const double alpha = 1e-4 / dt;  // alpha*dt = 1e-4
        const StateCSM s = csm_from_cv(cv);
        const Predicted out = predict_csm(s, Covariance9::Zero(),
                                          params_of(alpha, 1.0, dt),
                                          MeanAcceleration{});
        const StateCV expect = predict_cv(cv, dt);
        const StateCV got = cv_from_csm(out.state);
        CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("kalman_correct: zero innovation keeps the state, shrinks variance") {
    Rng rng(101);
    const Covariance9 p_pred = random_psd9(rng, 1.0);
    StateCSM s;
    for (int k = 0; k < 9; ++k) s[k] = rng.uniform(-5.0, 5.0);
    const ObservationModel m =
        ObservationModel::position(0.01 * Mat3::Identity());
    const Vec3 y(s[0], s[3], s[6]);
    const Corrected out = kalman_correct(s, p_pred, y, m);
    CHECK((out.state - s).norm() <= 1e-10 * std::max(1.0, s.norm()));
    const double trace_pred =
        p_pred(0, 0) + p_pred(3, 3) + p_pred(6, 6);
    const double trace_corr =
        out.cov(0, 0) + out.cov(3, 3) + out.cov(6, 6);
    CHECK(trace_corr < trace_pred);
}

TEST_CASE("kalman_correct: near-perfect measurement pins the position") {
    Covariance9 p_pred = Covariance9::Zero();
    for (int k = 0; k < 9; ++k) p_pred(k, k) = 0.5 + 0.1 * k;
    StateCSM s;
    s << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const ObservationModel m =
        ObservationModel::position(1e-12 * Mat3::Identity());
    const Vec3 y(2.0, 3.0, 5.0);
    const Corrected out = kalman_correct(s, p_pred, y, m);
    CHECK(std::abs(out.state[0] - y[0]) <= 1e-6);
    CHECK(std::abs(out.state[3] - y[1]) <= 1e-6);
    CHECK(std::abs(out.state[6] - y[2]) <= 1e-6);
}

TEST_CASE("kalman_correct: corrected position lies between prediction and "
          "observation for diagonal covariance") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        Covariance9 p_pred = Covariance9::Zero();
        for (int k = 0; k < 9; ++k)
            p_pred(k, k) = rng.uniform(0.01, 2.0);
        StateCSM s;
        for (int k = 0; k < 9; ++k) s[k] = rng.uniform(-5.0, 5.0);
        Vec3 y;
        for (int k = 0; k < 3; ++k) y[k] = rng.uniform(-5.0, 5.0);
        const ObservationModel m = ObservationModel::position(
            rng.uniform(0.001, 1.0) * Mat3::Identity());
        const Corrected out = kalman_correct(s, p_pred, y, m);
        const int pos_idx[3] = {0, 3, 6};
        for (int k = 0; k < 3; ++k) {
            const double lo = std::min(s[pos_idx[k]], y[k]) - 1e-12;
            const double hi = std::max(s[pos_idx[k]], y[k]) + 1e-12;
            CHECK(out.state[pos_idx[k]] >= lo);
            CHECK(out.state[pos_idx[k]] <= hi);
        }
    }
}

TEST_CASE("kalman_correct: Joseph-form oracle on random PSD instances") {
    Rng rng(2025);
    for (int trial = 0; trial < 1000; ++trial) {
        const Covariance9 p_pred = random_psd9(rng, 1.5);
        StateCSM s;
        for (int k = 0; k < 9; ++k) s[k] = rng.uniform(-5.0, 5.0);
        Vec3 y;
        for (int k = 0; k < 3; ++k) y[k] = rng.uniform(-5.0, 5.0);
        Mat3 r_noise_root;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                r_noise_root(a, b) = rng.uniform(-0.3, 0.3);
        const Mat3 r_noise = r_noise_root * r_noise_root.transpose() +
                             0.01 * Mat3::Identity();
        const ObservationModel m = ObservationModel::position(r_noise);

        const Corrected out = kalman_correct(s, p_pred, y, m);

        // Independent Joseph-form computation with its own gain.
        const Mat3 innovation =
            m.H * p_pred * m.H.transpose() + m.R;
        const Mat93 gain = p_pred * m.H.transpose() * innovation.inverse();
        const Mat9 i_kh = Mat9::Identity() - gain * m.H;
        const Covariance9 joseph = i_kh * p_pred * i_kh.transpose() +
                                   gain * m.R * gain.transpose();
        const StateCSM state = s + gain * (y - m.H * s);

        const double scale = std::max(1.0, joseph.cwiseAbs().maxCoeff());
        CHECK((out.cov - joseph).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        CHECK((out.state - state).norm() <= 1e-8 * std::max(1.0, state.norm()));

        // Position-block trace never increases (exact in fp by design).
        const double trace_pred = p_pred(0, 0) + p_pred(3, 3) + p_pred(6, 6);
        const double trace_corr = out.cov(0, 0) + out.cov(3, 3) + out.cov(6, 6);
        CHECK(trace_corr <= trace_pred);
    }
}

TEST_CASE("kalman_correct: singular innovation is rejected") {
    const Covariance9 p_pred = Covariance9::Zero();
    ObservationModel m = ObservationModel::position(Mat3::Zero());
    StateCSM s = StateCSM::Zero();
    CHECK_THROWS_AS(kalman_correct(s, p_pred, Vec3(1, 2, 3), m),
                    SingularInnovation);
}

TEST_CASE("MeanAcceleration::clamped keeps |a_bar| within a_max") {
    const CsmParams p = params_of(5.0, 2.0, 0.1);
    const MeanAcceleration a =
        MeanAcceleration::clamped(Vec3(5.0, -3.0, 0.5), p);
    CHECK(a.a_bar[0] == 2.0);
    CHECK(a.a_bar[1] == -2.0);
    CHECK(a.a_bar[2] == 0.5);
}

TEST_CASE("state conversions round-trip") {
    Rng rng(3);
    StateCV cv;
    for (int k = 0; k < 6; ++k) cv[k] = rng.uniform(-5.0, 5.0);
    const StateCSM s = csm_from_cv(cv);
    CHECK(acceleration_of(s).norm() == 0.0);
    CHECK((cv_from_csm(s) - cv).norm() == 0.0);
}
