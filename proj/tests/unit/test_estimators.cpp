#include "airwind/estimators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace airwind;

namespace {

// Noiseless frame for a given truth, heading and airspeed.
MeasurementFrame frame_for(const WindState& truth, double psi, double airspeed = 7.0)
{
    MeasurementFrame f;
    f.att = {0, 0, psi};
    f.v_pitot = truth.c_f * airspeed;
    f.v_n = airspeed * std::cos(psi) + truth.v_nw;
    f.v_e = airspeed * std::sin(psi) + truth.v_ew;
    return f;
}

EstimatorConfig simple_config(MeasurementVariant v) { return default_config(v); }

} // namespace

TEST(Estimators, DefaultCovariances)
{
    const auto cho = default_config(MeasurementVariant::Cho2011);
    ASSERT_EQ(cho.r.rows(), 1);
    EXPECT_DOUBLE_EQ(cho.r(0, 0), 163.84);
    EXPECT_EQ(cho.q.diagonal(), Vec3(1e-3, 1e-4, 5e-6));

    const auto ekf = default_config(MeasurementVariant::ThreeEq);
    EXPECT_EQ(ekf.r, Eigen::MatrixXd(Eigen::Vector3d::Constant(40.96).asDiagonal()));
    EXPECT_DOUBLE_EQ(ekf.q(2, 2), 5e-7);

    const auto hyb = default_config(MeasurementVariant::Hybrid);
    ASSERT_EQ(hyb.r.rows(), 6);
    EXPECT_EQ(hyb.r, Eigen::MatrixXd(Eigen::VectorXd::Constant(6, 10.24).asDiagonal()));
    EXPECT_EQ(hyb.q.diagonal(), Vec3(1e-4, 1e-4, 5e-7));

    for (const auto& c : {cho, ekf, hyb}) {
        EXPECT_EQ(c.x0.vec(), Vec3(0, 0, 1));
        EXPECT_EQ(c.p0.diagonal(), Vec3(4, 4, 0.25));
        EXPECT_NO_THROW(c.validate());
    }
}

TEST(Estimators, PredictAddsQ)
{
    EstimatorConfig c = simple_config(MeasurementVariant::ThreeEq);
    c.q = 0.1 * Mat3::Identity();
    const FilterEstimate prior{{1, 2, 1}, Mat3::Identity()};
    const FilterEstimate p = predict(prior, c);
    EXPECT_EQ(p.state.vec(), Vec3(1, 2, 1));
    EXPECT_TRUE(p.cov.isApprox(1.1 * Mat3::Identity(), 1e-15));

    c.q.setZero();
    EXPECT_EQ(predict(prior, c).cov, prior.cov);
}

TEST(Estimators, RepeatedPredictClosedForm)
{
    EstimatorConfig c = simple_config(MeasurementVariant::ThreeEq);
    c.q = Vec3(0.25, 0.5, 0.125).asDiagonal();
    FilterEstimate e{c.x0, c.p0};
    for (int i = 0; i < 64; ++i) {
        e = predict(e, c);
    }
    EXPECT_EQ(e.cov, Mat3(c.p0 + 64.0 * c.q));
}

TEST(Estimators, ScalarKalmanGain)
{
    // Only c_f uncertain: the Cho2011 update reduces to a scalar filter.
    EstimatorConfig c = simple_config(MeasurementVariant::Cho2011);
    const double p = 0.3, r = c.r(0, 0);
    FilterEstimate prior{{0, 0, 1}, Mat3::Zero()};
    prior.cov(2, 2) = p;
    const MeasurementFrame f{7.7, 7.0, 0.0, 0.0, {0, 0, 0}};
    const Eigen::VectorXd z = measurement_vector(f, c.variant);
    const UpdateResult u = update(prior, z, f, c);
    const double h = 2 * 1.0 * 49.0;
    const double k = p * h / (h * h * p + r);
    EXPECT_NEAR(u.estimate.state.c_f, 1.0 + k * (7.7 * 7.7 - 49.0), 1e-12);
    EXPECT_NEAR(u.estimate.cov(2, 2), (1 - k * h) * p, 1e-12);
    EXPECT_NEAR(u.estimate.state.v_nw, 0.0, 0.0);
}

TEST(Estimators, InfiniteNoiseLimitLeavesPrior)
{
    EstimatorConfig c = simple_config(MeasurementVariant::ThreeEq);
    c.r *= 1e12;
    const FilterEstimate prior{{0.5, -0.5, 1.1}, c.p0};
    const MeasurementFrame f = frame_for({2, 1, 0.9}, 0.4);
    const UpdateResult u = update(prior, measurement_vector(f, c.variant), f, c);
    EXPECT_LT((u.estimate.state.vec() - prior.state.vec()).norm(), 1e-6);
}

TEST(Estimators, NoiselessHeadingSweepConverges)
{
    const WindState truth{1.5, -2.0, 0.93};
    for (auto v : {MeasurementVariant::ThreeEq, MeasurementVariant::Cho2011}) {
        WindEkf ekf(default_config(v));
        for (int i = 0; i < 2000; ++i) {
            const double psi = wrap_angle(2 * kPi * i / 200.0);
            ekf.step(frame_for(truth, psi));
        }
        EXPECT_LT((ekf.state().vec() - truth.vec()).norm(), 1e-6) << variant_name(v);
    }
}

TEST(Estimators, ShortSweepWithSmallMeasurementNoise)
{
    const WindState truth{1.5, -2.0, 0.93};
    EstimatorConfig c = default_config(MeasurementVariant::ThreeEq);
    c.r = Vec3(100.0, 1e-2, 1e-2).asDiagonal();
    WindEkf ekf(c);
    for (int i = 0; i < 200; ++i) {
        ekf.step(frame_for(truth, wrap_angle(2 * kPi * i / 200.0)));
    }
    EXPECT_LT((ekf.state().vec() - truth.vec()).norm(), 1e-3);
}

TEST(Estimators, CovarianceHealthUnderRandomSteps)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto v : {MeasurementVariant::Cho2011, MeasurementVariant::ThreeEq,
                   MeasurementVariant::Hybrid}) {
        WindEkf ekf(default_config(v));
        for (int i = 0; i < 5000; ++i) {
            const MeasurementFrame f{7 + u(rng), 7 * u(rng), 7 * u(rng), 0.2 * u(rng),
                                     {0.1 * u(rng), 0.1 * u(rng), kPi * u(rng)}};
            ekf.step(f, WindState{u(rng), u(rng), 1 + 0.1 * u(rng)});
            const Mat3& p = ekf.covariance();
            ASSERT_EQ(p, p.transpose());
            ASSERT_TRUE((p.diagonal().array() >= 0).all());
            ASSERT_TRUE(ekf.state().vec().allFinite());
            ASSERT_GE(ekf.state().c_f, ekf.config().cf_floor);
        }
    }
}

TEST(Estimators, RowOrderInvariance)
{
    EstimatorConfig c = default_config(MeasurementVariant::ThreeEq);
    c.r = Eigen::Vector3d(10.0, 20.0, 30.0).asDiagonal();
    const FilterEstimate prior{{0.3, 0.4, 1.05}, c.p0};
    const MeasurementFrame f = frame_for({1, 2, 0.95}, 0.8);
    const Eigen::VectorXd z = measurement_vector(f, c.variant);
    const UpdateResult base = update(prior, z, f, c);

    // Manual update with permuted rows must give the same posterior.
    Eigen::PermutationMatrix<3> perm;
    perm.indices() << 2, 0, 1;
    const Eigen::MatrixXd h = perm * jacobian(prior.state, f, c.variant);
    const Eigen::VectorXd y = perm * (z - observe(prior.state, f, c.variant));
    const Eigen::MatrixXd r = perm * c.r * perm.transpose();
    const Eigen::MatrixXd s = h * prior.cov * h.transpose() + r;
    const Eigen::MatrixXd k = prior.cov * h.transpose() * s.inverse();
    const Vec3 x = prior.state.vec() + k * y;
    EXPECT_LT((x - base.estimate.state.vec()).norm(), 1e-12);
}

TEST(Estimators, ScaleFactorClampedToFloor)
{
    EstimatorConfig c = default_config(MeasurementVariant::ThreeEq);
    c.p0 = Vec3(1e-6, 1e-6, 100.0).asDiagonal();
    c.r = Vec3(1e9, 1e-6, 1.0).asDiagonal();
    const MeasurementFrame f{7.0, 107.0, 0.0, 0.0, {0, 0, 0}};
    const UpdateResult u = update({c.x0, c.p0}, measurement_vector(f, c.variant), f, c);
    EXPECT_GE(u.estimate.state.c_f, c.cf_floor);
    EXPECT_FALSE(u.health.update_skipped);
    EXPECT_TRUE(u.health.cf_clamped);
}

TEST(Estimators, NonFiniteInnovationSkipsUpdate)
{
    const EstimatorConfig c = default_config(MeasurementVariant::ThreeEq);
    const FilterEstimate prior{c.x0, c.p0};
    MeasurementFrame f = frame_for({0, 0, 1}, 0.0);
    f.v_n = std::numeric_limits<double>::infinity();
    const UpdateResult u = update(prior, measurement_vector(f, c.variant), f, c);
    EXPECT_TRUE(u.health.update_skipped);
    EXPECT_EQ(u.estimate.state.vec(), prior.state.vec());
    EXPECT_EQ(u.estimate.cov, prior.cov);
}

TEST(Estimators, WrongMeasurementSizeRejected)
{
    const EstimatorConfig c = default_config(MeasurementVariant::ThreeEq);
    const MeasurementFrame f = frame_for({0, 0, 1}, 0.0);
    EXPECT_THROW(update({c.x0, c.p0}, Eigen::VectorXd::Zero(2), f, c), std::invalid_argument);
}

TEST(Estimators, ConfigValidation)
{
    EstimatorConfig c = default_config(MeasurementVariant::ThreeEq);
    c.r = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = default_config(MeasurementVariant::ThreeEq);
    c.q(0, 0) = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = default_config(MeasurementVariant::ThreeEq);
    c.r(1, 1) = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = default_config(MeasurementVariant::ThreeEq);
    c.x0.c_f = 0.0;
    EXPECT_THROW(WindEkf{c}, std::invalid_argument);
}

TEST(Estimators, ConfigTextRoundTrip)
{
    EstimatorConfig c = default_config(MeasurementVariant::Hybrid);
    c.r.diagonal().tail<3>() *= 1e9;
    c.x0 = {0.1, -0.2, 0.95};
    std::istringstream in(format_config(c));
    const EstimatorConfig back = parse_config(in);
    EXPECT_EQ(back.variant, c.variant);
    EXPECT_EQ(back.q, c.q);
    EXPECT_EQ(back.r, c.r);
    EXPECT_EQ(back.p0, c.p0);
    EXPECT_EQ(back.x0.vec(), c.x0.vec());
    EXPECT_EQ(back.cf_floor, c.cf_floor);
}

TEST(Estimators, ConfigParseErrors)
{
    const auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_config(in);
    };
    EXPECT_NO_THROW(parse("variant = ekf\n# comment\nq = 1e-4 1e-4 5e-7\n"));
    EXPECT_THROW(parse("q = 1 1 1\n"), std::invalid_argument);
    EXPECT_THROW(parse("variant = ekf\nr = 1 2\n"), std::invalid_argument);
    EXPECT_THROW(parse("variant = ekf\nfoo = 1\n"), std::invalid_argument);
    EXPECT_THROW(parse("variant = ekf\nq = 1 x 1\n"), std::invalid_argument);
    EXPECT_THROW(parse("variant = ekf\nnot a pair\n"), std::invalid_argument);
}
