#include "airwind/airdata.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace airwind;

TEST(Airdata, AirspeedIsGroundMinusWind)
{
    EXPECT_EQ(airspeed({7, 0, 0}, {0, 0, 0}), Vec3(7, 0, 0));
    EXPECT_EQ(airspeed({7, 0, 0}, {7, 0, 0}), Vec3(0, 0, 0));
    EXPECT_EQ(airspeed({5, 1, -1}, {2, -1, 0}), Vec3(3, 2, -1));
}

TEST(Airdata, AxialFlow)
{
    const AirdataSample s = airdata_from_airspeed({7, 0, 0});
    EXPECT_DOUBLE_EQ(s.v_t, 7.0);
    ASSERT_TRUE(s.alpha && s.beta);
    EXPECT_DOUBLE_EQ(*s.alpha, 0.0);
    EXPECT_DOUBLE_EQ(*s.beta, 0.0);
}

TEST(Airdata, FortyFiveDegreeAngleOfAttack)
{
    const AirdataSample s = airdata_from_airspeed({1, 0, 1});
    EXPECT_NEAR(s.v_t, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(*s.alpha, kPi / 4, 1e-15);
    EXPECT_NEAR(*s.beta, 0.0, 1e-15);
}

TEST(Airdata, GeneralFlowSatisfiesAxialIdentity)
{
    const AirdataSample s = airdata_from_airspeed({3, 2, -1});
    EXPECT_NEAR(s.v_t, std::sqrt(14.0), 1e-15);
    EXPECT_NEAR(*s.beta, std::asin(2 / std::sqrt(14.0)), 1e-15);
    EXPECT_NEAR(*s.alpha, std::atan(-1.0 / 3.0), 1e-15);
    EXPECT_NEAR(s.v_t * std::cos(*s.alpha) * std::cos(*s.beta), 3.0, 1e-12);
}

TEST(Airdata, ZeroAirspeedLeavesAnglesUndefined)
{
    const AirdataSample s = airdata_from_airspeed({0, 0, 0});
    EXPECT_EQ(s.v_t, 0.0);
    EXPECT_FALSE(s.alpha.has_value());
    EXPECT_FALSE(s.beta.has_value());
}

TEST(Airdata, PitotPressureAndSpeed)
{
    EXPECT_EQ(pitot_pressure(0.0, {1.0}), 0.0);
    EXPECT_DOUBLE_EQ(pitot_pressure(7.0, {1.0}), 49.0);
    EXPECT_NEAR(pitot_pressure(7.0, {0.81}), 39.69, 1e-12);
    EXPECT_DOUBLE_EQ(pitot_pressure(-7.0, {1.0}), 49.0);
    EXPECT_DOUBLE_EQ(pitot_speed(49.0), 7.0);
    EXPECT_EQ(pitot_speed(0.0), 0.0);
    EXPECT_NEAR(pitot_speed(39.69), 6.3, 1e-12);
    EXPECT_THROW(pitot_speed(-1e-9), std::invalid_argument);
    EXPECT_THROW(pitot_pressure(1.0, {0.0}), std::invalid_argument);
}

TEST(Airdata, ScaleFactor)
{
    EXPECT_DOUBLE_EQ(scale_factor(1.0, 0.0, 0.0), 1.0);
    EXPECT_NEAR(scale_factor(1.0, 0.0, kPi / 3), 0.5, 1e-15);
    EXPECT_NEAR(scale_factor(0.81, 0.1, 0.2), 0.9 * std::cos(0.1) * std::cos(0.2), 1e-15);
    EXPECT_NEAR(scale_factor(0.81, 0.1, 0.2), 0.87766, 1e-5);
}

TEST(Airdata, RoundTripAndPitotChainProperties)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ax(0.1, 12.0);
    std::uniform_real_distribution<double> lat(-4.0, 4.0);
    for (double eta : {0.81, 1.0, 1.21}) {
        for (int i = 0; i < 500; ++i) {
            const Vec3 v_a(ax(rng), lat(rng), lat(rng));
            const AirdataSample s = airdata_from_airspeed(v_a);
            EXPECT_LT((airspeed_from_airdata(s.v_t, *s.alpha, *s.beta) - v_a).norm(), 1e-10);

            const double v_pitot = pitot_speed(pitot_pressure(v_a.x(), {eta}));
            EXPECT_NEAR(v_pitot, std::sqrt(eta) * std::abs(v_a.x()), 1e-13);
            EXPECT_NEAR(s.v_t * scale_factor(eta, *s.alpha, *s.beta), v_pitot, 1e-10);
        }
    }
}
