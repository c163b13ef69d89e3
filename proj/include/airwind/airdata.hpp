#pragma once

#include "airwind/frames.hpp"

#include <optional>

namespace airwind {

/// Body-frame airspeed and the derived flow angles.
/// alpha and beta are empty when the airspeed vector is zero.
struct AirdataSample {
    Vec3 v_a = Vec3::Zero();
    double v_t = 0.0;
    std::optional<double> alpha;
    std::optional<double> beta;
};

/// One-dimensional Pitot probe: dP = eta * u_a^2.
struct PitotModel {
    double eta = 1.0;
};

/// Relative air velocity, v_g - v_w, both in body axes.
Vec3 airspeed(const Vec3& v_g, const Vec3& v_w_body);

AirdataSample airdata_from_airspeed(const Vec3& v_a);

/// Rebuilds the body airspeed from (v_t, alpha, beta).
Vec3 airspeed_from_airdata(double v_t, double alpha, double beta);

/// Dynamic pressure seen by the probe. Blind to the sign of u_a.
double pitot_pressure(double u_a, const PitotModel& model);

/// sqrt(dP); throws std::invalid_argument for dP < 0.
double pitot_speed(double delta_p);

/// Lumped factor sqrt(eta) cos(alpha) cos(beta), so that V_t = V_pitot / c_f.
double scale_factor(double eta, double alpha, double beta);

} // namespace airwind
