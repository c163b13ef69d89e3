#pragma once

#include <Eigen/Dense>

namespace airwind {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Roll, pitch, yaw (rad). Pitch must stay inside (-pi/2, pi/2).
struct EulerAttitude {
    double phi = 0.0;
    double theta = 0.0;
    double psi = 0.0;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Throws std::domain_error on gimbal lock or non-finite angles.
void check_attitude(const EulerAttitude& att);

/// Direction cosine matrix taking body-frame vectors to NED.
Mat3 rotation_body_to_ned(const EulerAttitude& att);

/// Matrix mapping body angular rates (p, q, r) to Euler angle rates.
Mat3 euler_rate_matrix(const EulerAttitude& att);

} // namespace airwind
