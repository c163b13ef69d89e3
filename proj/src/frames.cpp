#include "airwind/frames.hpp"

#include <cmath>
#include <stdexcept>

namespace airwind {

double wrap_angle(double a)
{
    double r = std::remainder(a, 2.0 * kPi); // [-pi, pi]
    if (r <= -kPi) {
        r += 2.0 * kPi;
    }
    return r;
}

void check_attitude(const EulerAttitude& att)
{
    if (!std::isfinite(att.phi) || !std::isfinite(att.theta) || !std::isfinite(att.psi)) {
        throw std::domain_error("attitude has non-finite component");
    }
    if (std::abs(att.theta) >= kPi / 2.0) {
        throw std::domain_error("pitch at or beyond +/-pi/2 (gimbal lock)");
    }
}

Mat3 rotation_body_to_ned(const EulerAttitude& att)
{
    check_attitude(att);
    const double cf = std::cos(att.phi), sf = std::sin(att.phi);
    const double ct = std::cos(att.theta), st = std::sin(att.theta);
    const double cp = std::cos(att.psi), sp = std::sin(att.psi);

    // NED -> body; the body -> NED map is its transpose.
    Mat3 ned_to_body;
    ned_to_body << cp * ct, sp * ct, -st,
        cp * st * sf - sp * cf, sp * st * sf + cp * cf, ct * sf,
        cp * st * cf + sp * sf, sp * st * cf - cp * sf, ct * cf;
    return ned_to_body.transpose();
}

Mat3 euler_rate_matrix(const EulerAttitude& att)
{
    check_attitude(att);
    const double cf = std::cos(att.phi), sf = std::sin(att.phi);
    const double ct = std::cos(att.theta), tt = std::tan(att.theta);

    Mat3 m;
    m << 1.0, sf * tt, cf * tt,
        0.0, cf, -sf,
        0.0, sf / ct, cf / ct;
    return m;
}

} // namespace airwind
