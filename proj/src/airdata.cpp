#include "airwind/airdata.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace airwind {

namespace {

void check_eta(double eta)
{
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("Pitot calibration factor eta must be positive");
    }
}

} // namespace

Vec3 airspeed(const Vec3& v_g, const Vec3& v_w_body) { return v_g - v_w_body; }

AirdataSample airdata_from_airspeed(const Vec3& v_a)
{
    AirdataSample s;
    s.v_a = v_a;
    s.v_t = v_a.norm();
    if (s.v_t > 0.0) {
        s.beta = std::asin(std::clamp(v_a.y() / s.v_t, -1.0, 1.0));
        // atan2 keeps the quadrant for backward flow; equals atan(w/u) for u > 0.
        s.alpha = std::atan2(v_a.z(), v_a.x());
    }
    return s;
}

Vec3 airspeed_from_airdata(double v_t, double alpha, double beta)
{
    return {v_t * std::cos(alpha) * std::cos(beta), v_t * std::sin(beta),
            v_t * std::sin(alpha) * std::cos(beta)};
}

double pitot_pressure(double u_a, const PitotModel& model)
{
    check_eta(model.eta);
    return model.eta * u_a * u_a;
}

double pitot_speed(double delta_p)
{
    if (delta_p < 0.0 || std::isnan(delta_p)) {
        throw std::invalid_argument("negative dynamic pressure");
    }
    return std::sqrt(delta_p);
}

double scale_factor(double eta, double alpha, double beta)
{
    check_eta(eta);
    return std::sqrt(eta) * std::cos(alpha) * std::cos(beta);
}

} // namespace airwind
