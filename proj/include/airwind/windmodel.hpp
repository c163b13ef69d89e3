#pragma once

#include "airwind/frames.hpp"

#include <optional>
#include <string_view>

namespace airwind {

inline constexpr double kDefaultScaleFactorFloor = 0.05;

/// Estimated quantity shared by every estimator: horizontal wind and the
/// Pitot scale factor.
struct WindState {
    double v_nw = 0.0;
    double v_ew = 0.0;
    double c_f = 1.0;

    Vec3 vec() const { return {v_nw, v_ew, c_f}; }
    static WindState from_vec(const Vec3& x) { return {x(0), x(1), x(2)}; }
};

/// One synchronized snapshot fed to the estimators at the estimator rate.
struct MeasurementFrame {
    double v_pitot = 0.0;
    double v_n = 0.0;
    double v_e = 0.0;
    double v_d = 0.0;
    EulerAttitude att;
};

/// Measurement sets: z1 only, z1..z3, or z1..z3 plus the network output.
enum class MeasurementVariant { Cho2011, ThreeEq, Hybrid };

int measurement_dim(MeasurementVariant variant);
std::string_view variant_name(MeasurementVariant variant);
/// Accepts "cho2011", "ekf"/"threeeq", "hybrid" (case-insensitive).
MeasurementVariant parse_variant(std::string_view name);

/// Predicted measurement h(chi). For Hybrid the appended rows are chi itself;
/// nn_out is only required to be present.
/// Throws std::domain_error if c_f is below the floor.
Eigen::VectorXd observe(const WindState& chi, const MeasurementFrame& frame,
                        MeasurementVariant variant,
                        const std::optional<WindState>& nn_out = std::nullopt,
                        double cf_floor = kDefaultScaleFactorFloor);

/// Analytic d h / d chi, dim(z) x 3.
Eigen::MatrixXd jacobian(const WindState& chi, const MeasurementFrame& frame,
                         MeasurementVariant variant,
                         double cf_floor = kDefaultScaleFactorFloor);

/// Measured vector z = [V_pitot^2, V_N, V_E (, nn_out)] for the variant.
Eigen::VectorXd measurement_vector(const MeasurementFrame& frame, MeasurementVariant variant,
                                   const std::optional<WindState>& nn_out = std::nullopt);

/// Random-walk transition: identity.
Mat3 process_model();

} // namespace airwind
