#include "airwind/windmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace airwind {

namespace {

void check_scale_factor(const WindState& chi, double cf_floor)
{
    if (!(chi.c_f >= cf_floor)) {
        throw std::domain_error("scale factor c_f=" + std::to_string(chi.c_f) +
                                " below floor " + std::to_string(cf_floor));
    }
}

void check_hybrid_input(MeasurementVariant variant, const std::optional<WindState>& nn_out)
{
    if (variant == MeasurementVariant::Hybrid && !nn_out) {
        throw std::invalid_argument("hybrid measurement requires a network estimate");
    }
}

} // namespace

int measurement_dim(MeasurementVariant variant)
{
    switch (variant) {
    case MeasurementVariant::Cho2011:
        return 1;
    case MeasurementVariant::ThreeEq:
        return 3;
    case MeasurementVariant::Hybrid:
        return 6;
    }
    throw std::invalid_argument("unknown measurement variant");
}

std::string_view variant_name(MeasurementVariant variant)
{
    switch (variant) {
    case MeasurementVariant::Cho2011:
        return "cho2011";
    case MeasurementVariant::ThreeEq:
        return "ekf";
    case MeasurementVariant::Hybrid:
        return "hybrid";
    }
    return "unknown";
}

MeasurementVariant parse_variant(std::string_view name)
{
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "cho2011" || s == "cho") {
        return MeasurementVariant::Cho2011;
    }
    if (s == "ekf" || s == "threeeq") {
        return MeasurementVariant::ThreeEq;
    }
    if (s == "hybrid") {
        return MeasurementVariant::Hybrid;
    }
    throw std::invalid_argument("unknown measurement variant '" + std::string(name) + "'");
}

Eigen::VectorXd observe(const WindState& chi, const MeasurementFrame& frame,
                        MeasurementVariant variant, const std::optional<WindState>& nn_out,
                        double cf_floor)
{
    check_scale_factor(chi, cf_floor);
    check_hybrid_input(variant, nn_out);

    Eigen::VectorXd h(measurement_dim(variant));
    const double dn = frame.v_n - chi.v_nw;
    const double de = frame.v_e - chi.v_ew;
    h(0) = chi.c_f * chi.c_f * (dn * dn + de * de + frame.v_d * frame.v_d);
    if (variant == MeasurementVariant::Cho2011) {
        return h;
    }

    const double v_t = frame.v_pitot / chi.c_f;
    const double ct = std::cos(frame.att.theta);
    h(1) = v_t * std::cos(frame.att.psi) * ct + chi.v_nw;
    h(2) = v_t * std::sin(frame.att.psi) * ct + chi.v_ew;
    if (variant == MeasurementVariant::Hybrid) {
        h.tail<3>() = chi.vec();
    }
    return h;
}

Eigen::MatrixXd jacobian(const WindState& chi, const MeasurementFrame& frame,
                         MeasurementVariant variant, double cf_floor)
{
    check_scale_factor(chi, cf_floor);

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(measurement_dim(variant), 3);
    const double dn = frame.v_n - chi.v_nw;
    const double de = frame.v_e - chi.v_ew;
    const double cf2 = chi.c_f * chi.c_f;
    H(0, 0) = -2.0 * cf2 * dn;
    H(0, 1) = -2.0 * cf2 * de;
    H(0, 2) = 2.0 * chi.c_f * (dn * dn + de * de + frame.v_d * frame.v_d);
    if (variant == MeasurementVariant::Cho2011) {
        return H;
    }

    const double ct = std::cos(frame.att.theta);
    const double k = -frame.v_pitot / cf2;
    H(1, 0) = 1.0;
    H(1, 2) = k * std::cos(frame.att.psi) * ct;
    H(2, 1) = 1.0;
    H(2, 2) = k * std::sin(frame.att.psi) * ct;
    if (variant == MeasurementVariant::Hybrid) {
        H.bottomRows<3>().setIdentity();
    }
    return H;
}

Eigen::VectorXd measurement_vector(const MeasurementFrame& frame, MeasurementVariant variant,
                                   const std::optional<WindState>& nn_out)
{
    check_hybrid_input(variant, nn_out);
    Eigen::VectorXd z(measurement_dim(variant));
    z(0) = frame.v_pitot * frame.v_pitot;
    if (variant != MeasurementVariant::Cho2011) {
        z(1) = frame.v_n;
        z(2) = frame.v_e;
    }
    if (variant == MeasurementVariant::Hybrid) {
        z.tail<3>() = nn_out->vec();
    }
    return z;
}

Mat3 process_model() { return Mat3::Identity(); }

} // namespace airwind
