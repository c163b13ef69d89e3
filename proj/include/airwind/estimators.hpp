#pragma once

#include "airwind/windmodel.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace airwind {

/// Filter tuning for one measurement variant.
struct EstimatorConfig {
    MeasurementVariant variant = MeasurementVariant::ThreeEq;
    Mat3 q = Mat3::Zero();
    Eigen::MatrixXd r;
    Mat3 p0 = Mat3::Zero();
    WindState x0{0.0, 0.0, 1.0};
    double cf_floor = kDefaultScaleFactorFloor;

    /// Throws std::invalid_argument when shapes or definiteness are wrong.
    void validate() const;
};

/// Tuning used for the Cho2011 / EKF / Hybrid comparison, with x0 = (0, 0, 1)
/// and P0 = diag(4, 4, 0.25).
EstimatorConfig default_config(MeasurementVariant variant);

/// Per-update diagnostics.
struct FilterHealth {
    Eigen::VectorXd innovation;
    Eigen::MatrixXd innovation_cov;
    double nis = 0.0; ///< normalized innovation squared
    bool update_skipped = false;
    bool cf_clamped = false;
};

struct FilterEstimate {
    WindState state;
    Mat3 cov = Mat3::Zero();
};

FilterEstimate predict(const FilterEstimate& prior, const EstimatorConfig& config);

struct UpdateResult {
    FilterEstimate estimate;
    FilterHealth health;
};

/// One EKF measurement update. A singular or non-finite innovation covariance
/// leaves the prior untouched and sets health.update_skipped.
UpdateResult update(const FilterEstimate& predicted, const Eigen::VectorXd& z,
                    const MeasurementFrame& frame, const EstimatorConfig& config,
                    const std::optional<WindState>& nn_out = std::nullopt);

/// Stateful wrapper running predict/update at the estimator rate.
class WindEkf {
public:
    explicit WindEkf(EstimatorConfig config);

    void reset();
    void predict();
    const FilterHealth& update(const MeasurementFrame& frame,
                               const std::optional<WindState>& nn_out = std::nullopt);
    /// predict() followed by update().
    const WindState& step(const MeasurementFrame& frame,
                          const std::optional<WindState>& nn_out = std::nullopt);

    const WindState& state() const { return est_.state; }
    const Mat3& covariance() const { return est_.cov; }
    const FilterHealth& health() const { return health_; }
    const EstimatorConfig& config() const { return config_; }

private:
    EstimatorConfig config_;
    FilterEstimate est_;
    FilterHealth health_;
};

// Plain-text configuration, one "key = value" per line, '#' comments:
//   variant  = cho2011 | ekf | hybrid
//   q        = <3 diagonal entries>
//   r        = <dim(z) diagonal entries>
//   p0       = <3 diagonal entries>
//   x0       = <v_nw v_ew c_f>
//   cf_floor = <value>
// Keys other than variant are optional and default to default_config(variant).
EstimatorConfig parse_config(std::istream& in);
EstimatorConfig load_config(const std::string& path);
std::string format_config(const EstimatorConfig& config);

} // namespace airwind
