#pragma once

#include "airwind/estimators.hpp"
#include "airwind/neural.hpp"
#include "airwind/simkit.hpp"

#include <array>
#include <optional>
#include <vector>

namespace airwind {

/// First-order low-pass 1/(tau s + 1), discretized exactly for a zero-order
/// held input: y <- a y + (1 - a) z with a = exp(-ts / tau).
class LowPass {
public:
    explicit LowPass(double tau = 1.5, double ts = 0.0625);

    /// The first sample initializes the state (no start-up transient).
    double step(double z);
    void reset() { y_.reset(); }

    std::optional<double> value() const { return y_; }
    double coefficient() const { return a_; }
    double tau() const { return tau_; }
    double ts() const { return ts_; }

private:
    double tau_;
    double ts_;
    double a_;
    std::optional<double> y_;
};

struct SchedulerOptions {
    SensorRates rates;
    int estimator_hz = 16;
    double tau = 1.5;
    bool filter_ekf_inputs = false; ///< feed the low-passed frame to the EKFs too
};

/// What one estimator tick hands to the estimators.
struct TickFrames {
    Stamp stamp = 0;
    MeasurementFrame raw;      ///< latest held sample of every sensor
    MeasurementFrame filtered; ///< low-passed channels, for the network path
    Stamp imu_stamp = 0;
    Stamp gps_stamp = 0;
    Stamp pitot_stamp = 0;

    double time() const { return stamp_to_seconds(stamp); }
};

/// Zero-order-hold of multi-rate sensor samples onto the estimator clock.
class RateScheduler {
public:
    explicit RateScheduler(SchedulerOptions options = {});

    /// Samples must arrive in non-decreasing time per sensor.
    void push(const ImuSample& s);
    void push(const GpsSample& s);
    void push(const PitotSample& s);

    /// Assembles the frame for tick time t, or nothing until every sensor has
    /// reported once. Throws std::logic_error if a cached sample is newer than t.
    std::optional<TickFrames> tick(Stamp t);

    Stamp tick_period() const { return tick_period_; }
    const SchedulerOptions& options() const { return options_; }
    /// The frame the model-based filters consume.
    const MeasurementFrame& ekf_frame(const TickFrames& f) const
    {
        return options_.filter_ekf_inputs ? f.filtered : f.raw;
    }

private:
    SchedulerOptions options_;
    Stamp tick_period_;
    std::optional<ImuSample> imu_;
    std::optional<GpsSample> gps_;
    std::optional<PitotSample> pitot_;
    // pitot, v_n, v_e, v_d, phi, theta, psi (unwrapped)
    std::array<LowPass, 7> filters_;
    std::optional<double> last_psi_;
    double psi_unwrapped_ = 0.0;
};

/// Feeds the streams through a scheduler and returns every emitted tick in
/// [0, duration).
std::vector<TickFrames> schedule_streams(const SensorStreams& streams, double duration,
                                         const SchedulerOptions& options = {});

/// chi_nn = forward(model, remap_inputs(filtered frame)).
WindState nn_estimate(const MlpModel& model, const MeasurementFrame& filtered);

/// One predict plus one Hybrid-variant update with the network output in
/// measurement rows 4..6. The filter must be configured for Hybrid.
const WindState& hybrid_step(WindEkf& hybrid, const MeasurementFrame& frame,
                             const WindState& nn_out);

} // namespace airwind
