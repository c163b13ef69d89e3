#include "airwind/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace airwind {

LowPass::LowPass(double tau, double ts) : tau_(tau), ts_(ts)
{
    if (!(tau > 0.0) || !(ts > 0.0)) {
        throw std::invalid_argument("low-pass time constant and step must be positive");
    }
    a_ = std::exp(-ts / tau);
}

double LowPass::step(double z)
{
    if (!y_) {
        y_ = z;
    } else {
        *y_ = a_ * *y_ + (1.0 - a_) * z;
    }
    return *y_;
}

RateScheduler::RateScheduler(SchedulerOptions options) : options_(options)
{
    if (options_.estimator_hz <= 0 || kQuantaPerSecond % options_.estimator_hz != 0) {
        throw std::invalid_argument("estimator rate must divide the 3600 Hz time base");
    }
    tick_period_ = kQuantaPerSecond / options_.estimator_hz;
    const LowPass proto(options_.tau, stamp_to_seconds(tick_period_));
    filters_.fill(proto);
}

namespace {

template <class T>
void hold(std::optional<T>& slot, const T& s, const char* sensor)
{
    if (slot && s.stamp < slot->stamp) {
        throw std::invalid_argument(std::string(sensor) + " samples out of order");
    }
    slot = s;
}

} // namespace

void RateScheduler::push(const ImuSample& s) { hold(imu_, s, "IMU"); }
void RateScheduler::push(const GpsSample& s) { hold(gps_, s, "GPS"); }
void RateScheduler::push(const PitotSample& s) { hold(pitot_, s, "Pitot"); }

std::optional<TickFrames> RateScheduler::tick(Stamp t)
{
    if (!imu_ || !gps_ || !pitot_) {
        return std::nullopt;
    }
    if (imu_->stamp > t || gps_->stamp > t || pitot_->stamp > t) {
        throw std::logic_error("scheduler holds a sample newer than the tick time");
    }

    TickFrames f;
    f.stamp = t;
    f.imu_stamp = imu_->stamp;
    f.gps_stamp = gps_->stamp;
    f.pitot_stamp = pitot_->stamp;
    f.raw = {pitot_->v_pitot, gps_->v_ned.x(), gps_->v_ned.y(), gps_->v_ned.z(), imu_->att};

    const double psi = imu_->att.psi;
    psi_unwrapped_ = last_psi_ ? psi_unwrapped_ + wrap_angle(psi - *last_psi_) : psi;
    last_psi_ = psi;

    f.filtered.v_pitot = filters_[0].step(f.raw.v_pitot);
    f.filtered.v_n = filters_[1].step(f.raw.v_n);
    f.filtered.v_e = filters_[2].step(f.raw.v_e);
    f.filtered.v_d = filters_[3].step(f.raw.v_d);
    f.filtered.att.phi = filters_[4].step(f.raw.att.phi);
    f.filtered.att.theta = filters_[5].step(f.raw.att.theta);
    f.filtered.att.psi = wrap_angle(filters_[6].step(psi_unwrapped_));
    return f;
}

std::vector<TickFrames> schedule_streams(const SensorStreams& streams, double duration,
                                         const SchedulerOptions& options)
{
    RateScheduler sched(options);
    const Stamp end = std::llround(duration * kQuantaPerSecond);
    std::vector<TickFrames> out;
    out.reserve(static_cast<std::size_t>(end / sched.tick_period() + 1));
    std::size_t i = 0, g = 0, p = 0;
    for (Stamp t = 0; t < end; t += sched.tick_period()) {
        while (i < streams.imu.size() && streams.imu[i].stamp <= t) {
            sched.push(streams.imu[i++]);
        }
        while (g < streams.gps.size() && streams.gps[g].stamp <= t) {
            sched.push(streams.gps[g++]);
        }
        while (p < streams.pitot.size() && streams.pitot[p].stamp <= t) {
            sched.push(streams.pitot[p++]);
        }
        if (auto f = sched.tick(t)) {
            out.push_back(*f);
        }
    }
    return out;
}

WindState nn_estimate(const MlpModel& model, const MeasurementFrame& filtered)
{
    return WindState::from_vec(forward(model, remap_inputs(filtered)));
}

const WindState& hybrid_step(WindEkf& hybrid, const MeasurementFrame& frame,
                             const WindState& nn_out)
{
    if (hybrid.config().variant != MeasurementVariant::Hybrid) {
        throw std::invalid_argument("hybrid_step needs a filter configured for the Hybrid variant");
    }
    return hybrid.step(frame, nn_out);
}

} // namespace airwind
