#pragma once

#include "airwind/frames.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace airwind {

// All sensor and estimator clocks are integer multiples of one quantum, so
// multi-rate scheduling is exact: 3600 = lcm(100, 4, 18, 16).
using Stamp = std::int64_t;
inline constexpr Stamp kQuantaPerSecond = 3600;

constexpr double stamp_to_seconds(Stamp s) { return static_cast<double>(s) / kQuantaPerSecond; }

struct Segment {
    enum class Kind { Straight, Turn };
    Kind kind = Kind::Straight;
    double value = 0.0; ///< Straight: duration (s). Turn: signed heading change (rad).
};

/// Wind from start time onward. heading is the direction the air moves
/// towards: V_Nw = speed cos(heading), V_Ew = speed sin(heading).
struct WindChange {
    double start = 0.0;
    double speed = 0.0;
    double heading = 0.0;
};

/// Standard deviation of additive Gaussian noise per channel.
struct SensorNoise {
    double roll_pitch = 5.2e-3;  ///< rad
    double yaw = 0.1;            ///< rad
    double ground_speed = 0.4;   ///< m/s, each NED axis
    double pitot = 6.04e-4;      ///< V_pitot units

    static SensorNoise zero() { return {0.0, 0.0, 0.0, 0.0}; }
};

struct NoiseSeeds {
    std::uint64_t imu = 1;
    std::uint64_t gps = 2;
    std::uint64_t pitot = 3;

    /// Three decorrelated seeds from one base value.
    static NoiseSeeds derive(std::uint64_t base);
};

struct SensorRates {
    int imu_hz = 100;
    int gps_hz = 4;
    int pitot_hz = 18;
};

struct ScenarioSpec {
    std::string name = "scenario";
    double initial_heading = 0.0; ///< rad
    std::vector<Segment> segments;
    double airspeed = 7.0;       ///< m/s, true airspeed held by the controller
    double altitude = 50.0;      ///< m
    double eta = 1.0;            ///< Pitot calibration factor
    double turn_rate = deg2rad(3.0);
    std::vector<WindChange> wind;
    NoiseSeeds seeds;
    SensorNoise noise;
    double duration = 0.0;       ///< s; 0 means the plan length
    // Optional sinusoidal flow angles to stress c_f estimation (default off).
    double alpha_amplitude = 0.0;
    double beta_amplitude = 0.0;
    double flow_angle_period = 20.0;

    /// Throws std::invalid_argument on an infeasible plan.
    void validate() const;
    double plan_duration() const;
    double run_duration() const;
};

/// Horizontal wind (V_Nw, V_Ew) at time t.
Eigen::Vector2d wind_at(const ScenarioSpec& spec, double t);

struct TruthSample {
    double t = 0.0;
    Vec3 pos = Vec3::Zero();   ///< NED, relative to start
    Vec3 v_ned = Vec3::Zero();
    EulerAttitude att;
    double wind_n = 0.0;
    double wind_e = 0.0;
    double c_f = 1.0;
    double v_pitot = 0.0;      ///< noiseless sqrt(eta) * u_a
};

/// Ideal-tracking kinematics: the air-relative velocity follows the commanded
/// course at constant airspeed and the ground velocity is airspeed plus wind.
class Trajectory {
public:
    explicit Trajectory(ScenarioSpec spec);

    /// Course of the air-relative velocity at t (unwrapped, rad).
    double course_at(double t) const;
    /// Everything except position, evaluated exactly at t.
    TruthSample at(double t) const;

    const ScenarioSpec& spec() const { return spec_; }

private:
    struct Piece {
        double t0;
        double t1;
        double heading0;
        double rate;
    };
    ScenarioSpec spec_;
    std::vector<Piece> pieces_;
};

/// Truth stream at rate_hz over the run duration, position integrated with
/// the trapezoidal rule.
std::vector<TruthSample> simulate_truth(const ScenarioSpec& spec, double rate_hz = 100.0);

struct ImuSample {
    Stamp stamp = 0;
    EulerAttitude att;
};
struct GpsSample {
    Stamp stamp = 0;
    Vec3 v_ned = Vec3::Zero();
};
struct PitotSample {
    Stamp stamp = 0;
    double v_pitot = 0.0;
};

struct SensorStreams {
    std::vector<ImuSample> imu;
    std::vector<GpsSample> gps;
    std::vector<PitotSample> pitot;
};

/// Samples every sensor at its own rate over [0, duration) and adds noise.
/// Reproducible from the seeds.
SensorStreams synthesize_sensors(const Trajectory& truth, const SensorNoise& noise,
                                 const NoiseSeeds& seeds, double duration,
                                 const SensorRates& rates = {});

/// The two closed circuits used to build the training set.
std::vector<ScenarioSpec> base_training_plans();

struct GridOptions {
    int trajectories = 16;  ///< first N of the 2 plans x 8 rotations
    std::vector<double> speeds{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    int headings = 16;      ///< evenly spaced wind headings
    double eta = 1.0;
    std::uint64_t seed = 2024;
};

/// Plan x rotation x wind grid; zero wind appears once per trajectory.
std::vector<ScenarioSpec> training_grid(const GridOptions& options = {});

/// The two wind-step evaluation scenarios on the shared validation path.
ScenarioSpec reference_scenario(int which);

// Scenario text format: "key = value" lines plus "wind <t> <speed> <heading_deg>"
// and "segment straight <s>" / "segment turn <deg>" lines; '#' starts a comment.
ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec load_scenario(const std::string& path);
std::string format_scenario(const ScenarioSpec& spec);

} // namespace airwind
