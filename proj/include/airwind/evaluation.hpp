#pragma once

#include "airwind/pipeline.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace airwind {

enum class EstimatorKind { Cho2011, Ekf, Nn, Hybrid };

std::string_view estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);
/// Comma-separated list, e.g. "cho2011,ekf,nn,hybrid".
std::vector<EstimatorKind> parse_estimator_list(std::string_view list);

/// Supplies chi_nn for a tick from the filtered frame and tick time.
using NeuralSource = std::function<WindState(const MeasurementFrame& filtered, double t)>;

NeuralSource mlp_source(std::shared_ptr<const MlpModel> model);
/// Stand-in network returning the true wind plus a constant bias.
NeuralSource oracle_source(const ScenarioSpec& spec, const Vec3& bias);

struct RunOptions {
    std::vector<EstimatorKind> estimators{EstimatorKind::Cho2011, EstimatorKind::Ekf,
                                          EstimatorKind::Nn, EstimatorKind::Hybrid};
    std::map<EstimatorKind, EstimatorConfig> configs; ///< missing entries use defaults
    NeuralSource nn;                                  ///< required for Nn / Hybrid
    SchedulerOptions scheduler;
    bool time_steps = false;                          ///< wall-clock per estimator step
};

struct EstimateSeries {
    EstimatorKind kind = EstimatorKind::Ekf;
    std::vector<WindState> states;
    std::vector<Mat3> covariances;   ///< empty for Nn
    std::size_t skipped_updates = 0;
    std::vector<double> step_micros; ///< filled when RunOptions::time_steps
};

struct TruthRow {
    double t = 0.0;
    Vec3 v_ned = Vec3::Zero();
    EulerAttitude att;
    WindState wind;
};

/// Everything a scenario run produces, aligned on the estimator ticks.
struct RunLog {
    std::vector<double> time;
    std::vector<TruthRow> truth;
    std::vector<EstimateSeries> series;

    const EstimateSeries* find(EstimatorKind kind) const;
};

/// Simulates the scenario, synthesizes sensors once, and runs every selected
/// estimator on the same tick frames. Throws std::runtime_error if a
/// non-finite value reaches any estimate or covariance.
RunLog run_scenario(const ScenarioSpec& spec, const RunOptions& options);

struct RmsRow {
    std::string estimator;
    double rms_n = 0.0;
    double rms_e = 0.0;
    std::optional<double> pct_n; ///< relative to cho2011 when present
    std::optional<double> pct_e;
};

struct RmsReport {
    std::vector<RmsRow> rows;
    double burn_in = 0.0;
    std::size_t samples = 0;

    const RmsRow* find(std::string_view estimator) const;
};

/// RMS of (estimate - truth) per wind component over ticks with t >= burn_in.
RmsReport compute_rms(const RunLog& log, double burn_in = 0.0);

/// Columns read back from a delimited estimate log.
struct EstimateTable {
    std::vector<double> time;
    std::vector<std::string> estimators;
    std::vector<std::vector<WindState>> values; ///< per estimator, per row
};

struct TruthTable {
    std::vector<double> time;
    std::vector<WindState> wind;
};

/// Same as above from logs on disk; throws if timestamps do not line up.
RmsReport compute_rms(const EstimateTable& estimates, const TruthTable& truth,
                      double burn_in = 0.0);

void write_estimate_log(const RunLog& log, const std::string& path);
void write_truth_log(const RunLog& log, const std::string& path);
void write_rms_report(const RmsReport& report, const std::string& path);
std::string format_rms_report(const RmsReport& report);
EstimateTable read_estimate_log(const std::string& path);
TruthTable read_truth_log(const std::string& path);

void write_sensor_logs(const SensorStreams& streams, const std::string& dir);

struct DatasetOptions {
    int stride = 1; ///< keep every stride-th estimator tick
    SchedulerOptions scheduler;
};

/// Runs each spec and records filtered network inputs against true targets.
Dataset generate_dataset(const std::vector<ScenarioSpec>& specs,
                         const DatasetOptions& options = {});

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_fingerprint(const std::string& path);

} // namespace airwind
