#pragma once

#include "airwind/windmodel.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace airwind {

inline constexpr int kNnInputs = 8;
inline constexpr int kNnHidden = 24;
inline constexpr int kNnHiddenLayers = 3;
inline constexpr int kNnOutputs = 3;
inline constexpr int kNnLayers = kNnHiddenLayers + 1;

using NnInput = Eigen::Matrix<double, kNnInputs, 1>;

/// Affine map to and from the network's internal scale:
/// normalized = (x - shift) / scale.
struct Normalization {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    static Normalization identity(int n);
    /// Maps the per-row min/max of data (features x samples) onto [-1, 1].
    /// Constant features get scale 1.
    static Normalization min_max(const Eigen::MatrixXd& data);
};

/// 8 -> 24 -> 24 -> 24 -> 3 perceptron, sigmoid hidden units, linear outputs.
struct MlpModel {
    std::array<Eigen::MatrixXd, kNnLayers> weights;
    std::array<Eigen::VectorXd, kNnLayers> biases;
    Normalization input_norm;
    Normalization output_norm;

    /// All-zero parameters with identity normalization.
    static MlpModel zeros();
    /// Uniform in +-1/sqrt(fan_in) per layer.
    static MlpModel random(std::uint64_t seed);

    std::size_t parameter_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);
    /// Throws std::invalid_argument if shapes, finiteness or scales are off.
    void validate() const;
};

Eigen::Vector3d forward(const MlpModel& model, const NnInput& input);
/// Column-wise forward pass on raw inputs (8 x N) giving raw outputs (3 x N).
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

/// (V_pitot^2, V_D^2, V_N, V_E, V_E^2, V_N^2, V_pitot cos(psi) cos(theta),
///  V_pitot sin(psi) cos(theta))
NnInput remap_inputs(const MeasurementFrame& frame);

enum class Split : std::uint8_t { Train, Validation, Test };

/// Rows stored column-wise: inputs is 8 x N, targets 3 x N.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;
    std::vector<std::int64_t> scenario;
    std::vector<Split> split;

    std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
    std::vector<Eigen::Index> indices(Split s) const;
};

/// Random 70/15/15 assignment: exact counts round(0.7 n) and round(0.15 n),
/// remainder to test.
void assign_splits(Dataset& data, std::uint64_t seed);

struct Histogram {
    std::vector<double> edges; ///< bins + 1 values
    std::vector<std::size_t> counts;
};

struct SplitMetrics {
    std::size_t count = 0;
    double mse = 0.0;
    std::optional<double> r; ///< empty when predictions or targets have zero variance
};

struct TrainReport {
    std::vector<double> train_mse;      ///< per epoch, after the epoch's step
    std::vector<double> validation_mse; ///< per epoch
    std::size_t best_epoch = 0;         ///< 0 = initial weights
    std::array<std::optional<SplitMetrics>, 3> metrics; ///< indexed by Split
    Histogram error_histogram;
    bool zero_target_variance = false;
};

/// Pearson correlation of all entries pooled together; empty if either side
/// has zero variance.
std::optional<double> pooled_r(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// Metrics on normalized targets for every split present in data; pooled R
/// over the three outputs; 20-bin residual histogram over all rows.
void compute_metrics(const MlpModel& model, const Dataset& data, TrainReport& report);

struct TrainOptions {
    int epochs = 5000;
    std::uint64_t seed = 1;
    bool normalize = true;
    double sigma = 5e-5;   ///< finite-difference step for curvature estimates
    double lambda = 1e-6;  ///< initial damping
};

struct TrainResult {
    MlpModel model;
    TrainReport report;
};

/// Scaled conjugate gradient on the training-split MSE, keeping the weights
/// with the lowest validation MSE seen.
TrainResult train_scg(const Dataset& data, const TrainOptions& options);

/// Mean squared error on normalized targets for the given columns and its
/// gradient with respect to flatten(). Exposed for gradient checking.
double mse_and_gradient(const MlpModel& model, const Eigen::MatrixXd& norm_inputs,
                        const Eigen::MatrixXd& norm_targets, Eigen::VectorXd* gradient);

/// Versioned text format; doubles written in shortest round-trip form.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);
std::string format_model(const MlpModel& model);
MlpModel parse_model(const std::string& text);

/// Delimited dataset file: header, then 8 inputs, 3 targets, scenario id per row.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

} // namespace airwind
