#ifndef LNET_TRAINER_HPP
#define LNET_TRAINER_HPP

#include "lnet/network.hpp"
#include "lnet/synthgen.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lnet {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double lr0 = 1e-3;
    int lr_halving_period = 10;
    double weight_decay = 1e-5;
    double target_sigma = 1.8;
    double loss_weight_coeff = 1000.0;
    double init_noise_scale = 1e-2;
    std::uint64_t seed = 0;
    std::string variant = "fast";
    std::filesystem::path manifest;
    unsigned threads = 1;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

/// Learning rate for a zero-based epoch: lr0 halved every lr_halving_period epochs.
double learning_rate(const TrainConfig& config, int epoch);

/// Hough-space target: a unit-peak Gaussian (unnormalized, zero borders) at
/// each line's cell, overlapping peaks combined by maximum.
HoughMap<double> make_target(const std::vector<BoundaryLine>& gt_lines, Index n, double sigma = 1.8);

struct LossResult {
    double loss = 0.0;
    HoughMap<double> grad;
};

/// mean((1 + coeff * target) * (pred - target)^2) over all cells, with its gradient.
LossResult weighted_mse(const HoughMap<double>& pred, const HoughMap<double>& target, double coeff = 1000.0);

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(Index params = 0) : m(Eigen::VectorXd::Zero(params)), v(Eigen::VectorXd::Zero(params)) {}
};

/// One Adam update with classic L2 decay (weight_decay * theta added to the gradient).
void adam_step(LNetModel& model, const Eigen::VectorXd& grads, AdamState& state, double lr, double weight_decay);

struct TrainingExample {
    GrayImage image;
    std::vector<BoundaryLine> lines;
};

struct EpochMetrics {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    std::optional<double> test_ap;
};

struct TrainResult {
    LNetModel model;
    std::vector<EpochMetrics> log;
    long steps = 0;
};

/// Called after every epoch; may return a test AP for the metrics log.
using EpochHook = std::function<std::optional<double>(const LNetModel&, int epoch)>;
/// Called with each finished epoch's log entry.
using EpochLogger = std::function<void(const EpochMetrics&)>;

/// Mean loss and mean parameter gradient over a batch (reduced in index order).
double batch_gradient(const LNetModel& model, const std::vector<TrainingExample>& data,
                      const std::vector<std::size_t>& batch, const TrainConfig& config, Eigen::VectorXd& grad);

/// Mean loss of the model over the given examples.
double dataset_loss(const LNetModel& model, const std::vector<TrainingExample>& data,
                    const std::vector<std::size_t>& indices, const TrainConfig& config);

TrainResult train(const TrainConfig& config, const std::vector<TrainingExample>& data, const EpochHook& hook = {},
                  const EpochLogger& logger = {});

/// Loads the train split of config.manifest, then trains.
TrainResult train(const TrainConfig& config, const EpochHook& hook = {});

std::vector<TrainingExample> load_split(const DatasetManifest& manifest, const std::string& split,
                                        unsigned threads = 1);

void write_metrics_csv(const std::vector<EpochMetrics>& log, const std::filesystem::path& path);

} // namespace lnet

#endif // LNET_TRAINER_HPP
