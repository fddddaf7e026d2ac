#include "lnet/trainer.hpp"

#include "lnet/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace lnet {

void TrainConfig::validate() const
{
    auto require = [](bool ok, const char* field) {
        if (!ok) {
            throw std::invalid_argument(std::string("train config: ") + field + " must be positive");
        }
    };
    require(epochs > 0, "epochs");
    require(batch_size > 0, "batch_size");
    require(lr0 > 0.0, "lr0");
    require(lr_halving_period > 0, "lr_halving_period");
    require(weight_decay >= 0.0, "weight_decay");
    require(target_sigma >= 0.0, "target_sigma");
    require(loss_weight_coeff >= 0.0, "loss_weight_coeff");
    variant_from_string(variant);
}

double learning_rate(const TrainConfig& config, int epoch)
{
    return config.lr0 * std::ldexp(1.0, -(epoch / config.lr_halving_period));
}

HoughMap<double> make_target(const std::vector<BoundaryLine>& gt_lines, Index n, double sigma)
{
    HoughMap<double> target(n);
    const Eigen::VectorXd k = gaussian_kernel(sigma, false);
    const Index r = (k.size() - 1) / 2;
    const Index w = target.width();
    for (const auto& line : gt_lines) {
        const DyadicLine cell = cell_from_line(line);
        auto& plane = target.planes[cell.quadrant];
        const Index col = cell.offset_x + n - 1;
        for (Index ds = -r; ds <= r; ++ds) {
            const Index s = cell.shift_s + ds;
            if (s < 0 || s >= n) {
                continue;
            }
            for (Index dx = -r; dx <= r; ++dx) {
                const Index c = col + dx;
                if (c < 0 || c >= w) {
                    continue;
                }
                // Same product as a separable blur of a unit impulse.
                plane(s, c) = std::max(plane(s, c), k[ds + r] * k[dx + r]);
            }
        }
    }
    return target;
}

LossResult weighted_mse(const HoughMap<double>& pred, const HoughMap<double>& target, double coeff)
{
    if (pred.n != target.n) {
        throw std::invalid_argument("weighted_mse: prediction size " + std::to_string(pred.n)
                                    + " does not match target size " + std::to_string(target.n));
    }
    LossResult r;
    r.grad = HoughMap<double>(pred.n);
    const double inv_m = 1.0 / static_cast<double>(pred.cell_count());
    for (int q = 0; q < 4; ++q) {
        const auto p = pred.planes[q].array();
        const auto t = target.planes[q].array();
        if (p.rows() != t.rows() || p.cols() != t.cols()) {
            throw std::invalid_argument("weighted_mse: plane shape mismatch");
        }
        const Eigen::ArrayXXd weight = 1.0 + coeff * t;
        const Eigen::ArrayXXd diff = p - t;
        r.loss += (weight * diff.square()).sum() * inv_m;
        r.grad.planes[q] = (2.0 * inv_m) * weight * diff;
    }
    return r;
}

void adam_step(LNetModel& model, const Eigen::VectorXd& grads, AdamState& state, double lr, double weight_decay)
{
    const Index n = model.param_count();
    if (grads.size() != n) {
        throw std::invalid_argument("adam_step: gradient has " + std::to_string(grads.size())
                                    + " entries, model has " + std::to_string(n));
    }
    if (!grads.allFinite()) {
        throw std::runtime_error("adam_step: non-finite gradient (NaN or Inf)");
    }
    if (state.m.size() != n) {
        state = AdamState(n);
    }
    Eigen::VectorXd theta = model.flat();
    const Eigen::VectorXd g = grads + weight_decay * theta;
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * g;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    theta.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
    model.set_flat(theta);
}

double batch_gradient(const LNetModel& model, const std::vector<TrainingExample>& data,
                      const std::vector<std::size_t>& batch, const TrainConfig& config, Eigen::VectorXd& grad)
{
    std::vector<Eigen::VectorXd> grads(batch.size());
    std::vector<double> losses(batch.size());
    parallel_for(batch.size(), config.threads, [&](std::size_t i) {
        const TrainingExample& ex = data.at(batch[i]);
        ForwardTrace trace = forward_trace(model, ex.image);
        const HoughMap<double> target = make_target(ex.lines, ex.image.rows(), config.target_sigma);
        LossResult lr = weighted_mse(trace.prediction, target, config.loss_weight_coeff);
        losses[i] = lr.loss;
        grads[i] = backward(model, trace, lr.grad).params;
    });
    grad = Eigen::VectorXd::Zero(model.param_count());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        grad += grads[i];
        loss += losses[i];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    grad *= inv;
    return loss * inv;
}

double dataset_loss(const LNetModel& model, const std::vector<TrainingExample>& data,
                    const std::vector<std::size_t>& indices, const TrainConfig& config)
{
    std::vector<double> losses(indices.size());
    parallel_for(indices.size(), config.threads, [&](std::size_t i) {
        const TrainingExample& ex = data.at(indices[i]);
        const HoughMap<double> target = make_target(ex.lines, ex.image.rows(), config.target_sigma);
        losses[i] = weighted_mse(forward(model, ex.image), target, config.loss_weight_coeff).loss;
    });
    double total = 0.0;
    for (double l : losses) {
        total += l;
    }
    return indices.empty() ? 0.0 : total / static_cast<double>(indices.size());
}

namespace {

// Every step allocates the same large activation buffers. Keeping them on the
// heap instead of fresh mmap pages avoids paying page faults again each time.
void keep_large_buffers()
{
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

} // namespace

TrainResult train(const TrainConfig& config, const std::vector<TrainingExample>& data, const EpochHook& hook,
                  const EpochLogger& logger)
{
    config.validate();
    keep_large_buffers();
    if (data.empty()) {
        throw std::invalid_argument("train: empty training set");
    }
    TrainResult result;
    result.model = init_weights(build(config.variant), derive_seed(config.seed, 0), config.init_noise_scale);
    result.model.seed = config.seed;
    Rng shuffle_rng(derive_seed(config.seed, 1));
    AdamState adam(result.model.param_count());

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Eigen::VectorXd grad;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        const double lr = learning_rate(config, epoch);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                 order.begin() + static_cast<std::ptrdiff_t>(end));
            loss_sum += batch_gradient(result.model, data, batch, config, grad);
            adam_step(result.model, grad, adam, lr, config.weight_decay);
            ++batches;
            ++result.steps;
        }
        EpochMetrics m{epoch, lr, loss_sum / static_cast<double>(batches), std::nullopt};
        if (hook) {
            m.test_ap = hook(result.model, epoch);
        }
        result.log.push_back(m);
        if (logger) {
            logger(m);
        }
    }
    nlohmann::json meta{{"epochs", config.epochs},
                        {"batch_size", config.batch_size},
                        {"lr0", config.lr0},
                        {"lr_halving_period", config.lr_halving_period},
                        {"weight_decay", config.weight_decay},
                        {"target_sigma", config.target_sigma},
                        {"loss_weight_coeff", config.loss_weight_coeff},
                        {"init_noise_scale", config.init_noise_scale},
                        {"train_samples", data.size()},
                        {"steps", result.steps},
                        {"final_train_loss", result.log.back().train_loss}};
    result.model.training_metadata = meta.dump();
    return result;
}

std::vector<TrainingExample> load_split(const DatasetManifest& manifest, const std::string& split, unsigned threads)
{
    const auto entries = manifest.split(split);
    std::vector<TrainingExample> out(entries.size());
    parallel_for(entries.size(), threads, [&](std::size_t i) {
        Sample s = load_sample(manifest, *entries[i]);
        out[i] = TrainingExample{std::move(s.image), std::move(s.gt_lines)};
    });
    return out;
}

TrainResult train(const TrainConfig& config, const EpochHook& hook)
{
    config.validate();
    const DatasetManifest manifest = load_manifest(config.manifest);
    const auto data = load_split(manifest, "train", config.threads);
    if (data.empty()) {
        throw std::invalid_argument("train: manifest " + config.manifest.string() + " has no train samples");
    }
    return train(config, data, hook);
}

void write_metrics_csv(const std::vector<EpochMetrics>& log, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os << "epoch,lr,train_loss,test_AP\n";
    char buf[128];
    for (const auto& m : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,", m.epoch, m.lr, m.train_loss);
        os << buf;
        if (m.test_ap) {
            std::snprintf(buf, sizeof(buf), "%.17g", *m.test_ap);
            os << buf;
        }
        os << '\n';
    }
    if (!os) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

} // namespace lnet
