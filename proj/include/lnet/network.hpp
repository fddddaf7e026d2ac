#ifndef LNET_NETWORK_HPP
#define LNET_NETWORK_HPP

#include "lnet/fht.hpp"
#include "lnet/random.hpp"
#include "lnet/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lnet {

enum class Variant { fast, acc };

std::string to_string(Variant v);
/// Throws std::invalid_argument for anything but "fast" or "acc".
Variant variant_from_string(const std::string& name);

/// Layer layout: convA runs in image space, then the Hough layer, then one
/// convB stack shared by all four orientation branches. Every convolution is
/// followed by ReLU.
struct LNetArch {
    Variant variant = Variant::fast;
    std::vector<ConvSpec> conv_a;
    std::vector<ConvSpec> conv_b;
    /// Divide the Hough layer output by N, so a full-length unit line sums to
    /// 1 like the training targets. Exact for power-of-two N.
    bool normalize_hough = true;

    std::size_t layer_count() const { return conv_a.size() + conv_b.size(); }
    const ConvSpec& layer(std::size_t i) const { return i < conv_a.size() ? conv_a[i] : conv_b[i - conv_a.size()]; }
    Index param_count() const;
};

LNetArch build(Variant variant);
LNetArch build(const std::string& variant);

/// Weights and biases per layer, convA layers first.
struct LNetModel {
    LNetArch arch;
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
    std::uint64_t seed = 0;
    std::string training_metadata = "{}"; // JSON object carried into checkpoints

    Index param_count() const { return arch.param_count(); }
    /// Flattened parameters: per layer, weights (out, kh, kw, in) then biases.
    Eigen::VectorXd flat() const;
    void set_flat(const Eigen::Ref<const Eigen::VectorXd>& params);
    bool all_finite() const;
};

/// All-zero model for the architecture.
LNetModel zero_model(const LNetArch& arch);

/// Identity-pass-through kernels plus uniform(-b, b) * noise_scale noise,
/// b = sqrt(6 / fan_in). Biases start at zero.
LNetModel init_weights(const LNetArch& arch, Rng& rng, double noise_scale = 1e-2);
LNetModel init_weights(const LNetArch& arch, std::uint64_t seed, double noise_scale = 1e-2);

HoughMap<double> forward(const LNetModel& model, const GrayImage& image);

/// Gradients of <out_grad, forward(model, image)>.
struct Gradients {
    Eigen::VectorXd params; // same layout as LNetModel::flat()
    GrayImage input;
};

Gradients forward_backward(const LNetModel& model, const GrayImage& image, const HoughMap<double>& out_grad);

/// Activations kept by the forward pass for the backward pass.
struct ForwardTrace {
    Tensor input;                               // 1 x N x N
    std::vector<Tensor> conv_a;                 // post-ReLU output of each convA layer
    HoughMap<double> hough;                     // Hough layer output
    std::array<std::vector<Tensor>, 4> conv_b;  // per branch, post-ReLU output of each convB layer
    HoughMap<double> prediction;
};

ForwardTrace forward_trace(const LNetModel& model, const GrayImage& image);
Gradients backward(const LNetModel& model, const ForwardTrace& trace, const HoughMap<double>& out_grad);

struct FlopRow {
    std::string block;
    std::string layer;
    Index params = 0;
    double mflop = 0.0;
};

struct FlopReport {
    std::vector<FlopRow> rows;
    double total_mflop = 0.0;
    /// Same count with convB evaluated over the full N x (2N-1) Hough planes.
    double executed_total_mflop = 0.0;
};

/// Analytic cost: a conv layer costs (2 kh kw C_in + 1) C_out per output
/// pixel; convB is charged N x N pixels per branch over 4 branches and the
/// Hough layer 4 (2N-1) N log2 N additions.
FlopReport flop_count(const LNetArch& arch, Index n);

void save_checkpoint(const LNetModel& model, const std::filesystem::path& path);
LNetModel load_checkpoint(const std::filesystem::path& path);

} // namespace lnet

#endif // LNET_NETWORK_HPP
