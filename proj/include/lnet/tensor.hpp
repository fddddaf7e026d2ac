#ifndef LNET_TENSOR_HPP
#define LNET_TENSOR_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

namespace lnet {

using Index = Eigen::Index;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RowMatrixXd = RowMatrix<double>;
using PlaneMap = Eigen::Map<RowMatrixXd>;
using ConstPlaneMap = Eigen::Map<const RowMatrixXd>;

/// Dense row-major array of doubles with an explicit shape.
///
/// Image-like data uses (channels, height, width) order. Convolution weights
/// use (out_channels, kernel_h, kernel_w, in_channels), the layout of the
/// layer tables.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<Index> shape);
    Tensor(std::vector<Index> shape, Eigen::VectorXd data);

    static Tensor zeros(std::vector<Index> shape) { return Tensor(std::move(shape)); }
    static Tensor from_plane(const Eigen::Ref<const RowMatrixXd>& plane);

    const std::vector<Index>& shape() const { return shape_; }
    Index dim(std::size_t axis) const { return shape_.at(axis); }
    Index rank() const { return static_cast<Index>(shape_.size()); }
    Index size() const { return data_.size(); }

    Eigen::VectorXd& data() { return data_; }
    const Eigen::VectorXd& data() const { return data_; }

    double& operator[](Index i) { return data_[i]; }
    double operator[](Index i) const { return data_[i]; }

    /// Element (c, y, x) of a rank-3 tensor.
    double& at(Index c, Index y, Index x) { return data_[(c * shape_[1] + y) * shape_[2] + x]; }
    double at(Index c, Index y, Index x) const { return data_[(c * shape_[1] + y) * shape_[2] + x]; }

    /// Channel c of a rank-3 tensor viewed as an H x W matrix.
    PlaneMap plane(Index c);
    ConstPlaneMap plane(Index c) const;

    bool all_finite() const { return data_.allFinite(); }
    std::string shape_string() const;

private:
    std::vector<Index> shape_;
    Eigen::VectorXd data_;
};

struct ConvSpec {
    Index out_channels = 1;
    Index kernel_h = 1;
    Index kernel_w = 1;
    Index in_channels = 1;
    Index pad = 0;
    Index dilation = 1;
    bool bias = true;

    Index param_count() const
    {
        return out_channels * kernel_h * kernel_w * in_channels + (bias ? out_channels : 0);
    }
    Index weight_count() const { return out_channels * kernel_h * kernel_w * in_channels; }
    std::vector<Index> weight_shape() const { return {out_channels, kernel_h, kernel_w, in_channels}; }

    Index out_height(Index h) const { return h + 2 * pad - dilation * (kernel_h - 1); }
    Index out_width(Index w) const { return w + 2 * pad - dilation * (kernel_w - 1); }

    friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct ConvGrads {
    Tensor input;
    Tensor weight;
    Tensor bias;
};

/// Cross-correlation (no kernel flip) with zero padding and dilation.
Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& weights, const Tensor& bias);

/// Exact vector-Jacobian product of conv2d for the cotangent out_grad.
ConvGrads conv2d_vjp(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                     const Tensor& out_grad);

Tensor relu(const Tensor& input);
void relu_inplace(Tensor& t);
/// Passes out_grad where input > 0; the subgradient at 0 is 0.
Tensor relu_vjp(const Tensor& input, const Tensor& out_grad);

enum class BlurMode {
    /// Sum-normalized kernel, replicate-edge borders (image smoothing).
    normalized_replicate,
    /// Unit-center kernel, zero borders (Hough-space peak spreading).
    unnormalized_zero,
};

/// 1-D Gaussian taps exp(-i^2 / (2 sigma^2)) for |i| <= ceil(3 sigma).
Eigen::VectorXd gaussian_kernel(double sigma, bool normalize);

RowMatrixXd gaussian_blur(const Eigen::Ref<const RowMatrixXd>& plane, double sigma, BlurMode mode);
Tensor gaussian_blur(const Tensor& input, double sigma, BlurMode mode);

} // namespace lnet

#endif // LNET_TENSOR_HPP
