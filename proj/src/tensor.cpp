#include "lnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lnet {

namespace {

Index shape_product(const std::vector<Index>& shape)
{
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

using ArrayMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrayMap = Eigen::Map<const Eigen::ArrayXd>;

[[noreturn]] void shape_error(const std::string& what, Index expected, Index got)
{
    std::ostringstream os;
    os << "conv2d: " << what << " mismatch (expected " << expected << ", got " << got << ")";
    throw std::invalid_argument(os.str());
}

void check_conv_shapes(const Tensor& input, const ConvSpec& spec, const Tensor& weights)
{
    if (input.rank() != 3) {
        shape_error("input rank", 3, input.rank());
    }
    if (input.dim(0) != spec.in_channels) {
        shape_error("input channels", spec.in_channels, input.dim(0));
    }
    if (weights.shape() != spec.weight_shape()) {
        throw std::invalid_argument("conv2d: weight shape mismatch (expected "
                                    + Tensor(spec.weight_shape()).shape_string() + ", got "
                                    + weights.shape_string() + ")");
    }
    if (spec.out_height(input.dim(1)) <= 0 || spec.out_width(input.dim(2)) <= 0) {
        throw std::invalid_argument("conv2d: kernel larger than padded input " + input.shape_string());
    }
}

// Valid output range [lo, hi) along one axis for a tap displaced by d.
struct TapRange {
    Index lo;
    Index hi;
};

TapRange tap_range(Index out_extent, Index in_extent, Index d)
{
    return {std::max<Index>(0, -d), std::min(out_extent, in_extent - d)};
}

} // namespace

Tensor::Tensor(std::vector<Index> shape)
    : shape_(std::move(shape)), data_(Eigen::VectorXd::Zero(shape_product(shape_)))
{
}

Tensor::Tensor(std::vector<Index> shape, Eigen::VectorXd data) : shape_(std::move(shape)), data_(std::move(data))
{
    if (shape_product(shape_) != data_.size()) {
        throw std::invalid_argument("Tensor: shape " + shape_string() + " does not match data length "
                                    + std::to_string(data_.size()));
    }
}

Tensor Tensor::from_plane(const Eigen::Ref<const RowMatrixXd>& plane)
{
    Tensor t({1, plane.rows(), plane.cols()});
    t.plane(0) = plane;
    return t;
}

PlaneMap Tensor::plane(Index c)
{
    return PlaneMap(data_.data() + c * shape_[1] * shape_[2], shape_[1], shape_[2]);
}

ConstPlaneMap Tensor::plane(Index c) const
{
    return ConstPlaneMap(data_.data() + c * shape_[1] * shape_[2], shape_[1], shape_[2]);
}

std::string Tensor::shape_string() const
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        os << (i ? "x" : "") << shape_[i];
    }
    os << ']';
    return os.str();
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& weights, const Tensor& bias)
{
    check_conv_shapes(input, spec, weights);
    if (spec.bias && bias.size() != spec.out_channels) {
        shape_error("bias length", spec.out_channels, bias.size());
    }
    const Index h = input.dim(1);
    const Index w = input.dim(2);
    const Index ho = spec.out_height(h);
    const Index wo = spec.out_width(w);
    Tensor out({spec.out_channels, ho, wo});

    const double* in = input.data().data();
    const double* wt = weights.data().data();
    double* dst = out.data().data();

    for (Index o = 0; o < spec.out_channels; ++o) {
        const double b = spec.bias ? bias[o] : 0.0;
        for (Index y = 0; y < ho; ++y) {
            ArrayMap orow(dst + (o * ho + y) * wo, wo);
            orow.setConstant(b);
            for (Index ky = 0; ky < spec.kernel_h; ++ky) {
                const Index yy = y + ky * spec.dilation - spec.pad;
                if (yy < 0 || yy >= h) {
                    continue;
                }
                for (Index kx = 0; kx < spec.kernel_w; ++kx) {
                    const Index dx = kx * spec.dilation - spec.pad;
                    const auto [lo, hi] = tap_range(wo, w, dx);
                    if (hi <= lo) {
                        continue;
                    }
                    for (Index i = 0; i < spec.in_channels; ++i) {
                        const double k = wt[((o * spec.kernel_h + ky) * spec.kernel_w + kx) * spec.in_channels + i];
                        const double* irow = in + (i * h + yy) * w;
                        orow.segment(lo, hi - lo) += k * ConstArrayMap(irow + lo + dx, hi - lo);
                    }
                }
            }
        }
    }
    return out;
}

ConvGrads conv2d_vjp(const Tensor& input, const ConvSpec& spec, const Tensor& weights, const Tensor& out_grad)
{
    check_conv_shapes(input, spec, weights);
    const Index h = input.dim(1);
    const Index w = input.dim(2);
    const Index ho = spec.out_height(h);
    const Index wo = spec.out_width(w);
    if (out_grad.shape() != std::vector<Index>{spec.out_channels, ho, wo}) {
        throw std::invalid_argument("conv2d_vjp: out_grad shape " + out_grad.shape_string()
                                    + " does not match output shape "
                                    + Tensor({spec.out_channels, ho, wo}).shape_string());
    }

    ConvGrads g{Tensor(input.shape()), Tensor(spec.weight_shape()), Tensor({spec.out_channels})};
    const double* in = input.data().data();
    const double* wt = weights.data().data();
    const double* og = out_grad.data().data();
    double* gin = g.input.data().data();
    double* gw = g.weight.data().data();

    for (Index o = 0; o < spec.out_channels; ++o) {
        if (spec.bias) {
            g.bias[o] = ConstArrayMap(og + o * ho * wo, ho * wo).sum();
        }
        for (Index y = 0; y < ho; ++y) {
            ConstArrayMap grow(og + (o * ho + y) * wo, wo);
            for (Index ky = 0; ky < spec.kernel_h; ++ky) {
                const Index yy = y + ky * spec.dilation - spec.pad;
                if (yy < 0 || yy >= h) {
                    continue;
                }
                for (Index kx = 0; kx < spec.kernel_w; ++kx) {
                    const Index dx = kx * spec.dilation - spec.pad;
                    const auto [lo, hi] = tap_range(wo, w, dx);
                    if (hi <= lo) {
                        continue;
                    }
                    const auto gseg = grow.segment(lo, hi - lo);
                    for (Index i = 0; i < spec.in_channels; ++i) {
                        const Index widx = ((o * spec.kernel_h + ky) * spec.kernel_w + kx) * spec.in_channels + i;
                        const Index row = (i * h + yy) * w + lo + dx;
                        gw[widx] += (gseg * ConstArrayMap(in + row, hi - lo)).sum();
                        ArrayMap(gin + row, hi - lo) += wt[widx] * gseg;
                    }
                }
            }
        }
    }
    return g;
}

Tensor relu(const Tensor& input)
{
    Tensor out = input;
    relu_inplace(out);
    return out;
}

void relu_inplace(Tensor& t)
{
    t.data() = t.data().cwiseMax(0.0);
}

Tensor relu_vjp(const Tensor& input, const Tensor& out_grad)
{
    if (input.shape() != out_grad.shape()) {
        throw std::invalid_argument("relu_vjp: shape mismatch " + input.shape_string() + " vs "
                                    + out_grad.shape_string());
    }
    Tensor g(input.shape());
    g.data().array() = out_grad.data().array() * (input.data().array() > 0.0).cast<double>();
    return g;
}

Eigen::VectorXd gaussian_kernel(double sigma, bool normalize)
{
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("gaussian_kernel: sigma must be nonnegative");
    }
    const Index radius = static_cast<Index>(std::ceil(3.0 * sigma));
    Eigen::VectorXd k(2 * radius + 1);
    if (radius == 0) {
        k[0] = 1.0;
        return k;
    }
    for (Index i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    }
    if (normalize) {
        k /= k.sum();
    }
    return k;
}

namespace {

// One separable pass along rows (horizontal) of `src` into `dst`.
void blur_rows(const RowMatrixXd& src, RowMatrixXd& dst, const Eigen::VectorXd& k, bool replicate)
{
    const Index radius = (k.size() - 1) / 2;
    const Index w = src.cols();
    dst.setZero(src.rows(), w);
    for (Index y = 0; y < src.rows(); ++y) {
        for (Index x = 0; x < w; ++x) {
            double acc = 0.0;
            for (Index t = -radius; t <= radius; ++t) {
                Index xx = x + t;
                if (xx < 0 || xx >= w) {
                    if (!replicate) {
                        continue;
                    }
                    xx = std::clamp<Index>(xx, 0, w - 1);
                }
                acc += k[t + radius] * src(y, xx);
            }
            dst(y, x) = acc;
        }
    }
}

} // namespace

RowMatrixXd gaussian_blur(const Eigen::Ref<const RowMatrixXd>& plane, double sigma, BlurMode mode)
{
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("gaussian_blur: sigma must be nonnegative");
    }
    if (sigma == 0.0) {
        return plane;
    }
    const bool normalize = mode == BlurMode::normalized_replicate;
    const Eigen::VectorXd k = gaussian_kernel(sigma, normalize);
    RowMatrixXd tmp;
    RowMatrixXd out;
    blur_rows(plane, tmp, k, normalize);
    RowMatrixXd tmp_t = tmp.transpose();
    blur_rows(tmp_t, out, k, normalize);
    return out.transpose();
}

Tensor gaussian_blur(const Tensor& input, double sigma, BlurMode mode)
{
    if (input.rank() != 3) {
        throw std::invalid_argument("gaussian_blur: expected a CxHxW tensor, got " + input.shape_string());
    }
    Tensor out(input.shape());
    for (Index c = 0; c < input.dim(0); ++c) {
        out.plane(c) = gaussian_blur(input.plane(c), sigma, mode);
    }
    return out;
}

} // namespace lnet
