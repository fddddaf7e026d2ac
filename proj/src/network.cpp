#include "lnet/network.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lnet {

using nlohmann::json;

std::string to_string(Variant v)
{
    return v == Variant::fast ? "fast" : "acc";
}

Variant variant_from_string(const std::string& name)
{
    if (name == "fast") {
        return Variant::fast;
    }
    if (name == "acc") {
        return Variant::acc;
    }
    throw std::invalid_argument("unknown LNet variant '" + name + "' (expected fast or acc)");
}

Index LNetArch::param_count() const
{
    Index total = 0;
    for (std::size_t i = 0; i < layer_count(); ++i) {
        total += layer(i).param_count();
    }
    return total;
}

namespace {

ConvSpec conv(Index out, Index kh, Index kw, Index in, Index pad, Index dilation)
{
    return ConvSpec{out, kh, kw, in, pad, dilation, true};
}

} // namespace

LNetArch build(Variant variant)
{
    LNetArch arch;
    arch.variant = variant;
    if (variant == Variant::fast) {
        arch.conv_a = {conv(1, 3, 3, 1, 1, 1)};
        arch.conv_b = {conv(4, 3, 3, 1, 1, 1), conv(1, 1, 1, 4, 0, 1)};
    }
    else {
        arch.conv_a = {conv(4, 3, 3, 1, 1, 1), conv(1, 3, 3, 4, 1, 1)};
        arch.conv_b = {conv(8, 3, 3, 1, 1, 1), conv(8, 3, 3, 8, 2, 2), conv(8, 3, 3, 8, 3, 3), conv(1, 1, 1, 8, 0, 1)};
    }
    return arch;
}

LNetArch build(const std::string& variant)
{
    return build(variant_from_string(variant));
}

Eigen::VectorXd LNetModel::flat() const
{
    Eigen::VectorXd out(param_count());
    Index pos = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.segment(pos, weights[i].size()) = weights[i].data();
        pos += weights[i].size();
        out.segment(pos, biases[i].size()) = biases[i].data();
        pos += biases[i].size();
    }
    return out;
}

void LNetModel::set_flat(const Eigen::Ref<const Eigen::VectorXd>& params)
{
    if (params.size() != param_count()) {
        throw std::invalid_argument("set_flat: expected " + std::to_string(param_count()) + " parameters, got "
                                    + std::to_string(params.size()));
    }
    Index pos = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i].data() = params.segment(pos, weights[i].size());
        pos += weights[i].size();
        biases[i].data() = params.segment(pos, biases[i].size());
        pos += biases[i].size();
    }
}

bool LNetModel::all_finite() const
{
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!weights[i].all_finite() || !biases[i].all_finite()) {
            return false;
        }
    }
    return true;
}

LNetModel zero_model(const LNetArch& arch)
{
    LNetModel m;
    m.arch = arch;
    for (std::size_t i = 0; i < arch.layer_count(); ++i) {
        const ConvSpec& spec = arch.layer(i);
        m.weights.emplace_back(spec.weight_shape());
        m.biases.emplace_back(std::vector<Index>{spec.out_channels});
    }
    return m;
}

LNetModel init_weights(const LNetArch& arch, Rng& rng, double noise_scale)
{
    LNetModel m = zero_model(arch);
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        const ConvSpec& spec = arch.layer(l);
        Tensor& w = m.weights[l];
        auto at = [&](Index o, Index ky, Index kx, Index i) -> double& {
            return w[((o * spec.kernel_h + ky) * spec.kernel_w + kx) * spec.in_channels + i];
        };
        const Index cy = spec.kernel_h / 2;
        const Index cx = spec.kernel_w / 2;
        for (Index o = 0; o < spec.out_channels; ++o) {
            if (spec.in_channels == 1) {
                at(o, cy, cx, 0) = 1.0;
            }
            else if (spec.out_channels == 1) {
                for (Index i = 0; i < spec.in_channels; ++i) {
                    at(o, cy, cx, i) = 1.0 / static_cast<double>(spec.in_channels);
                }
            }
            else if (o < spec.in_channels) {
                at(o, cy, cx, o) = 1.0;
            }
        }
        const double fan_in = static_cast<double>(spec.kernel_h * spec.kernel_w * spec.in_channels);
        const double bound = std::sqrt(6.0 / fan_in);
        for (Index k = 0; k < w.size(); ++k) {
            const double u = rng.uniform(-bound, bound);
            w[k] += u * noise_scale;
        }
    }
    return m;
}

LNetModel init_weights(const LNetArch& arch, std::uint64_t seed, double noise_scale)
{
    Rng rng(seed);
    LNetModel m = init_weights(arch, rng, noise_scale);
    m.seed = seed;
    return m;
}

namespace {

void check_model(const LNetModel& model)
{
    const LNetArch& arch = model.arch;
    if (model.weights.size() != arch.layer_count() || model.biases.size() != arch.layer_count()) {
        throw std::invalid_argument("LNet model: layer count does not match its architecture");
    }
    for (std::size_t i = 0; i < arch.layer_count(); ++i) {
        if (model.weights[i].shape() != arch.layer(i).weight_shape()
            || model.biases[i].size() != arch.layer(i).out_channels) {
            throw std::invalid_argument("LNet model: parameter shape mismatch at layer " + std::to_string(i));
        }
    }
}

} // namespace

ForwardTrace forward_trace(const LNetModel& model, const GrayImage& image)
{
    check_model(model);
    if (image.rows() != image.cols() || !is_power_of_two(image.rows())) {
        throw std::invalid_argument("LNet forward: image must be N x N with N a power of two, got "
                                    + std::to_string(image.rows()) + "x" + std::to_string(image.cols()));
    }
    const LNetArch& arch = model.arch;
    ForwardTrace t;
    t.input = Tensor::from_plane(image);

    const Tensor* x = &t.input;
    for (std::size_t l = 0; l < arch.conv_a.size(); ++l) {
        Tensor y = conv2d(*x, arch.conv_a[l], model.weights[l], model.biases[l]);
        relu_inplace(y);
        t.conv_a.push_back(std::move(y));
        x = &t.conv_a.back();
    }
    t.hough = fht_forward(x->plane(0));
    if (arch.normalize_hough) {
        const double scale = 1.0 / static_cast<double>(image.rows());
        for (auto& p : t.hough.planes) {
            p *= scale;
        }
    }

    const std::size_t off = arch.conv_a.size();
    t.prediction = HoughMap<double>(image.rows());
    for (int q = 0; q < 4; ++q) {
        Tensor branch = Tensor::from_plane(t.hough.planes[q]);
        auto& outs = t.conv_b[q];
        outs.reserve(arch.conv_b.size());
        const Tensor* in = &branch;
        for (std::size_t l = 0; l < arch.conv_b.size(); ++l) {
            Tensor y = conv2d(*in, arch.conv_b[l], model.weights[off + l], model.biases[off + l]);
            relu_inplace(y);
            outs.push_back(std::move(y));
            in = &outs.back();
        }
        t.prediction.planes[q] = in->plane(0);
    }
    return t;
}

HoughMap<double> forward(const LNetModel& model, const GrayImage& image)
{
    return forward_trace(model, image).prediction;
}

Gradients backward(const LNetModel& model, const ForwardTrace& t, const HoughMap<double>& out_grad)
{
    const LNetArch& arch = model.arch;
    const Index n = t.input.dim(1);
    if (out_grad.n != n) {
        throw std::invalid_argument("LNet backward: cotangent size " + std::to_string(out_grad.n)
                                    + " does not match image size " + std::to_string(n));
    }
    const std::size_t off = arch.conv_a.size();
    std::vector<Tensor> gw;
    std::vector<Tensor> gb;
    for (std::size_t i = 0; i < arch.layer_count(); ++i) {
        gw.emplace_back(arch.layer(i).weight_shape());
        gb.emplace_back(std::vector<Index>{arch.layer(i).out_channels});
    }

    // convB branches share weights; their gradients accumulate in branch order.
    HoughMap<double> hough_grad(n);
    for (int q = 0; q < 4; ++q) {
        const auto& outs = t.conv_b[q];
        Tensor branch_in = Tensor::from_plane(t.hough.planes[q]);
        Tensor g = Tensor::from_plane(out_grad.planes[q]);
        for (std::size_t l = arch.conv_b.size(); l-- > 0;) {
            g = relu_vjp(outs[l], g);
            const Tensor& in = l == 0 ? branch_in : outs[l - 1];
            ConvGrads cg = conv2d_vjp(in, arch.conv_b[l], model.weights[off + l], g);
            gw[off + l].data() += cg.weight.data();
            gb[off + l].data() += cg.bias.data();
            g = std::move(cg.input);
        }
        hough_grad.planes[q] = g.plane(0);
    }

    if (arch.normalize_hough) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& p : hough_grad.planes) {
            p *= scale;
        }
    }
    Tensor g = Tensor::from_plane(fht_vjp(hough_grad));
    for (std::size_t l = arch.conv_a.size(); l-- > 0;) {
        g = relu_vjp(t.conv_a[l], g);
        const Tensor& in = l == 0 ? t.input : t.conv_a[l - 1];
        ConvGrads cg = conv2d_vjp(in, arch.conv_a[l], model.weights[l], g);
        gw[l].data() += cg.weight.data();
        gb[l].data() += cg.bias.data();
        g = std::move(cg.input);
    }

    Gradients out;
    out.params.resize(arch.param_count());
    Index pos = 0;
    for (std::size_t i = 0; i < arch.layer_count(); ++i) {
        out.params.segment(pos, gw[i].size()) = gw[i].data();
        pos += gw[i].size();
        out.params.segment(pos, gb[i].size()) = gb[i].data();
        pos += gb[i].size();
    }
    out.input = g.plane(0);
    return out;
}

Gradients forward_backward(const LNetModel& model, const GrayImage& image, const HoughMap<double>& out_grad)
{
    return backward(model, forward_trace(model, image), out_grad);
}

FlopReport flop_count(const LNetArch& arch, Index n)
{
    FlopReport r;
    const double pixels = static_cast<double>(n * n);
    const double hough_pixels = static_cast<double>(n * (2 * n - 1));
    auto per_pixel = [](const ConvSpec& s) {
        return static_cast<double>((2 * s.kernel_h * s.kernel_w * s.in_channels + 1) * s.out_channels);
    };
    auto describe = [](const ConvSpec& s) {
        return std::to_string(s.out_channels) + "x" + std::to_string(s.kernel_h) + "x" + std::to_string(s.kernel_w)
               + "x" + std::to_string(s.in_channels);
    };
    for (const auto& s : arch.conv_a) {
        const double f = per_pixel(s) * pixels;
        r.rows.push_back({"convA", describe(s), s.param_count(), f * 1e-6});
        r.total_mflop += f * 1e-6;
        r.executed_total_mflop += f * 1e-6;
    }
    const double log_n = std::log2(static_cast<double>(n));
    const double hough = 4.0 * hough_pixels * log_n;
    r.rows.push_back({"HT", "", 0, hough * 1e-6});
    r.total_mflop += hough * 1e-6;
    r.executed_total_mflop += hough * 1e-6;
    for (const auto& s : arch.conv_b) {
        const double f = 4.0 * per_pixel(s) * pixels;
        r.rows.push_back({"convB", describe(s), s.param_count(), f * 1e-6});
        r.total_mflop += f * 1e-6;
        r.executed_total_mflop += 4.0 * per_pixel(s) * hough_pixels * 1e-6;
    }
    return r;
}

namespace {

constexpr char kMagic[8] = {'L', 'N', 'E', 'T', 'C', 'K', 'P', 'T'};
constexpr int kCheckpointSchema = 1;

json header_json(const LNetModel& m)
{
    json layers = json::array();
    for (std::size_t i = 0; i < m.arch.layer_count(); ++i) {
        const ConvSpec& s = m.arch.layer(i);
        layers.push_back(json{{"block", i < m.arch.conv_a.size() ? "convA" : "convB"},
                              {"out_channels", s.out_channels},
                              {"kernel_h", s.kernel_h},
                              {"kernel_w", s.kernel_w},
                              {"in_channels", s.in_channels},
                              {"pad", s.pad},
                              {"dilation", s.dilation},
                              {"param_count", s.param_count()}});
    }
    json meta = json::parse(m.training_metadata.empty() ? "{}" : m.training_metadata);
    return json{{"schema_version", kCheckpointSchema}, {"variant", to_string(m.arch.variant)},
                {"normalize_hough", m.arch.normalize_hough},
                {"layers", layers},                    {"param_count", m.param_count()},
                {"seed", m.seed},                      {"training", meta}};
}

void put_u64_le(std::ostream& os, std::uint64_t v)
{
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    os.write(b, 8);
}

std::uint64_t get_u64_le(const unsigned char* b)
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

} // namespace

void save_checkpoint(const LNetModel& model, const std::filesystem::path& path)
{
    check_model(model);
    const std::string header = header_json(model).dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os.write(kMagic, sizeof(kMagic));
    put_u64_le(os, header.size());
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    const Eigen::VectorXd params = model.flat();
    for (Index i = 0; i < params.size(); ++i) {
        put_u64_le(os, std::bit_cast<std::uint64_t>(params[i]));
    }
    if (!os) {
        throw std::runtime_error("failed writing checkpoint " + path.string());
    }
}

LNetModel load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open checkpoint " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 16 || std::memcmp(data, kMagic, 8) != 0) {
        throw std::runtime_error("not an LNet checkpoint: " + path.string());
    }
    const std::uint64_t header_len = get_u64_le(data + 8);
    if (bytes.size() < 16 + header_len) {
        throw std::runtime_error("truncated checkpoint header: " + path.string());
    }
    LNetModel m;
    try {
        const json h = json::parse(bytes.substr(16, header_len));
        if (h.at("schema_version").get<int>() != kCheckpointSchema) {
            throw std::runtime_error("unsupported schema_version");
        }
        LNetArch arch = build(h.at("variant").get<std::string>());
        arch.normalize_hough = h.at("normalize_hough").get<bool>();
        m = zero_model(arch);
        const auto& layers = h.at("layers");
        if (layers.size() != m.arch.layer_count()) {
            throw std::runtime_error("layer list does not match the variant");
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const ConvSpec& s = m.arch.layer(i);
            const auto& l = layers[i];
            if (l.at("out_channels").get<Index>() != s.out_channels || l.at("kernel_h").get<Index>() != s.kernel_h
                || l.at("kernel_w").get<Index>() != s.kernel_w || l.at("in_channels").get<Index>() != s.in_channels
                || l.at("pad").get<Index>() != s.pad || l.at("dilation").get<Index>() != s.dilation) {
                throw std::runtime_error("layer " + std::to_string(i) + " shape does not match the variant");
            }
        }
        m.seed = h.at("seed").get<std::uint64_t>();
        m.training_metadata = h.at("training").dump();
    }
    catch (const std::exception& ex) {
        throw std::runtime_error("invalid checkpoint header in " + path.string() + ": " + ex.what());
    }
    const Index count = m.param_count();
    if (bytes.size() != 16 + header_len + 8 * static_cast<std::uint64_t>(count)) {
        throw std::runtime_error("checkpoint " + path.string() + " parameter blob has wrong size");
    }
    Eigen::VectorXd params(count);
    for (Index i = 0; i < count; ++i) {
        params[i] = std::bit_cast<double>(get_u64_le(data + 16 + header_len + 8 * i));
    }
    m.set_flat(params);
    return m;
}

} // namespace lnet
