#include "lnet/detect.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace lnet {

using nlohmann::json;

std::vector<Detection> nms_peaks(const HoughMap<double>& map, int window, double min_conf)
{
    if (window < 3 || window % 2 == 0) {
        throw std::invalid_argument("nms_peaks: window must be odd and >= 3, got " + std::to_string(window));
    }
    const Index n = map.n;
    const Index w = map.width();
    const Index r = window / 2;
    std::vector<Detection> out;
    for (int q = 0; q < 4; ++q) {
        const auto& p = map.planes[q];
        for (Index s = 0; s < n; ++s) {
            for (Index c = 0; c < w; ++c) {
                const double v = p(s, c);
                if (!(v >= min_conf)) {
                    continue;
                }
                const Index x = c - (n - 1);
                if (in_zero_region(x, s)) {
                    continue;
                }
                bool peak = true;
                for (Index ss = std::max<Index>(0, s - r); ss <= std::min(n - 1, s + r) && peak; ++ss) {
                    for (Index cc = std::max<Index>(0, c - r); cc <= std::min(w - 1, c + r); ++cc) {
                        const double u = p(ss, cc);
                        // Equal neighbors earlier in (s, x) order win the tie.
                        if (u > v || (u == v && (ss < s || (ss == s && cc < c)))) {
                            peak = false;
                            break;
                        }
                    }
                }
                if (!peak) {
                    continue;
                }
                const DyadicLine cell{q, x, s, n};
                if (!has_frame_line(cell)) {
                    continue;
                }
                out.push_back(Detection{line_from_cell(cell), v, cell});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
    return out;
}

HoughMap<double> baseline_votes(const GrayImage& image, const BaselineOptions& options)
{
    HoughMap<double> votes = fht_forward(image);
    if (!options.normalize_length) {
        return votes;
    }
    const HoughMap<double> lengths = pattern_lengths(votes.n);
    for (int q = 0; q < 4; ++q) {
        const auto len = lengths.planes[q].array();
        votes.planes[q] = (len >= static_cast<double>(std::max<Index>(1, options.min_pattern_pixels)))
                              .select(votes.planes[q].array() / len.max(1.0), 0.0);
    }
    return votes;
}

std::vector<Detection> suppress_duplicates(const std::vector<Detection>& dets, double radius)
{
    if (radius <= 0.0) {
        return dets;
    }
    std::vector<Detection> kept;
    for (const auto& d : dets) {
        const bool dup = std::any_of(kept.begin(), kept.end(),
                                     [&](const Detection& k) { return line_distance(k.line, d.line) <= radius; });
        if (!dup) {
            kept.push_back(d);
        }
    }
    return kept;
}

namespace {

std::vector<Detection> postprocess(const std::vector<Detection>& peaks, double radius, std::size_t k)
{
    std::vector<Detection> dets = suppress_duplicates(peaks, radius);
    if (k > 0 && dets.size() > k) {
        dets.resize(k);
    }
    return dets;
}

} // namespace

std::vector<Detection> baseline_detect(const GrayImage& image, const BaselineOptions& options)
{
    return postprocess(nms_peaks(baseline_votes(image, options), options.window, options.min_conf),
                       options.duplicate_radius, options.max_detections);
}

std::vector<Detection> baseline_detect(const GrayImage& image, int window, double min_conf)
{
    BaselineOptions opts;
    opts.window = window;
    opts.min_conf = min_conf;
    opts.duplicate_radius = 0.0;
    opts.max_detections = 0;
    return baseline_detect(image, opts);
}

std::vector<Detection> lnet_detect(const LNetModel& model, const GrayImage& image, const LNetDetectOptions& options)
{
    return postprocess(nms_peaks(forward(model, image), options.window, options.min_conf), options.duplicate_radius,
                       options.max_detections);
}

std::vector<Detection> lnet_detect(const LNetModel& model, const GrayImage& image, int window, double min_conf)
{
    return nms_peaks(forward(model, image), window, min_conf);
}

void write_detections(const std::vector<Detection>& dets, const std::filesystem::path& path)
{
    json arr = json::array();
    for (const auto& d : dets) {
        arr.push_back(json{{"x0", d.line.p0.x()},
                           {"y0", d.line.p0.y()},
                           {"x1", d.line.p1.x()},
                           {"y1", d.line.p1.y()},
                           {"confidence", d.confidence},
                           {"quadrant", d.cell.quadrant},
                           {"offset_x", d.cell.offset_x},
                           {"shift_s", d.cell.shift_s}});
    }
    std::ofstream os(path, std::ios::binary);
    os << arr.dump(1) << '\n';
    if (!os) {
        throw std::runtime_error("failed writing detections " + path.string());
    }
}

std::vector<Detection> read_detections(const std::filesystem::path& path, Index n)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open detections " + path.string());
    }
    std::vector<Detection> out;
    try {
        const json arr = json::parse(is);
        for (const auto& d : arr) {
            Detection det;
            det.line = BoundaryLine{Point(d.at("x0").get<double>(), d.at("y0").get<double>()),
                                    Point(d.at("x1").get<double>(), d.at("y1").get<double>()), n};
            det.line.validate();
            det.confidence = d.at("confidence").get<double>();
            det.cell = DyadicLine{d.at("quadrant").get<int>(), d.at("offset_x").get<Index>(),
                                  d.at("shift_s").get<Index>(), n};
            out.push_back(det);
        }
    }
    catch (const std::exception& ex) {
        throw std::runtime_error("malformed detections " + path.string() + ": " + ex.what());
    }
    return out;
}

} // namespace lnet
