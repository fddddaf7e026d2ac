#ifndef LNET_DETECT_HPP
#define LNET_DETECT_HPP

#include "lnet/fht.hpp"
#include "lnet/network.hpp"

#include <filesystem>
#include <vector>

namespace lnet {

struct Detection {
    BoundaryLine line;
    double confidence = 0.0;
    DyadicLine cell;
};

/// Per-plane non-maximum suppression. A cell is kept when it is >= every
/// cell of its window x window neighborhood, precedes every equal neighbor in
/// (shift, offset) order, reaches min_conf and maps to a line crossing the
/// image. Sorted by confidence, highest first.
std::vector<Detection> nms_peaks(const HoughMap<double>& map, int window, double min_conf);

/// Greedy duplicate removal in line space: walking detections from the most
/// confident, drop any within `radius` pixels (line_distance) of one already kept.
/// A radius <= 0 keeps everything.
std::vector<Detection> suppress_duplicates(const std::vector<Detection>& dets, double radius);

// Post-processing shared by both detectors. A line peak in Hough space is
// elongated along the butterfly, so a square window alone leaves duplicates of
// one line a few pixels apart. Both values were picked on a validation seed.
inline constexpr int default_nms_window = 9;
inline constexpr double default_duplicate_radius = 15.0;

struct BaselineOptions {
    int window = default_nms_window;
    double min_conf = 0.05;
    /// Divide each vote by the number of in-image pixels on its pattern.
    bool normalize_length = true;
    /// Cells with fewer in-image pattern pixels are dropped (normalized mode only).
    Index min_pattern_pixels = 1;
    double duplicate_radius = default_duplicate_radius;
    /// Keep only the most confident detections per image (0 keeps all).
    std::size_t max_detections = 100;
};

/// Normalized (or raw) Hough votes that the baseline runs NMS on.
HoughMap<double> baseline_votes(const GrayImage& image, const BaselineOptions& options);

std::vector<Detection> baseline_detect(const GrayImage& image, const BaselineOptions& options);
std::vector<Detection> baseline_detect(const GrayImage& image, int window, double min_conf);

struct LNetDetectOptions {
    int window = default_nms_window;
    double min_conf = 0.0;
    double duplicate_radius = default_duplicate_radius;
    std::size_t max_detections = 100;
};

std::vector<Detection> lnet_detect(const LNetModel& model, const GrayImage& image, const LNetDetectOptions& options);
std::vector<Detection> lnet_detect(const LNetModel& model, const GrayImage& image, int window, double min_conf);

/// [{x0, y0, x1, y1, confidence, quadrant, offset_x, shift_s}, ...]
void write_detections(const std::vector<Detection>& dets, const std::filesystem::path& path);
std::vector<Detection> read_detections(const std::filesystem::path& path, Index n);

} // namespace lnet

#endif // LNET_DETECT_HPP
