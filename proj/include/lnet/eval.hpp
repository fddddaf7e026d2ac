#ifndef LNET_EVAL_HPP
#define LNET_EVAL_HPP

#include "lnet/detect.hpp"
#include "lnet/geometry.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lnet {

struct MatchConfig {
    /// Largest end-matching distance (pixels) at which a detection can match.
    double distance_threshold = 5.0;
};

struct MatchResult {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    /// (ground-truth index, detection index) of every true positive.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Greedy matching in ground-truth order: each line takes the most confident
/// remaining detection within the threshold (ties: smaller distance, then
/// input order). Detections below conf_threshold are dropped first.
MatchResult match(const std::vector<BoundaryLine>& gt, const std::vector<Detection>& dets, const MatchConfig& cfg,
                  double conf_threshold);

struct SampleResult {
    std::string id;
    std::vector<BoundaryLine> gt;
    std::vector<Detection> dets;
};

struct PRPoint {
    double threshold = 0.0; // +inf for the empty-detection point
    double precision = 1.0;
    double recall = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

/// Points ordered by descending threshold (ascending recall).
struct PRCurve {
    std::vector<PRPoint> points;
};

/// Sweeps every distinct confidence plus +inf, aggregating counts over samples.
PRCurve pr_curve(const std::vector<SampleResult>& results, const MatchConfig& cfg);

struct Summary {
    double ap = 0.0;       // percent
    double p_at_90r = 0.0; // percent
    double r_at_90p = 0.0; // percent
};

/// All-points interpolated AP over the monotone precision envelope plus the
/// two operating-point metrics.
Summary summarize(const PRCurve& curve);

void write_pr_csv(const PRCurve& curve, const std::filesystem::path& path);
void write_pr_plot(const PRCurve& curve, const std::filesystem::path& path, int size = 400);

} // namespace lnet

#endif // LNET_EVAL_HPP
