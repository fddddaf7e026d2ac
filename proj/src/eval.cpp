#include "lnet/eval.hpp"

#include "lnet/pngio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace lnet {

MatchResult match(const std::vector<BoundaryLine>& gt, const std::vector<Detection>& dets, const MatchConfig& cfg,
                  double conf_threshold)
{
    if (!(cfg.distance_threshold > 0.0)) {
        throw std::invalid_argument("match: distance_threshold must be positive");
    }
    MatchResult r;
    std::vector<bool> available(dets.size());
    long kept = 0;
    for (std::size_t j = 0; j < dets.size(); ++j) {
        available[j] = dets[j].confidence >= conf_threshold;
        kept += available[j] ? 1 : 0;
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
        std::size_t best = dets.size();
        double best_conf = 0.0;
        double best_dist = 0.0;
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (!available[j]) {
                continue;
            }
            const double d = line_distance(gt[i], dets[j].line);
            if (d > cfg.distance_threshold) {
                continue;
            }
            const double c = dets[j].confidence;
            if (best == dets.size() || c > best_conf || (c == best_conf && d < best_dist)) {
                best = j;
                best_conf = c;
                best_dist = d;
            }
        }
        if (best != dets.size()) {
            available[best] = false;
            r.pairs.emplace_back(i, best);
        }
    }
    r.tp = static_cast<long>(r.pairs.size());
    r.fp = kept - r.tp;
    r.fn = static_cast<long>(gt.size()) - r.tp;
    return r;
}

PRCurve pr_curve(const std::vector<SampleResult>& results, const MatchConfig& cfg)
{
    if (results.empty()) {
        throw std::invalid_argument("pr_curve: empty dataset");
    }
    // Only detections within the distance threshold of some ground-truth line
    // can ever match, so each sample's TP count changes only at their
    // confidences. Collect those changes as events, then sweep.
    long total_gt = 0;
    std::vector<double> confidences;
    std::map<double, long, std::greater<>> tp_events;
    for (const auto& s : results) {
        total_gt += static_cast<long>(s.gt.size());
        std::vector<Detection> near;
        for (const auto& d : s.dets) {
            confidences.push_back(d.confidence);
            for (const auto& g : s.gt) {
                if (line_distance(g, d.line) <= cfg.distance_threshold) {
                    near.push_back(d);
                    break;
                }
            }
        }
        std::vector<double> levels;
        for (const auto& d : near) {
            levels.push_back(d.confidence);
        }
        std::sort(levels.begin(), levels.end(), std::greater<>());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        long prev = 0;
        for (double t : levels) {
            const long tp = match(s.gt, near, cfg, t).tp;
            if (tp != prev) {
                tp_events[t] += tp - prev;
                prev = tp;
            }
        }
    }
    std::sort(confidences.begin(), confidences.end(), std::greater<>());

    PRCurve curve;
    auto push = [&](double threshold, long dets_above, long tp) {
        PRPoint p;
        p.threshold = threshold;
        p.tp = tp;
        p.fp = dets_above - tp;
        p.fn = total_gt - tp;
        p.precision = dets_above == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(dets_above);
        p.recall = total_gt == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
        curve.points.push_back(p);
    };
    push(std::numeric_limits<double>::infinity(), 0, 0);
    long tp = 0;
    auto ev = tp_events.begin();
    for (std::size_t i = 0; i < confidences.size();) {
        const double t = confidences[i];
        while (i < confidences.size() && confidences[i] == t) {
            ++i;
        }
        for (; ev != tp_events.end() && ev->first >= t; ++ev) {
            tp += ev->second;
        }
        push(t, static_cast<long>(i), tp);
    }
    return curve;
}

Summary summarize(const PRCurve& curve)
{
    if (curve.points.empty()) {
        throw std::invalid_argument("summarize: empty curve");
    }
    const auto& pts = curve.points;
    std::vector<double> envelope(pts.size());
    double running = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
        running = std::max(running, pts[i].precision);
        envelope[i] = running;
    }
    Summary s;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s.ap += (pts[i].recall - prev_recall) * envelope[i];
        prev_recall = std::max(prev_recall, pts[i].recall);
    }
    for (const auto& p : pts) {
        if (p.recall >= 0.9) {
            s.p_at_90r = std::max(s.p_at_90r, p.precision);
        }
        if (p.precision >= 0.9) {
            s.r_at_90p = std::max(s.r_at_90p, p.recall);
        }
    }
    s.ap *= 100.0;
    s.p_at_90r *= 100.0;
    s.r_at_90p *= 100.0;
    return s;
}

void write_pr_csv(const PRCurve& curve, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    os << "threshold,precision,recall,tp,fp,fn\n";
    char buf[160];
    for (const auto& p : curve.points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%ld,%ld,%ld\n", p.threshold, p.precision, p.recall, p.tp,
                      p.fp, p.fn);
        os << buf;
    }
    if (!os) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

void write_pr_plot(const PRCurve& curve, const std::filesystem::path& path, int size)
{
    const int margin = size / 10;
    const int span = size - 2 * margin;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size) * size * 3, 255);
    auto put = [&](int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x < 0 || y < 0 || x >= size || y >= size) {
            return;
        }
        auto* px = &rgb[(static_cast<std::size_t>(y) * size + x) * 3];
        px[0] = r;
        px[1] = g;
        px[2] = b;
    };
    auto segment = [&](int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
        for (int i = 0; i <= steps; ++i) {
            put(x0 + (x1 - x0) * i / steps, y0 + (y1 - y0) * i / steps, r, g, b);
        }
    };
    auto to_px = [&](double recall, double precision) {
        return std::pair<int, int>{margin + static_cast<int>(std::lround(recall * span)),
                                   margin + static_cast<int>(std::lround((1.0 - precision) * span))};
    };
    // Axes box and 10% grid.
    for (int k = 0; k <= 10; ++k) {
        const int o = margin + span * k / 10;
        const std::uint8_t shade = (k == 0 || k == 10) ? 0 : 220;
        segment(o, margin, o, margin + span, shade, shade, shade);
        segment(margin, o, margin + span, o, shade, shade, shade);
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto [x0, y0] = to_px(curve.points[i - 1].recall, curve.points[i - 1].precision);
        const auto [x1, y1] = to_px(curve.points[i].recall, curve.points[i].precision);
        segment(x0, y0, x1, y1, 20, 60, 200);
    }
    write_rgb_png(path, rgb, size, size);
}

} // namespace lnet
