#include "lnet/fht.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace lnet {

bool is_power_of_two(Index n)
{
    return n > 0 && (n & (n - 1)) == 0;
}

bool is_valid(const DyadicLine& line)
{
    return is_power_of_two(line.n) && line.quadrant >= 0 && line.quadrant < 4 && line.shift_s >= 0
           && line.shift_s < line.n && line.offset_x >= -(line.n - 1) && line.offset_x <= line.n - 1;
}

namespace {

void fill_columns(Index x, Index s, Index height, Index row0, std::vector<Index>& cols)
{
    if (height == 1) {
        cols[row0] = x;
        return;
    }
    const Index half = height / 2;
    const Index half_s = s / 2;
    fill_columns(x, half_s, half, row0, cols);
    fill_columns(x + half_s + (s & 1), half_s, half, row0 + half, cols);
}

} // namespace

std::vector<Index> canonical_columns(Index offset_x, Index shift_s, Index n)
{
    if (!is_power_of_two(n) || shift_s < 0 || shift_s >= n) {
        throw std::invalid_argument("canonical_columns: invalid shift or size");
    }
    std::vector<Index> cols(n);
    fill_columns(offset_x, shift_s, n, 0, cols);
    return cols;
}

Point canonical_to_image(int quadrant, const Point& c, Index n)
{
    const double m = static_cast<double>(n - 1);
    switch (quadrant) {
    case 0: return c;
    case 1: return {c.y(), c.x()};
    case 2: return {m - c.x(), c.y()};
    default: return {c.y(), m - c.x()};
    }
}

Point image_to_canonical(int quadrant, const Point& p, Index n)
{
    const double m = static_cast<double>(n - 1);
    switch (quadrant) {
    case 0: return p;
    case 1: return {p.y(), p.x()};
    case 2: return {m - p.x(), p.y()};
    default: return {m - p.y(), p.x()};
    }
}

std::vector<Pixel> dyadic_pattern(const DyadicLine& line)
{
    if (!is_valid(line)) {
        throw std::invalid_argument("dyadic_pattern: invalid DyadicLine");
    }
    const Index n = line.n;
    const auto cols = canonical_columns(line.offset_x, line.shift_s, n);
    std::vector<Pixel> pixels;
    pixels.reserve(static_cast<std::size_t>(n));
    for (Index row = 0; row < n; ++row) {
        const Index col = cols[row];
        if (col < 0 || col >= n) {
            continue;
        }
        switch (line.quadrant) {
        case 0: pixels.push_back({col, row}); break;
        case 1: pixels.push_back({row, col}); break;
        case 2: pixels.push_back({n - 1 - col, row}); break;
        default: pixels.push_back({row, n - 1 - col}); break;
        }
    }
    return pixels;
}

Tensor to_tensor(const HoughMap<double>& map)
{
    Tensor t({4, map.n, map.width()});
    for (int q = 0; q < 4; ++q) {
        t.plane(q) = map.planes[q];
    }
    return t;
}

HoughMap<double> hough_from_tensor(const Tensor& t)
{
    if (t.rank() != 3 || t.dim(0) != 4 || t.dim(2) != 2 * t.dim(1) - 1) {
        throw std::invalid_argument("hough_from_tensor: expected 4 x N x (2N-1), got " + t.shape_string());
    }
    HoughMap<double> map;
    map.n = t.dim(1);
    for (int q = 0; q < 4; ++q) {
        map.planes[q] = t.plane(q);
    }
    return map;
}

HoughMap<double> pattern_lengths(Index n)
{
    static std::mutex mutex;
    static std::map<Index, HoughMap<double>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, fht_forward(GrayImage::Ones(n, n))).first;
    }
    return it->second;
}

namespace {

std::optional<BoundaryLine> frame_line(const DyadicLine& line)
{
    if (!is_valid(line) || in_zero_region(line)) {
        return std::nullopt;
    }
    const double m = static_cast<double>(line.n - 1);
    const Point bottom(static_cast<double>(line.offset_x), 0.0);
    const Point top(static_cast<double>(line.offset_x + line.shift_s), m);
    return BoundaryLine::through(canonical_to_image(line.quadrant, bottom, line.n),
                                 canonical_to_image(line.quadrant, top, line.n), line.n);
}

// Ties toward -infinity.
Index round_half_down(double v)
{
    return static_cast<Index>(std::ceil(v - 0.5));
}

} // namespace

bool has_frame_line(const DyadicLine& line)
{
    return frame_line(line).has_value();
}

BoundaryLine line_from_cell(const DyadicLine& line)
{
    if (!is_valid(line)) {
        throw std::invalid_argument("line_from_cell: invalid DyadicLine");
    }
    if (in_zero_region(line)) {
        throw std::invalid_argument("line_from_cell: cell (q" + std::to_string(line.quadrant) + ", x="
                                    + std::to_string(line.offset_x) + ", s=" + std::to_string(line.shift_s)
                                    + ") lies in the zero region");
    }
    auto l = frame_line(line);
    if (!l) {
        throw std::invalid_argument("line_from_cell: cell only touches a frame corner");
    }
    return *l;
}

int quadrant_of(const Point& direction)
{
    Point d = direction;
    if (d.y() < 0.0 || (d.y() == 0.0 && d.x() < 0.0)) {
        d = -d;
    }
    const double dx = d.x();
    const double dy = d.y();
    if (dx >= 0.0) {
        return dx <= dy ? 0 : 1;
    }
    return -dx < dy ? 2 : 3;
}

DyadicLine cell_from_line(const BoundaryLine& line)
{
    const Point dir = line.p1 - line.p0;
    if (dir.squaredNorm() == 0.0) {
        throw std::invalid_argument("cell_from_line: degenerate line (p0 == p1)");
    }
    const Index n = line.n;
    const int q = quadrant_of(dir);
    Point c0 = image_to_canonical(q, line.p0, n);
    Point c1 = image_to_canonical(q, line.p1, n);
    if (c1.y() < c0.y()) {
        std::swap(c0, c1);
    }
    const double slope = (c1.x() - c0.x()) / (c1.y() - c0.y());
    const double offset = c0.x() - slope * c0.y();
    const double shift = slope * static_cast<double>(n - 1);

    auto clamp_cell = [n, q](Index x, Index s) {
        s = std::clamp<Index>(s, 0, n - 1);
        x = std::clamp<Index>(x, -s, n - 1);
        return DyadicLine{q, x, s, n};
    };

    // Start from the per-coordinate rounding and its 8 neighbors.
    DyadicLine best = clamp_cell(round_half_down(offset), round_half_down(shift));
    auto best_line = frame_line(best);
    double best_dist = best_line ? line_distance(*best_line, line) : std::numeric_limits<double>::infinity();
    auto consider = [&](const DyadicLine& cand) {
        const auto cand_line = frame_line(cand);
        if (!cand_line) {
            return;
        }
        const double d = line_distance(*cand_line, line);
        if (d < best_dist) {
            best = cand;
            best_dist = d;
        }
    };
    for (Index ds = -1; ds <= 1; ++ds) {
        for (Index dx = -1; dx <= 1; ++dx) {
            consider(clamp_cell(round_half_down(offset) + dx, round_half_down(shift) + ds));
        }
    }
    // Short lines clipping a corner are poorly conditioned in (x, s): sweep
    // every shift of every quadrant, pinning candidates to points of the
    // visible segment.
    const double last = static_cast<double>(n - 1);
    for (int qq : {q, (q + 1) % 4, (q + 2) % 4, (q + 3) % 4}) {
        for (double t : {0.5, 0.25, 0.75, 0.0, 1.0}) {
            const Point cm = image_to_canonical(qq, line.p0 + t * (line.p1 - line.p0), n);
            for (Index s = 0; s < n; ++s) {
                const Index x = round_half_down(cm.x() - static_cast<double>(s) * cm.y() / last);
                for (Index dx = -1; dx <= 1; ++dx) {
                    const Index xx = x + dx;
                    if (xx >= -s && xx <= n - 1) {
                        consider(DyadicLine{qq, xx, s, n});
                    }
                }
            }
        }
    }
    return best;
}

} // namespace lnet
