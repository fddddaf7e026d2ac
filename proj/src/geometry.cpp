#include "lnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lnet {

std::optional<BoundaryLine> BoundaryLine::through(const Point& a, const Point& b, Eigen::Index n)
{
    const Point d = b - a;
    if (d.squaredNorm() == 0.0 || n < 2) {
        return std::nullopt;
    }
    const double hi = static_cast<double>(n - 1);
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 2; ++axis) {
        if (d[axis] == 0.0) {
            if (a[axis] < 0.0 || a[axis] > hi) {
                return std::nullopt;
            }
            continue;
        }
        double t0 = (0.0 - a[axis]) / d[axis];
        double t1 = (hi - a[axis]) / d[axis];
        if (t0 > t1) {
            std::swap(t0, t1);
        }
        t_lo = std::max(t_lo, t0);
        t_hi = std::min(t_hi, t1);
    }
    if (!(t_hi > t_lo)) {
        return std::nullopt;
    }
    auto snap = [&](Point p) {
        for (int axis = 0; axis < 2; ++axis) {
            p[axis] = std::clamp(p[axis], 0.0, hi);
            if (std::abs(p[axis]) < 1e-9) {
                p[axis] = 0.0;
            }
            else if (std::abs(p[axis] - hi) < 1e-9) {
                p[axis] = hi;
            }
        }
        return p;
    };
    BoundaryLine line{snap(a + t_lo * d), snap(a + t_hi * d), n};
    if ((line.p1 - line.p0).norm() < 1e-9) {
        return std::nullopt;
    }
    return line;
}

bool on_frame(const Point& p, Eigen::Index n, double tol)
{
    const double hi = static_cast<double>(n - 1);
    const bool inside = p.x() >= -tol && p.x() <= hi + tol && p.y() >= -tol && p.y() <= hi + tol;
    const bool edge = std::abs(p.x()) <= tol || std::abs(p.x() - hi) <= tol || std::abs(p.y()) <= tol
                      || std::abs(p.y() - hi) <= tol;
    return inside && edge;
}

void BoundaryLine::validate() const
{
    if (p0 == p1) {
        throw std::invalid_argument("BoundaryLine: degenerate line (p0 == p1)");
    }
    if (!on_frame(p0, n) || !on_frame(p1, n)) {
        throw std::invalid_argument("BoundaryLine: endpoints must lie on the image frame");
    }
}

double line_distance(const BoundaryLine& a, const BoundaryLine& b)
{
    if (a.p0 == a.p1 || b.p0 == b.p1) {
        throw std::invalid_argument("line_distance: degenerate line");
    }
    const double straight = 0.5 * ((a.p0 - b.p0).norm() + (a.p1 - b.p1).norm());
    const double crossed = 0.5 * ((a.p0 - b.p1).norm() + (a.p1 - b.p0).norm());
    return std::min(straight, crossed);
}

double point_line_distance(const Point& p, const BoundaryLine& line)
{
    const Point d = line.p1 - line.p0;
    const Point r = p - line.p0;
    return std::abs(d.x() * r.y() - d.y() * r.x()) / d.norm();
}

} // namespace lnet
