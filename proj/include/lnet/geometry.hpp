#ifndef LNET_GEOMETRY_HPP
#define LNET_GEOMETRY_HPP

#include <Eigen/Core>

#include <optional>

namespace lnet {

using Point = Eigen::Vector2d;

/// A line through an N x N image, stored as its two intersections with the
/// frame [0, N-1] x [0, N-1]. Coordinates are (x, y) in pixel units with the
/// origin at the top-left pixel center.
struct BoundaryLine {
    Point p0 = Point::Zero();
    Point p1 = Point::Zero();
    Eigen::Index n = 0;

    /// Clips the infinite line through a and b to the frame. Returns nullopt
    /// when a == b or when the line misses the frame or only touches a corner.
    static std::optional<BoundaryLine> through(const Point& a, const Point& b, Eigen::Index n);

    /// Throws std::invalid_argument if the endpoints coincide or leave the frame.
    void validate() const;
};

bool on_frame(const Point& p, Eigen::Index n, double tol = 1e-9);

/// Mean distance between matching ends, minimized over the two pairings.
double line_distance(const BoundaryLine& a, const BoundaryLine& b);

/// Euclidean distance from a point to the infinite line.
double point_line_distance(const Point& p, const BoundaryLine& line);

} // namespace lnet

#endif // LNET_GEOMETRY_HPP
