#ifndef LNET_FHT_HPP
#define LNET_FHT_HPP

#include "lnet/geometry.hpp"
#include "lnet/tensor.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lnet {

template <typename Scalar>
using Image = RowMatrix<Scalar>;
using GrayImage = Image<double>;

/// Discrete line addressing one Hough cell.
///
/// In the canonical frame (quadrant 0) the pattern starts at column
/// `offset_x` on row 0 and ends at column `offset_x + shift_s` on row N-1,
/// with exactly one pixel per row. The other quadrants reuse the canonical
/// pattern on a transposed and/or column-mirrored image:
///
///   quadrant | canonical (cx, cy) -> image (x, y) | inclination from the Y axis
///   0        | (cx, cy)                           | [0, 45]
///   1        | (cy, cx)          transpose        | (45, 90]
///   2        | (N-1-cx, cy)      mirror           | (-45, 0)
///   3        | (cy, N-1-cx)      transpose+mirror | (-90, -45]
struct DyadicLine {
    int quadrant = 0;
    Index offset_x = 0;
    Index shift_s = 0;
    Index n = 1;

    friend bool operator==(const DyadicLine&, const DyadicLine&) = default;
};

struct Pixel {
    Index x;
    Index y;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

bool is_power_of_two(Index n);
bool is_valid(const DyadicLine& line);

/// Cells whose pattern lies entirely left of the image: offset_x < 0 and |offset_x| > shift_s.
inline bool in_zero_region(Index offset_x, Index shift_s) { return offset_x < 0 && -offset_x > shift_s; }
inline bool in_zero_region(const DyadicLine& line) { return in_zero_region(line.offset_x, line.shift_s); }

/// Canonical pattern columns for rows 0..n-1 (unclipped).
std::vector<Index> canonical_columns(Index offset_x, Index shift_s, Index n);

/// In-image pixels of the line's pattern, in image coordinates.
std::vector<Pixel> dyadic_pattern(const DyadicLine& line);

Point canonical_to_image(int quadrant, const Point& canonical, Index n);
Point image_to_canonical(int quadrant, const Point& image, Index n);

/// Four Hough planes of N rows (shift 0..N-1) by 2N-1 columns (offset -(N-1)..N-1).
template <typename Scalar>
struct HoughMap {
    Index n = 0;
    std::array<Image<Scalar>, 4> planes;

    HoughMap() = default;
    explicit HoughMap(Index size) : n(size)
    {
        for (auto& p : planes) {
            p = Image<Scalar>::Zero(size, 2 * size - 1);
        }
    }

    Index width() const { return 2 * n - 1; }
    Index cell_count() const { return 4 * n * width(); }

    Scalar& operator()(int q, Index s, Index x) { return planes[q](s, x + n - 1); }
    Scalar operator()(int q, Index s, Index x) const { return planes[q](s, x + n - 1); }
    Scalar& operator()(const DyadicLine& l) { return (*this)(l.quadrant, l.shift_s, l.offset_x); }
    Scalar operator()(const DyadicLine& l) const { return (*this)(l.quadrant, l.shift_s, l.offset_x); }

    Scalar max_coeff() const
    {
        Scalar m = planes[0].maxCoeff();
        for (int q = 1; q < 4; ++q) {
            m = std::max(m, planes[q].maxCoeff());
        }
        return m;
    }
};

/// Channel-stacked view for the network: a 4 x N x (2N-1) tensor.
Tensor to_tensor(const HoughMap<double>& map);
HoughMap<double> hough_from_tensor(const Tensor& t);

namespace detail {

inline void check_square_pow2(Index rows, Index cols, const char* who)
{
    if (rows != cols || !is_power_of_two(rows)) {
        throw std::invalid_argument(std::string(who) + ": image must be N x N with N a power of two, got "
                                    + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

/// Butterfly over dyadic patterns of the canonical image: each level merges
/// pairs of half-height blocks, so the whole transform costs (2N-1) N log2 N
/// additions. Row s of a block of height h holds patterns with shift s;
/// the bottom half contributes (x, s/2) and the top half (x + ceil(s/2), s/2).
/// `mirror` reverses every row of the source first (the column-mirrored quadrants).
template <typename Scalar>
Image<Scalar> canonical_fht(const Image<Scalar>& canon, bool mirror = false)
{
    const Index n = canon.rows();
    const Index w = 2 * n - 1;
    Image<Scalar> cur = Image<Scalar>::Zero(n, w);
    if (mirror) {
        cur.rightCols(n) = canon.rowwise().reverse();
    }
    else {
        cur.rightCols(n) = canon;
    }
    Image<Scalar> next = Image<Scalar>::Zero(n, w);

    // One merge level over rows [base, base + 2h). Inputs are zero left of
    // column n - h, so the output is zero left of n - h - shift; both buffers
    // already hold zeros there.
    auto merge = [n, w](const Image<Scalar>& src, Image<Scalar>& dst, Index base, Index h) {
        for (Index s = 0; s < 2 * h; ++s) {
            const Index half_s = s / 2;
            const Index shift = half_s + (s & 1);
            const Index c0 = std::max<Index>(0, n - h - shift);
            const Scalar* lo = src.row(base + half_s).data();
            const Scalar* hi = src.row(base + h + half_s).data() + shift;
            Scalar* out = dst.row(base + s).data();
            for (Index c = c0; c < w - shift; ++c) {
                out[c] = lo[c] + hi[c];
            }
            std::copy(lo + (w - shift), lo + w, out + (w - shift));
        }
    };

    // The last two levels in one pass over the four quarter blocks. For large
    // N the full buffers no longer fit in cache, so this saves a round trip.
    auto merge_top = [n, w](const Image<Scalar>& src, Image<Scalar>& dst) {
        const Index q = n / 4;
        auto add_shifted = [w](Scalar* out, const Scalar* in, Index shift) {
            for (Index c = 0; c + shift < w; ++c) {
                out[c] += in[c + shift];
            }
        };
        for (Index s = 0; s < n; ++s) {
            const Index r = s / 2;
            const Index sh_s = r + (s & 1);
            const Index sh_r = r / 2 + (r & 1);
            Scalar* out = dst.row(s).data();
            const Scalar* b0 = src.row(r / 2).data();
            std::copy(b0, b0 + w, out);
            add_shifted(out, src.row(q + r / 2).data(), sh_r);
            add_shifted(out, src.row(2 * q + r / 2).data(), sh_s);
            add_shifted(out, src.row(3 * q + r / 2).data(), sh_s + sh_r);
        }
    };

    // Depth-first over row blocks, so a merge reads rows its children have
    // just written while they are still in cache. The level merging halves
    // of size h reads buffer log2(h) % 2.
    std::array<Image<Scalar>*, 2> buf{&cur, &next};
    int depth = 0;
    while ((Index{1} << depth) < n) {
        ++depth;
    }
    auto run = [&](auto&& self, Index base, Index size, int level) -> void {
        if (size == 1) {
            return;
        }
        self(self, base, size / 2, level - 1);
        self(self, base + size / 2, size / 2, level - 1);
        merge(*buf[level % 2], *buf[(level + 1) % 2], base, size / 2);
    };
    if (n < 4) {
        run(run, 0, n, depth - 1);
        return depth % 2 == 1 ? next : cur;
    }
    for (Index k = 0; k < 4; ++k) {
        run(run, k * (n / 4), n / 4, depth - 3);
    }
    // The quarters end up in buffer (depth - 2) % 2; the fused pass writes the other one.
    merge_top(*buf[depth % 2], *buf[(depth + 1) % 2]);
    return depth % 2 == 0 ? next : cur;
}

/// Transpose of canonical_fht: runs the butterfly backwards.
template <typename Scalar>
Image<Scalar> canonical_fht_adjoint(const Image<Scalar>& grad)
{
    const Index n = grad.rows();
    const Index w = 2 * n - 1;
    Image<Scalar> cur = grad;
    Image<Scalar> next(n, w);
    for (Index h = n / 2; h >= 1; h /= 2) {
        for (Index base = 0; base < n; base += 2 * h) {
            // Rows 2k and 2k + 1 of the merged block both came from row k of
            // each half; the upper half was read shifted by k and k + 1.
            for (Index k = 0; k < h; ++k) {
                const Scalar* even = cur.row(base + 2 * k).data();
                const Scalar* odd = cur.row(base + 2 * k + 1).data();
                Scalar* lo = next.row(base + k).data();
                Scalar* hi = next.row(base + h + k).data();
                for (Index c = 0; c < w; ++c) {
                    lo[c] = even[c] + odd[c];
                }
                const Index s0 = k;
                const Index s1 = k + 1;
                for (Index c = 0; c < std::min(s0, w); ++c) {
                    hi[c] = Scalar{0};
                }
                if (s0 < w) {
                    hi[s0] = even[0];
                }
                for (Index c = s1; c < w; ++c) {
                    hi[c] = even[c - s0] + odd[c - s1];
                }
            }
        }
        std::swap(cur, next);
    }
    return cur.rightCols(n);
}

template <typename Scalar>
Image<Scalar> to_canonical(int quadrant, const Image<Scalar>& img)
{
    switch (quadrant) {
    case 0: return img;
    case 1: return img.transpose();
    case 2: return img.rowwise().reverse();
    default: return img.transpose().rowwise().reverse();
    }
}

template <typename Scalar>
Image<Scalar> from_canonical(int quadrant, const Image<Scalar>& canon)
{
    switch (quadrant) {
    case 0: return canon;
    case 1: return canon.transpose();
    case 2: return canon.rowwise().reverse();
    default: return Image<Scalar>(canon.rowwise().reverse()).transpose();
    }
}

} // namespace detail

/// Fast Hough transform over dyadic patterns in O(N^2 log N).
template <typename Derived>
HoughMap<typename Derived::Scalar> fht_forward(const Eigen::MatrixBase<Derived>& image)
{
    using Scalar = typename Derived::Scalar;
    detail::check_square_pow2(image.rows(), image.cols(), "fht_forward");
    const Image<Scalar> img = image;
    const Image<Scalar> img_t = img.transpose();
    HoughMap<Scalar> out;
    out.n = img.rows();
    out.planes[0] = detail::canonical_fht<Scalar>(img, false);
    out.planes[1] = detail::canonical_fht<Scalar>(img_t, false);
    out.planes[2] = detail::canonical_fht<Scalar>(img, true);
    out.planes[3] = detail::canonical_fht<Scalar>(img_t, true);
    return out;
}

/// Adjoint of fht_forward: every pixel collects the cotangent of each cell whose pattern covers it.
template <typename Scalar>
Image<Scalar> fht_vjp(const HoughMap<Scalar>& out_grad)
{
    const Index n = out_grad.n;
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("fht_vjp: size must be a power of two, got " + std::to_string(n));
    }
    Image<Scalar> grad = Image<Scalar>::Zero(n, n);
    for (int q = 0; q < 4; ++q) {
        const auto& p = out_grad.planes[q];
        if (p.rows() != n || p.cols() != 2 * n - 1) {
            throw std::invalid_argument("fht_vjp: plane " + std::to_string(q) + " has shape "
                                        + std::to_string(p.rows()) + "x" + std::to_string(p.cols())
                                        + ", expected " + std::to_string(n) + "x" + std::to_string(2 * n - 1));
        }
        grad += detail::from_canonical<Scalar>(q, detail::canonical_fht_adjoint<Scalar>(p));
    }
    return grad;
}

/// Brute-force O(N^3) reference: direct summation over every cell's pattern.
template <typename Derived>
HoughMap<typename Derived::Scalar> slow_hough_oracle(const Eigen::MatrixBase<Derived>& image)
{
    using Scalar = typename Derived::Scalar;
    detail::check_square_pow2(image.rows(), image.cols(), "slow_hough_oracle");
    const Index n = image.rows();
    HoughMap<Scalar> out(n);
    for (int q = 0; q < 4; ++q) {
        for (Index s = 0; s < n; ++s) {
            for (Index x = -(n - 1); x <= n - 1; ++x) {
                Scalar acc{0};
                for (const Pixel& p : dyadic_pattern(DyadicLine{q, x, s, n})) {
                    acc += image(p.y, p.x);
                }
                out(q, s, x) = acc;
            }
        }
    }
    return out;
}

/// Number of in-image pixels on each cell's pattern.
HoughMap<double> pattern_lengths(Index n);

/// Continuous line through the cell's canonical end points, clipped to the frame.
/// Throws for zero-region cells and cells whose line only grazes a frame corner.
BoundaryLine line_from_cell(const DyadicLine& line);

/// True when line_from_cell succeeds for this cell.
bool has_frame_line(const DyadicLine& line);

/// Quantizes a frame line to the Hough cell that best represents it.
DyadicLine cell_from_line(const BoundaryLine& line);

/// Quadrant of a direction under the half-open interval convention.
int quadrant_of(const Point& direction);

} // namespace lnet

#endif // LNET_FHT_HPP
