#include "objir/warp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "objir/parallel.hpp"

namespace objir {

PixelRect intersect(const PixelRect& a, const PixelRect& b) {
    const int x0 = std::max(a.x0, b.x0);
    const int y0 = std::max(a.y0, b.y0);
    const int x1 = std::min(a.x1(), b.x1());
    const int y1 = std::min(a.y1(), b.y1());
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

PixelRect pixel_rect_of(const ObjectBox& box) {
    const int x0 = static_cast<int>(std::ceil(box.x0 - 0.5));
    const int y0 = static_cast<int>(std::ceil(box.y0 - 0.5));
    const int x1 = static_cast<int>(std::floor(box.x1 - 0.5)) + 1;
    const int y1 = static_cast<int>(std::floor(box.y1 - 0.5)) + 1;
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

void sample_bilinear(const Image& img, const Vec2& p, std::span<float> out) {
    const int w = img.width();
    const int h = img.height();
    const double x = std::clamp(p.x, 0.5, w - 0.5) - 0.5;
    const double y = std::clamp(p.y, 0.5, h - 0.5) - 0.5;
    const int xa = std::min(static_cast<int>(x), w - 1);
    const int ya = std::min(static_cast<int>(y), h - 1);
    const int xb = std::min(xa + 1, w - 1);
    const int yb = std::min(ya + 1, h - 1);
    const double fx = x - xa;
    const double fy = y - ya;
    const double w00 = (1 - fx) * (1 - fy);
    const double w01 = fx * (1 - fy);
    const double w10 = (1 - fx) * fy;
    const double w11 = fx * fy;
    const auto a = img.pixel(xa, ya);
    const auto b = img.pixel(xb, ya);
    const auto c = img.pixel(xa, yb);
    const auto d = img.pixel(xb, yb);
    for (int k = 0; k < img.channels(); ++k) {
        const double val = w00 * a[k] + w01 * b[k] + w10 * c[k] + w11 * d[k];
        out[k] = static_cast<float>(std::clamp(val, 0.0, 1.0));
    }
}

std::vector<float> sample_bilinear(const Image& img, const Vec2& p) {
    std::vector<float> out(static_cast<std::size_t>(img.channels()));
    sample_bilinear(img, p, out);
    return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
    if (width <= 0 || height <= 0) throw InvalidArgument("resize target must be positive");
    Image out(width, height, img.channels());
    const double kx = static_cast<double>(img.width()) / width;
    const double ky = static_cast<double>(img.height()) / height;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            sample_bilinear(img, {(c + 0.5) * kx, (r + 0.5) * ky}, out.pixel(c, r));
        }
    }
    return out;
}

namespace {

// Warps rows [row_begin, row_end) of `rect` into `out` (rect-local coordinates).
std::size_t warp_rows(const Image& input, const Mesh& src, const Mesh& dst, bool dst_rigid,
                      const PixelRect& rect, int row_begin, int row_end, Image& out) {
    std::size_t uncovered = 0;
    const double w = dst.width();
    const double h = dst.height();
    for (int r = row_begin; r < row_end; ++r) {
        std::optional<CellCoord> hint;
        for (int c = 0; c < rect.w; ++c) {
            const Vec2 q{rect.x0 + c + 0.5, rect.y0 + r + 0.5};
            std::optional<CellCoord> cell;
            if (dst_rigid) {
                if (q.x >= 0 && q.x <= w && q.y >= 0 && q.y <= h) cell = locate_in_rigid(dst, q);
            } else {
                cell = try_locate(dst, q, hint);
            }
            auto px = out.pixel(c, r);
            if (!cell) {
                std::fill(px.begin(), px.end(), 0.0f);
                ++uncovered;
                continue;
            }
            hint = cell;
            sample_bilinear(input, src.eval(cell->row, cell->col, cell->u, cell->v), px);
        }
    }
    return uncovered;
}

}  // namespace

std::size_t warp_region(const Image& input, const Mesh& src, const Mesh& dst,
                        const PixelRect& rect, Image& out) {
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
        throw InvalidArgument("meshes must share rows and cols");
    }
    if (out.width() != rect.w || out.height() != rect.h || out.channels() != input.channels()) {
        out = Image(std::max(rect.w, 0), std::max(rect.h, 0), input.channels());
    }
    if (rect.empty()) return 0;
    return warp_rows(input, src, dst, dst.is_rigid(), rect, 0, rect.h, out);
}

WarpResult warp_image(const Image& input, const Mesh& src, const Mesh& dst, int out_width,
                      int out_height) {
    if (out_width <= 0 || out_height <= 0) throw InvalidArgument("output size must be positive");
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
        throw InvalidArgument("meshes must share rows and cols");
    }
    WarpResult res{Image(out_width, out_height, input.channels()), 0};
    const PixelRect rect{0, 0, out_width, out_height};
    const bool rigid = dst.is_rigid();

    // Fixed-size row bands; each band writes disjoint rows, so the image is
    // identical for any thread count.
    constexpr int kBand = 16;
    const int bands = (out_height + kBand - 1) / kBand;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bands), 0);
    parallel_for(bands, thread_count(), [&](int b) {
        const int r0 = b * kBand;
        const int r1 = std::min(out_height, r0 + kBand);
        counts[static_cast<std::size_t>(b)] = warp_rows(input, src, dst, rigid, rect, r0, r1, res.image);
    });
    for (std::size_t c : counts) res.uncovered += c;
    return res;
}

WarpResult retarget_warp(const Image& input, const Mesh& mesh_in, const Mesh& mesh_out,
                         int out_width, int out_height) {
    const auto folded = check_foldover(mesh_out);
    if (!folded.empty()) {
        std::ostringstream os;
        os << "output mesh has fold-over in " << folded.size() << " cell(s):";
        for (const auto& c : folded) os << " (" << c.row << "," << c.col << ")";
        throw FoldOverError(os.str(), folded);
    }
    return warp_image(input, mesh_in, mesh_out, out_width, out_height);
}

}  // namespace objir
