#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "objir/geometry.hpp"
#include "objir/image.hpp"

namespace testutil {

using namespace objir;

// Interior vertices jittered by up to `amount` of a cell; boundary vertices
// slide along their edge only. Small enough amounts never fold.
inline Mesh random_mesh(double w, double h, int rows, int cols, double amount, std::mt19937_64& rng) {
    Mesh base = build_rigid_mesh(w, h, rows, cols);
    std::uniform_real_distribution<double> d(-amount, amount);
    const double cw = w / cols;
    const double ch = h / rows;
    MotionField f(rows, cols);
    for (int i = 0; i <= rows; ++i) {
        for (int j = 0; j <= cols; ++j) {
            const bool edge_row = i == 0 || i == rows;
            const bool edge_col = j == 0 || j == cols;
            if (!edge_col) f.at(i, j).x = d(rng) * cw;
            if (!edge_row) f.at(i, j).y = d(rng) * ch;
        }
    }
    return apply_motion(base, f);
}

// Inverse bilinear by bisection on v: for a fixed v the map is a segment in u,
// and the side of q relative to that segment changes sign at the solution.
inline std::optional<CellCoord> bisect_invert(const Mesh& m, int row, int col, const Vec2& q) {
    auto side = [&](double v) {
        const Vec2 a = m.eval(row, col, 0.0, v);
        const Vec2 b = m.eval(row, col, 1.0, v);
        return cross(b - a, q - a);
    };
    double lo = -1e-3;
    double hi = 1.0 + 1e-3;
    double slo = side(lo);
    const double shi = side(hi);
    if (slo * shi > 0.0) return std::nullopt;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double sm = side(mid);
        if ((sm < 0.0) == (slo < 0.0)) {
            lo = mid;
            slo = sm;
        } else {
            hi = mid;
        }
    }
    const double v = 0.5 * (lo + hi);
    const Vec2 a = m.eval(row, col, 0.0, v);
    const Vec2 b = m.eval(row, col, 1.0, v);
    const double u = dot(q - a, b - a) / dot(b - a, b - a);
    constexpr double tol = 1e-9;
    if (u < -tol || u > 1.0 + tol || v < -tol || v > 1.0 + tol) return std::nullopt;
    return CellCoord{row, col, u, v};
}

inline std::optional<CellCoord> bisect_locate(const Mesh& m, const Vec2& q) {
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (auto cc = bisect_invert(m, r, c, q)) return cc;
        }
    }
    return std::nullopt;
}

// Direct textbook bilinear sample; independent of the library's sampler.
inline float ref_sample(const Image& img, double x, double y, int c) {
    x = std::clamp(x, 0.5, img.width() - 0.5) - 0.5;
    y = std::clamp(y, 0.5, img.height() - 0.5) - 0.5;
    const int x0 = std::min(static_cast<int>(std::floor(x)), img.width() - 1);
    const int y0 = std::min(static_cast<int>(std::floor(y)), img.height() - 1);
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
    const double bot = (1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
    return static_cast<float>((1 - fy) * top + fy * bot);
}

inline Image checkerboard(int w, int h, int square) {
    Image img(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) img.at(x, y) = ((x / square + y / square) % 2) ? 1.0f : 0.0f;
    }
    return img;
}

inline Image random_image(int w, int h, int channels, std::mt19937_64& rng) {
    Image img(w, h, channels);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    for (float& v : img.data()) v = d(rng);
    return img;
}

}  // namespace testutil
