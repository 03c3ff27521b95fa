#include "objir/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace objir::viz {

namespace {

void plot(Image& img, int x, int y, const Color& stroke) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
    auto px = img.pixel(x, y);
    for (int c = 0; c < img.channels(); ++c) {
        px[c] = stroke.size() == 1 ? stroke[0] : stroke.at(static_cast<std::size_t>(c));
    }
}

int round_px(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1) {
    std::vector<std::pair<int, int>> pts;
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        pts.emplace_back(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return pts;
}

Image draw_mesh_overlay(const Image& img, const Mesh& mesh, const Color& stroke) {
    Image out = img;
    auto line = [&](const Vec2& a, const Vec2& b) {
        for (const auto& [x, y] : bresenham(round_px(a.x), round_px(a.y), round_px(b.x), round_px(b.y))) {
            plot(out, x, y, stroke);
        }
    };
    for (int i = 0; i <= mesh.rows(); ++i) {
        for (int j = 0; j <= mesh.cols(); ++j) {
            if (j < mesh.cols()) line(mesh.vertex(i, j), mesh.vertex(i, j + 1));
            if (i < mesh.rows()) line(mesh.vertex(i, j), mesh.vertex(i + 1, j));
        }
    }
    return out;
}

Image draw_boxes(const Image& img, std::span<const ObjectBox> boxes, const Color& stroke) {
    Image out = img;
    for (const ObjectBox& b : boxes) {
        const int x0 = round_px(b.x0);
        const int y0 = round_px(b.y0);
        const int x1 = round_px(b.x1) - 1;
        const int y1 = round_px(b.y1) - 1;
        if (x1 < x0 || y1 < y0) continue;
        for (int x = x0; x <= x1; ++x) {
            plot(out, x, y0, stroke);
            plot(out, x, y1, stroke);
        }
        for (int y = y0 + 1; y < y1; ++y) {
            plot(out, x0, y, stroke);
            plot(out, x1, y, stroke);
        }
    }
    return out;
}

Image compose_panel(std::span<const Image> panels) {
    if (panels.empty()) return {};
    int width = 0;
    int height = 0;
    int channels = 1;
    for (const Image& p : panels) {
        width += p.width();
        height = std::max(height, p.height());
        channels = std::max(channels, p.channels());
    }
    width += kPanelSeparator * static_cast<int>(panels.size() - 1);
    Image out(width, height, channels, 0.0f);
    int x_off = 0;
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const Image& p = panels[k];
        for (int y = 0; y < p.height(); ++y) {
            for (int x = 0; x < p.width(); ++x) {
                for (int c = 0; c < channels; ++c) {
                    out.at(x_off + x, y, c) = p.at(x, y, p.channels() == 1 ? 0 : c);
                }
            }
        }
        x_off += p.width();
        if (k + 1 < panels.size()) {
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < kPanelSeparator; ++x) {
                    for (int c = 0; c < channels; ++c) out.at(x_off + x, y, c) = 1.0f;
                }
            }
            x_off += kPanelSeparator;
        }
    }
    return out;
}

}  // namespace objir::viz
