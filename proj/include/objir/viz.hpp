#pragma once

// Diagnostic rendering: mesh and box overlays, side-by-side panels.
// No anti-aliasing; every stroke is a 1px integer raster.

#include <span>
#include <utility>
#include <vector>

#include "objir/geometry.hpp"
#include "objir/image.hpp"

namespace objir::viz {

// Per-channel stroke intensity; a single value is broadcast to all channels.
using Color = std::vector<float>;

// Integer Bresenham line from (x0,y0) to (x1,y1), endpoints included.
std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1);

Image draw_mesh_overlay(const Image& img, const Mesh& mesh, const Color& stroke);

// Each box covers pixel columns [round(x0), round(x1)) and rows
// [round(y0), round(y1)); its 1px outline is stroked.
Image draw_boxes(const Image& img, std::span<const ObjectBox> boxes, const Color& stroke);

inline constexpr int kPanelSeparator = 4;

// Horizontal concatenation with 4px white separators. Shorter panels are
// padded with black at the bottom; grayscale panels are promoted to RGB when
// any panel is RGB.
Image compose_panel(std::span<const Image> panels);

}  // namespace objir::viz
