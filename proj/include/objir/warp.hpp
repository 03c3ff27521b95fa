#pragma once

// Backward warping of an image through a pair of meshes.

#include <span>
#include <vector>

#include "objir/geometry.hpp"
#include "objir/image.hpp"

namespace objir {

struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    bool empty() const { return w <= 0 || h <= 0; }
    int x1() const { return x0 + w; }
    int y1() const { return y0 + h; }
    bool operator==(const PixelRect&) const = default;
};

PixelRect intersect(const PixelRect& a, const PixelRect& b);

// Pixels whose centers (c+0.5, r+0.5) lie inside the closed box.
PixelRect pixel_rect_of(const ObjectBox& box);

// Bilinear sample with pixel centers at half-integers; coordinates are
// clamped to [0.5, dim-0.5]. Writes one value per channel.
void sample_bilinear(const Image& img, const Vec2& p, std::span<float> out);
std::vector<float> sample_bilinear(const Image& img, const Vec2& p);

// Plain bilinear resize; output pixel centers map linearly onto input.
Image resize_bilinear(const Image& img, int width, int height);

struct WarpResult {
    Image image;
    std::size_t uncovered = 0;  // output pixels outside the destination mesh, set to 0
};

// Warps the output rectangle `rect` only. For each output pixel center q:
// locate q in `dst` (output space), evaluate the same local coordinates in
// `src` (input space) and sample `input` there. `out` is resized to rect.
// Does not check fold-over.
std::size_t warp_region(const Image& input, const Mesh& src, const Mesh& dst,
                        const PixelRect& rect, Image& out);

// Full-frame warp without the fold-over check.
WarpResult warp_image(const Image& input, const Mesh& src, const Mesh& dst, int out_width,
                      int out_height);

// Backward warp of `input` from the rigid input mesh to the output mesh.
// Throws FoldOverError listing the offending cells of mesh_out.
WarpResult retarget_warp(const Image& input, const Mesh& mesh_in, const Mesh& mesh_out,
                         int out_width, int out_height);

}  // namespace objir
