#include "objir/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace objir {

DistortionReport distortion_error(std::span<const ObjectBox> boxes_in,
                                  std::span<const MappedBox> boxes_out) {
    if (boxes_in.empty()) throw DegenerateInput("distortion error is undefined without objects");
    if (boxes_in.size() != boxes_out.size()) {
        throw InvalidArgument("input and output box lists must be index-aligned");
    }
    DistortionReport rep;
    double sum = 0.0;
    for (std::size_t i = 0; i < boxes_in.size(); ++i) {
        const ObjectBox& in = boxes_in[i];
        if (!in.valid()) throw InvalidArgument("input box '" + in.id + "' has non-positive extent");
        ObjectDistortion d;
        d.id = in.id;
        d.input_aspect = in.width() / in.height();
        const MappedBox& out = boxes_out[i];
        if (!out || !(out->height() > 0.0) || !(out->width() > 0.0)) {
            d.vanished = true;
            d.output_aspect = 0.0;
            ++rep.vanished_count;
        } else {
            d.output_aspect = out->width() / out->height();
        }
        d.error = std::abs(d.input_aspect - d.output_aspect) / d.input_aspect;
        sum += d.error;
        rep.per_object.push_back(std::move(d));
    }
    rep.mean_error = sum / static_cast<double>(boxes_in.size());
    return rep;
}

MappedBox clip_or_vanish(const ObjectBox& box, double width, double height) {
    const ObjectBox c = clip_box(box, width, height);
    if (!c.valid()) return std::nullopt;
    if (box.area() > 0.0 && c.area() <= (1.0 - kVanishClipFraction) * box.area()) return std::nullopt;
    return c;
}

DistortionReport measure_result(const Mesh& src, const Mesh& dst,
                                std::span<const ObjectBox> boxes_in, double out_width,
                                double out_height, BoxMapping mode) {
    std::vector<MappedBox> out;
    out.reserve(boxes_in.size());
    for (const ObjectBox& b : boxes_in) {
        out.push_back(clip_or_vanish(map_box(src, dst, b, mode), out_width, out_height));
    }
    return distortion_error(boxes_in, out);
}

std::vector<MappedBox> scl_boxes(std::span<const ObjectBox> boxes, double in_width,
                                 double in_height, double out_width, double out_height) {
    const double kx = out_width / in_width;
    const double ky = out_height / in_height;
    std::vector<MappedBox> out;
    for (const ObjectBox& b : boxes) {
        out.push_back(clip_or_vanish({b.x0 * kx, b.y0 * ky, b.x1 * kx, b.y1 * ky, b.id}, out_width,
                                     out_height));
    }
    return out;
}

BaselineResult baseline_scl(const Image& input, std::span<const ObjectBox> boxes, int out_width,
                            int out_height) {
    if (out_width <= 0 || out_height <= 0) throw InvalidArgument("target size must be positive");
    BaselineResult r;
    r.image = (out_width == input.width() && out_height == input.height())
                  ? input
                  : resize_bilinear(input, out_width, out_height);
    r.boxes = scl_boxes(boxes, input.width(), input.height(), out_width, out_height);
    r.window = {0, 0, out_width, out_height};
    return r;
}

double covered_area(std::span<const ObjectBox> boxes, const PixelRect& window) {
    double total = 0.0;
    for (const ObjectBox& b : boxes) {
        const double w = std::min(b.x1, double(window.x1())) - std::max(b.x0, double(window.x0));
        const double h = std::min(b.y1, double(window.y1())) - std::max(b.y0, double(window.y0));
        if (w > 0.0 && h > 0.0) total += w * h;
    }
    return total;
}

PixelRect best_crop_window(int in_width, int in_height, std::span<const ObjectBox> boxes,
                           int out_width, int out_height) {
    if (out_width > in_width || out_height > in_height) {
        throw Unsupported("cropping cannot enlarge an image");
    }
    if (out_width <= 0 || out_height <= 0) throw InvalidArgument("target size must be positive");
    const double cx = 0.5 * (in_width - out_width);
    const double cy = 0.5 * (in_height - out_height);
    PixelRect best{0, 0, out_width, out_height};
    double best_area = -1.0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int y = 0; y + out_height <= in_height; ++y) {
        for (int x = 0; x + out_width <= in_width; ++x) {
            const PixelRect w{x, y, out_width, out_height};
            const double a = covered_area(boxes, w);
            const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            if (a > best_area || (a == best_area && d < best_dist)) {
                best = w;
                best_area = a;
                best_dist = d;
            }
        }
    }
    return best;
}

std::vector<MappedBox> crop_boxes(std::span<const ObjectBox> boxes, const PixelRect& window) {
    std::vector<MappedBox> out;
    for (const ObjectBox& b : boxes) {
        const ObjectBox moved{b.x0 - window.x0, b.y0 - window.y0, b.x1 - window.x0,
                              b.y1 - window.y0, b.id};
        const ObjectBox c = clip_box(moved, window.w, window.h);
        out.push_back(c.valid() ? MappedBox(c) : std::nullopt);
    }
    return out;
}

BaselineResult baseline_cr(const Image& input, std::span<const ObjectBox> boxes, int out_width,
                           int out_height) {
    BaselineResult r;
    r.window = best_crop_window(input.width(), input.height(), boxes, out_width, out_height);
    r.image = input.crop(r.window.x0, r.window.y0, r.window.w, r.window.h);
    r.boxes = crop_boxes(boxes, r.window);
    return r;
}

}  // namespace objir
