#pragma once

// Distortion error of object boxes between input and output, plus the
// simple-scaling (SCL) and cropping (CR) baselines.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "objir/geometry.hpp"
#include "objir/image.hpp"
#include "objir/warp.hpp"

namespace objir {

// Output box of an object, or nullopt when it vanished.
using MappedBox = std::optional<ObjectBox>;

struct ObjectDistortion {
    std::string id;
    double input_aspect = 0.0;   // w/h
    double output_aspect = 0.0;  // w/h, 0 when vanished
    double error = 0.0;
    bool vanished = false;
};

struct DistortionReport {
    std::vector<ObjectDistortion> per_object;
    double mean_error = 0.0;
    int vanished_count = 0;
};

// Mean over objects of |r_in - r_out| / r_in with r = w/h. A vanished
// object has r_out = 0 and therefore error 1.
DistortionReport distortion_error(std::span<const ObjectBox> boxes_in,
                                  std::span<const MappedBox> boxes_out);

// Fraction of a mapped box's area that must be clipped away before the
// object is treated as vanished.
inline constexpr double kVanishClipFraction = 0.95;

// Clips to [0,w]x[0,h]; nullopt when nothing is left or at least 95% of the
// area was removed.
MappedBox clip_or_vanish(const ObjectBox& box, double width, double height);

// Maps every input box through src -> dst with map_box and evaluates the
// distortion error inside the output rectangle.
DistortionReport measure_result(const Mesh& src, const Mesh& dst,
                                std::span<const ObjectBox> boxes_in, double out_width,
                                double out_height, BoxMapping mode = BoxMapping::Exact);

struct BaselineResult {
    Image image;
    std::vector<MappedBox> boxes;
    PixelRect window;  // crop window for CR; full frame for SCL
};

BaselineResult baseline_scl(const Image& input, std::span<const ObjectBox> boxes, int out_width,
                            int out_height);

// Box mapping of SCL without rendering the image.
std::vector<MappedBox> scl_boxes(std::span<const ObjectBox> boxes, double in_width,
                                 double in_height, double out_width, double out_height);

// Total box area covered by a window.
double covered_area(std::span<const ObjectBox> boxes, const PixelRect& window);

// Crop window of the target size maximizing covered box area, scanned
// exhaustively at 1px stride. Ties go to the window closest to the centre.
PixelRect best_crop_window(int in_width, int in_height, std::span<const ObjectBox> boxes,
                           int out_width, int out_height);

std::vector<MappedBox> crop_boxes(std::span<const ObjectBox> boxes, const PixelRect& window);

// Throws Unsupported for enlargement.
BaselineResult baseline_cr(const Image& input, std::span<const ObjectBox> boxes, int out_width,
                           int out_height);

}  // namespace objir
