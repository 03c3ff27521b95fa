#pragma once

// File formats: images (PNG/JPEG in, PNG out), object boxes, job
// configuration, meshes and distortion reports. All JSON is written with
// round-trip float formatting.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "objir/config.hpp"
#include "objir/geometry.hpp"
#include "objir/image.hpp"
#include "objir/metric.hpp"
#include "objir/objective.hpp"

namespace objir::io {

using nlohmann::json;

Image load_image(const std::filesystem::path& path);
// 8-bit PNG; intensities are mapped with round(v * 255).
void save_png(const Image& img, const std::filesystem::path& path);

struct BoxFile {
    std::string image;
    std::vector<ObjectBox> boxes;
    std::vector<std::string> warnings;
};

// Boxes with non-positive extent are dropped with a warning. When the image
// size is known, boxes are clipped to it and boxes larger than half the
// image are kept with a warning.
BoxFile parse_boxes(const json& j, std::optional<std::pair<int, int>> image_size = std::nullopt);
BoxFile load_boxes(const std::filesystem::path& path,
                   std::optional<std::pair<int, int>> image_size = std::nullopt);
json boxes_to_json(const std::string& image, const std::vector<ObjectBox>& boxes);
void save_boxes(const std::filesystem::path& path, const std::string& image,
                const std::vector<ObjectBox>& boxes);

JobConfig config_from_json(const json& j);
json config_to_json(const JobConfig& cfg);
JobConfig load_config(const std::filesystem::path& path);
void save_config(const JobConfig& cfg, const std::filesystem::path& path);

Mesh mesh_from_json(const json& j);
json mesh_to_json(const Mesh& mesh);
Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

json report_to_json(const DistortionReport& rep);
DistortionReport report_from_json(const json& j);
void save_report(const DistortionReport& rep, const std::filesystem::path& path);
DistortionReport load_report(const std::filesystem::path& path);

// image,method,scale,mean_error,vanished_count
std::string csv_header();
std::string csv_row(const std::string& image, const std::string& method, double scale,
                    const DistortionReport& rep);

// {"iter":n,"total":..,"object":..,"geometric":..,"boundary":..}
std::string loss_trace_line(int iter, const LossReport& rep);

// Shortest decimal that round-trips the double.
std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace objir::io
