#include "objir/io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace objir::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

namespace {

const char* box_mapping_name(BoxMapping m) {
    switch (m) {
        case BoxMapping::Hull8: return "hull8";
        case BoxMapping::Corners: return "corners";
        case BoxMapping::Exact: return "exact";
    }
    return "hull8";
}

json parse_file(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError((path.empty() ? "<root>" : path) + ": expected an object");
    return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& path) {
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ParseError(join(path, k) + ": unknown field");
    }
}

double get_number(const json& j, const std::string& key, const std::string& path) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ParseError(join(path, key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(join(path, key) + ": must be finite");
    return d;
}

void opt_number(const json& j, const char* key, const std::string& path, double& out) {
    if (j.contains(key)) out = get_number(j, key, path);
}

void opt_int(const json& j, const char* key, const std::string& path, int& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ParseError(join(path, key) + ": expected an integer");
    out = v.get<int>();
}

void opt_bool(const json& j, const char* key, const std::string& path, bool& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ParseError(join(path, key) + ": expected true or false");
    out = v.get<bool>();
}

std::string opt_string(const json& j, const char* key, const std::string& path,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) throw ParseError(join(path, key) + ": expected a string");
    return v.get<std::string>();
}

}  // namespace

Image load_image(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("image not found: " + path.string());
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_ANYCOLOR);
    if (m.empty()) throw IoError("cannot decode image: " + path.string());
    if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2BGR);
    if (m.channels() == 2) cv::cvtColor(cv::Mat(m), m, cv::COLOR_GRAY2BGR);
    double scale = 1.0 / 255.0;
    if (m.depth() == CV_16U) {
        scale = 1.0 / 65535.0;
    } else if (m.depth() != CV_8U) {
        throw IoError("unsupported sample depth in " + path.string());
    }
    cv::Mat f;
    m.convertTo(f, CV_32F, scale);
    const int channels = f.channels();
    Image img(f.cols, f.rows, channels);
    for (int y = 0; y < f.rows; ++y) {
        const float* row = f.ptr<float>(y);
        for (int x = 0; x < f.cols; ++x) {
            for (int c = 0; c < channels; ++c) {
                // OpenCV stores BGR; the image is RGB.
                const int src_c = channels == 3 ? 2 - c : c;
                img.at(x, y, c) = std::clamp(row[x * channels + src_c], 0.0f, 1.0f);
            }
        }
    }
    return img;
}

void save_png(const Image& img, const fs::path& path) {
    if (img.empty()) throw IoError("refusing to write an empty image to " + path.string());
    const int channels = img.channels();
    cv::Mat m(img.height(), img.width(), channels == 3 ? CV_8UC3 : CV_8UC1);
    for (int y = 0; y < img.height(); ++y) {
        auto* row = m.ptr<unsigned char>(y);
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < channels; ++c) {
                const int dst_c = channels == 3 ? 2 - c : c;
                const double v = std::clamp(static_cast<double>(img.at(x, y, c)), 0.0, 1.0);
                row[x * channels + dst_c] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
    }
    try {
        if (!cv::imwrite(path.string(), m)) throw IoError("cannot write image " + path.string());
    } catch (const cv::Exception& e) {
        throw IoError("cannot write image " + path.string() + ": " + e.what());
    }
}

BoxFile parse_boxes(const json& j, std::optional<std::pair<int, int>> image_size) {
    require_object(j, "");
    reject_unknown(j, {"image", "boxes", "width", "height"}, "");
    BoxFile bf;
    bf.image = opt_string(j, "image", "", "");
    if (!j.contains("boxes") || !j.at("boxes").is_array()) throw ParseError("boxes: expected an array");
    const json& arr = j.at("boxes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "boxes[" + std::to_string(i) + "]";
        const json& jb = require_object(arr[i], path);
        reject_unknown(jb, {"id", "x0", "y0", "x1", "y1", "score", "label"}, path);
        ObjectBox b;
        if (jb.contains("id")) {
            const json& id = jb.at("id");
            if (id.is_string()) {
                b.id = id.get<std::string>();
            } else if (id.is_number_integer()) {
                b.id = std::to_string(id.get<long long>());
            } else {
                throw ParseError(path + ".id: expected a string or integer");
            }
        } else {
            b.id = std::to_string(i);
        }
        for (const char* k : {"x0", "y0", "x1", "y1"}) {
            if (!jb.contains(k)) throw ParseError(join(path, k) + ": missing");
        }
        b.x0 = get_number(jb, "x0", path);
        b.y0 = get_number(jb, "y0", path);
        b.x1 = get_number(jb, "x1", path);
        b.y1 = get_number(jb, "y1", path);
        if (jb.contains("score")) get_number(jb, "score", path);
        if (jb.contains("label")) opt_string(jb, "label", path, "");
        if (!b.valid()) {
            bf.warnings.push_back(path + " ('" + b.id + "'): rejected, box has non-positive extent");
            continue;
        }
        if (image_size) {
            const auto [w, h] = *image_size;
            const ObjectBox c = clip_box(b, w, h);
            if (!(c == b)) {
                if (!c.valid()) {
                    bf.warnings.push_back(path + " ('" + b.id + "'): rejected, outside the image");
                    continue;
                }
                bf.warnings.push_back(path + " ('" + b.id + "'): clipped to the image");
                b = c;
            }
            if (b.area() > 0.5 * w * h) {
                bf.warnings.push_back(path + " ('" + b.id +
                                      "'): covers more than half of the image; such images "
                                      "are outside the training filter, results may degrade");
            }
        }
        bf.boxes.push_back(std::move(b));
    }
    return bf;
}

BoxFile load_boxes(const fs::path& path, std::optional<std::pair<int, int>> image_size) {
    BoxFile bf;
    try {
        bf = parse_boxes(parse_file(path), image_size);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    for (const auto& w : bf.warnings) spdlog::warn("{}: {}", path.string(), w);
    return bf;
}

json boxes_to_json(const std::string& image, const std::vector<ObjectBox>& boxes) {
    json arr = json::array();
    for (const auto& b : boxes) {
        arr.push_back({{"id", b.id}, {"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}});
    }
    return {{"image", image}, {"boxes", arr}};
}

void save_boxes(const fs::path& path, const std::string& image, const std::vector<ObjectBox>& boxes) {
    write_json(path, boxes_to_json(image, boxes));
}

JobConfig config_from_json(const json& j) {
    require_object(j, "");
    reject_unknown(j,
                   {"mesh", "weights", "scale_s", "normalize_losses", "squared_geometric",
                    "box_mapping", "optimizer", "working_resolution", "enlarge_mode"},
                   "");
    JobConfig cfg;
    if (j.contains("mesh")) {
        const json& m = require_object(j.at("mesh"), "mesh");
        reject_unknown(m, {"rows", "cols"}, "mesh");
        opt_int(m, "rows", "mesh", cfg.rows);
        opt_int(m, "cols", "mesh", cfg.cols);
    }
    if (j.contains("weights")) {
        const json& w = require_object(j.at("weights"), "weights");
        reject_unknown(w, {"object", "geometric", "boundary"}, "weights");
        opt_number(w, "object", "weights", cfg.weights.object);
        opt_number(w, "geometric", "weights", cfg.weights.geometric);
        opt_number(w, "boundary", "weights", cfg.weights.boundary);
    }
    if (j.contains("scale_s") && !j.at("scale_s").is_null()) cfg.scale_s = get_number(j, "scale_s", "");
    opt_bool(j, "normalize_losses", "", cfg.normalize_losses);
    opt_bool(j, "squared_geometric", "", cfg.squared_geometric);
    const std::string mapping = opt_string(j, "box_mapping", "", "exact");
    if (mapping == "hull8") {
        cfg.box_mapping = BoxMapping::Hull8;
    } else if (mapping == "corners") {
        cfg.box_mapping = BoxMapping::Corners;
    } else if (mapping == "exact") {
        cfg.box_mapping = BoxMapping::Exact;
    } else {
        throw ParseError("box_mapping: expected \"hull8\", \"corners\" or \"exact\"");
    }
    opt_int(j, "working_resolution", "", cfg.working_resolution);
    const std::string mode = opt_string(j, "enlarge_mode", "", "invert");
    if (mode == "invert") {
        cfg.enlarge_mode = EnlargeMode::Invert;
    } else if (mode == "direct") {
        cfg.enlarge_mode = EnlargeMode::Direct;
    } else {
        throw ParseError("enlarge_mode: expected \"invert\" or \"direct\"");
    }
    if (j.contains("optimizer")) {
        const std::string p = "optimizer";
        const json& o = require_object(j.at(p), p);
        reject_unknown(o,
                       {"learning_rate", "decay", "max_iters", "tolerance", "fd_step", "adam_beta1",
                        "adam_beta2", "adam_eps", "seed"},
                       p);
        auto& oc = cfg.optim;
        opt_number(o, "learning_rate", p, oc.learning_rate);
        opt_number(o, "decay", p, oc.decay);
        opt_int(o, "max_iters", p, oc.max_iters);
        opt_number(o, "tolerance", p, oc.tolerance);
        opt_number(o, "fd_step", p, oc.fd_step);
        opt_number(o, "adam_beta1", p, oc.adam_beta1);
        opt_number(o, "adam_beta2", p, oc.adam_beta2);
        opt_number(o, "adam_eps", p, oc.adam_eps);
        if (o.contains("seed")) {
            if (!o.at("seed").is_number_unsigned() && !o.at("seed").is_number_integer()) {
                throw ParseError("optimizer.seed: expected an integer");
            }
            oc.seed = o.at("seed").get<std::uint64_t>();
        }
    }
    try {
        validate(cfg);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

json config_to_json(const JobConfig& cfg) {
    const auto& o = cfg.optim;
    return {
        {"mesh", {{"rows", cfg.rows}, {"cols", cfg.cols}}},
        {"weights",
         {{"object", cfg.weights.object},
          {"geometric", cfg.weights.geometric},
          {"boundary", cfg.weights.boundary}}},
        {"scale_s", cfg.scale_s ? json(*cfg.scale_s) : json(nullptr)},
        {"normalize_losses", cfg.normalize_losses},
        {"squared_geometric", cfg.squared_geometric},
        {"box_mapping", box_mapping_name(cfg.box_mapping)},
        {"working_resolution", cfg.working_resolution},
        {"enlarge_mode", cfg.enlarge_mode == EnlargeMode::Invert ? "invert" : "direct"},
        {"optimizer",
         {{"learning_rate", o.learning_rate},
          {"decay", o.decay},
          {"max_iters", o.max_iters},
          {"tolerance", o.tolerance},
          {"fd_step", o.fd_step},
          {"adam_beta1", o.adam_beta1},
          {"adam_beta2", o.adam_beta2},
          {"adam_eps", o.adam_eps},
          {"seed", o.seed}}},
    };
}

JobConfig load_config(const fs::path& path) {
    try {
        return config_from_json(parse_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_config(const JobConfig& cfg, const fs::path& path) { write_json(path, config_to_json(cfg)); }

Mesh mesh_from_json(const json& j) {
    require_object(j, "");
    reject_unknown(j, {"rows", "cols", "width", "height", "vertices"}, "");
    for (const char* k : {"rows", "cols", "width", "height", "vertices"}) {
        if (!j.contains(k)) throw ParseError(std::string(k) + ": missing");
    }
    int rows = 0;
    int cols = 0;
    opt_int(j, "rows", "", rows);
    opt_int(j, "cols", "", cols);
    const double width = get_number(j, "width", "");
    const double height = get_number(j, "height", "");
    if (rows < 1 || cols < 1) throw ParseError("rows/cols: must be >= 1");
    const json& verts = j.at("vertices");
    const std::size_t expected = static_cast<std::size_t>(rows + 1) * static_cast<std::size_t>(cols + 1);
    if (!verts.is_array() || verts.size() != expected) {
        throw ParseError("vertices: expected an array of " + std::to_string(expected) + " [x, y] pairs");
    }
    VertexGrid g(rows, cols);
    for (std::size_t k = 0; k < expected; ++k) {
        const json& v = verts[k];
        const std::string p = "vertices[" + std::to_string(k) + "]";
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ParseError(p + ": expected [x, y]");
        }
        g.values()[k] = {v[0].get<double>(), v[1].get<double>()};
        if (!is_finite(g.values()[k])) throw ParseError(p + ": must be finite");
    }
    try {
        return Mesh(width, height, std::move(g));
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

json mesh_to_json(const Mesh& mesh) {
    json verts = json::array();
    for (const Vec2& p : mesh.grid().values()) verts.push_back({p.x, p.y});
    return {{"rows", mesh.rows()},
            {"cols", mesh.cols()},
            {"width", mesh.width()},
            {"height", mesh.height()},
            {"vertices", verts}};
}

Mesh load_mesh(const fs::path& path) {
    try {
        return mesh_from_json(parse_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_mesh(const Mesh& mesh, const fs::path& path) { write_json(path, mesh_to_json(mesh)); }

json report_to_json(const DistortionReport& rep) {
    json objs = json::array();
    for (const auto& o : rep.per_object) {
        objs.push_back({{"id", o.id},
                        {"input_aspect", o.input_aspect},
                        {"output_aspect", o.output_aspect},
                        {"error", o.error},
                        {"vanished", o.vanished}});
    }
    return {{"per_object", objs}, {"mean_error", rep.mean_error}, {"vanished_count", rep.vanished_count}};
}

DistortionReport report_from_json(const json& j) {
    require_object(j, "");
    DistortionReport rep;
    rep.mean_error = get_number(j, "mean_error", "");
    opt_int(j, "vanished_count", "", rep.vanished_count);
    if (!j.contains("per_object") || !j.at("per_object").is_array()) {
        throw ParseError("per_object: expected an array");
    }
    for (std::size_t i = 0; i < j.at("per_object").size(); ++i) {
        const std::string p = "per_object[" + std::to_string(i) + "]";
        const json& o = require_object(j.at("per_object")[i], p);
        ObjectDistortion d;
        d.id = opt_string(o, "id", p, "");
        d.input_aspect = get_number(o, "input_aspect", p);
        d.output_aspect = get_number(o, "output_aspect", p);
        d.error = get_number(o, "error", p);
        opt_bool(o, "vanished", p, d.vanished);
        rep.per_object.push_back(std::move(d));
    }
    return rep;
}

void save_report(const DistortionReport& rep, const fs::path& path) {
    write_json(path, report_to_json(rep));
}

DistortionReport load_report(const fs::path& path) {
    try {
        return report_from_json(parse_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string csv_header() { return "image,method,scale,mean_error,vanished_count"; }

std::string csv_row(const std::string& image, const std::string& method, double scale,
                    const DistortionReport& rep) {
    return image + "," + method + "," + format_double(scale) + "," + format_double(rep.mean_error) +
           "," + std::to_string(rep.vanished_count);
}

std::string loss_trace_line(int iter, const LossReport& rep) {
    const nlohmann::ordered_json j = {{"iter", iter},
                    {"total", rep.total},
                    {"object", rep.object},
                    {"geometric", rep.geometric},
                    {"boundary", rep.boundary}};
    return j.dump();
}

}  // namespace objir::io
