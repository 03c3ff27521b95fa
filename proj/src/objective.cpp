#include "objir/objective.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace objir {

double auto_scale(double in_width, double in_height, double out_width, double out_height) {
    return std::sqrt((out_width * out_height) / (in_width * in_height));
}

RetargetJob RetargetJob::make(int in_width, int in_height, int out_width, int out_height,
                              std::vector<ObjectBox> boxes, const JobConfig& cfg) {
    RetargetJob job;
    job.in_width = in_width;
    job.in_height = in_height;
    job.out_width = out_width;
    job.out_height = out_height;
    job.rows = cfg.rows;
    job.cols = cfg.cols;
    job.scale_s = cfg.scale_s.value_or(auto_scale(in_width, in_height, out_width, out_height));
    job.weights = cfg.weights;
    job.boxes = std::move(boxes);
    job.normalize_losses = cfg.normalize_losses;
    job.squared_geometric = cfg.squared_geometric;
    job.box_mapping = cfg.box_mapping;
    validate(job);
    return job;
}

void validate(const RetargetJob& job) {
    if (job.in_width <= 0 || job.in_height <= 0 || job.out_width <= 0 || job.out_height <= 0) {
        throw InvalidArgument("job image sizes must be positive");
    }
    if (job.rows < 2 || job.cols < 2) throw InvalidArgument("mesh needs at least 2x2 cells");
    if (!(job.scale_s > 0.0) || !std::isfinite(job.scale_s)) {
        throw InvalidArgument("scale s must be positive and finite");
    }
    const auto& w = job.weights;
    if (!(w.object >= 0.0) || !(w.geometric >= 0.0) || !(w.boundary >= 0.0)) {
        throw InvalidArgument("loss weights must be non-negative");
    }
    for (const auto& b : job.boxes) {
        if (!b.valid()) throw InvalidArgument("object box '" + b.id + "' has non-positive extent");
    }
}

EdgeMask edge_mask(const Mesh& mesh_in, std::span<const ObjectBox> boxes_in) {
    EdgeMask m;
    m.rows = mesh_in.rows();
    m.cols = mesh_in.cols();
    m.horizontal.assign(static_cast<std::size_t>((m.rows + 1) * m.cols), 0);
    m.vertical.assign(static_cast<std::size_t>(m.rows * (m.cols + 1)), 0);
    auto inside_same_box = [&](const Vec2& a, const Vec2& b) {
        return std::any_of(boxes_in.begin(), boxes_in.end(),
                           [&](const ObjectBox& box) { return box.contains(a) && box.contains(b); });
    };
    for (int i = 0; i <= m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            if (inside_same_box(mesh_in.vertex(i, j), mesh_in.vertex(i, j + 1))) {
                m.horizontal[static_cast<std::size_t>(i * m.cols + j)] = 1;
                ++m.count;
            }
        }
    }
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j <= m.cols; ++j) {
            if (inside_same_box(mesh_in.vertex(i, j), mesh_in.vertex(i + 1, j))) {
                m.vertical[static_cast<std::size_t>(i * (m.cols + 1) + j)] = 1;
                ++m.count;
            }
        }
    }
    return m;
}

namespace {

Image crop_box(const Image& img, const ObjectBox& box) {
    const ObjectBox clipped = clip_box(box, img.width(), img.height());
    if (!(clipped == box)) {
        spdlog::warn("object box '{}' extends outside the {}x{} image; clipped", box.id,
                     img.width(), img.height());
    }
    const PixelRect r =
        intersect(pixel_rect_of(clipped), PixelRect{0, 0, img.width(), img.height()});
    return img.crop(r.x0, r.y0, r.w, r.h);
}

}  // namespace

Image object_reference(const Image& input, const ObjectBox& box, double scale_s) {
    const Image crop = crop_box(input, box);
    if (crop.width() == 0 || crop.height() == 0) return crop;
    const int w = std::max(1, static_cast<int>(std::lround(scale_s * crop.width())));
    const int h = std::max(1, static_cast<int>(std::lround(scale_s * crop.height())));
    if (w == crop.width() && h == crop.height()) return crop;
    return resize_bilinear(crop, w, h);
}

double padded_mse(const Image& reference, const Image& output) {
    const int cw = std::max(reference.width(), output.width());
    const int ch = std::max(reference.height(), output.height());
    const int nc = std::max(reference.channels(), output.channels());
    if (cw == 0 || ch == 0) return 0.0;
    if (!reference.empty() && !output.empty() && reference.channels() != output.channels()) {
        throw InvalidArgument("crop channel counts differ");
    }
    double sum = 0.0;
    for (int y = 0; y < ch; ++y) {
        const bool ry = y < reference.height();
        const bool oy = y < output.height();
        for (int x = 0; x < cw; ++x) {
            const bool rin = ry && x < reference.width();
            const bool oin = oy && x < output.width();
            for (int c = 0; c < nc; ++c) {
                const double a = rin ? reference.at(x, y, c) : 0.0;
                const double b = oin ? output.at(x, y, c) : 0.0;
                sum += (a - b) * (a - b);
            }
        }
    }
    return sum / (static_cast<double>(cw) * ch * nc);
}

double object_loss(const Image& input, const Image& warped, std::span<const ObjectBox> boxes_in,
                   std::span<const ObjectBox> boxes_out, double scale_s) {
    if (boxes_in.empty()) throw DegenerateInput("object loss needs at least one object");
    if (boxes_in.size() != boxes_out.size()) {
        throw InvalidArgument("input and output box lists must be index-aligned");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < boxes_in.size(); ++i) {
        sum += padded_mse(object_reference(input, boxes_in[i], scale_s),
                          crop_box(warped, boxes_out[i]));
    }
    return sum / static_cast<double>(boxes_in.size());
}

double geometric_loss(const Mesh& mesh_in, const Mesh& mesh_f, const EdgeMask& mask,
                      double scale_s, GeometricOptions opts) {
    if (mesh_in.rows() != mesh_f.rows() || mesh_in.cols() != mesh_f.cols()) {
        throw InvalidArgument("meshes must share rows and cols");
    }
    auto term = [&](const Vec2& a, const Vec2& b, const Vec2& fa, const Vec2& fb) {
        const Vec2 r = scale_s * (b - a) - (fb - fa);
        return opts.squared ? dot(r, r) : norm(r);
    };
    double sum = 0.0;
    for (int i = 0; i <= mask.rows; ++i) {
        for (int j = 0; j < mask.cols; ++j) {
            if (mask.h(i, j)) {
                sum += term(mesh_in.vertex(i, j), mesh_in.vertex(i, j + 1), mesh_f.vertex(i, j),
                            mesh_f.vertex(i, j + 1));
            }
        }
    }
    for (int i = 0; i < mask.rows; ++i) {
        for (int j = 0; j <= mask.cols; ++j) {
            if (mask.v(i, j)) {
                sum += term(mesh_in.vertex(i, j), mesh_in.vertex(i + 1, j), mesh_f.vertex(i, j),
                            mesh_f.vertex(i + 1, j));
            }
        }
    }
    if (opts.normalize && mask.count > 0) sum /= mask.count;
    return sum;
}

double geometric_loss(const Mesh& mesh_in, const Mesh& mesh_f, std::span<const ObjectBox> boxes_in,
                      double scale_s, GeometricOptions opts) {
    return geometric_loss(mesh_in, mesh_f, edge_mask(mesh_in, boxes_in), scale_s, opts);
}

int boundary_vertex_count(int rows, int cols) { return 2 * (cols + 1) + 2 * (rows + 1); }

double boundary_loss(const MotionField& motion, const Mesh& mesh_out_rigid, double d_u, double d_v,
                     bool normalize) {
    if (!motion.same_shape(mesh_out_rigid.grid())) {
        throw InvalidArgument("motion field dimensions do not match the mesh");
    }
    const int rows = motion.rows();
    const int cols = motion.cols();
    auto relu = [](double x) { return x > 0.0 ? x : 0.0; };
    double sum = 0.0;
    for (int i : {0, rows}) {
        for (int j = 0; j <= cols; ++j) {
            const Vec2& f = motion.at(i, j);
            sum += std::abs(f.y) + relu(std::abs(f.x) - d_u);
        }
    }
    for (int j : {0, cols}) {
        for (int i = 0; i <= rows; ++i) {
            const Vec2& f = motion.at(i, j);
            sum += std::abs(f.x) + relu(std::abs(f.y) - d_v);
        }
    }
    if (normalize) sum /= boundary_vertex_count(rows, cols);
    return sum;
}

Objective::Objective(Image input, RetargetJob job)
    : input_(std::move(input)),
      job_(std::move(job)),
      mesh_in_(build_rigid_mesh(job_.in_width, job_.in_height, job_.rows, job_.cols)),
      mesh_out_(build_rigid_mesh(job_.out_width, job_.out_height, job_.rows, job_.cols)),
      mask_(edge_mask(mesh_in_, job_.boxes)) {
    validate(job_);
    if (input_.width() != job_.in_width || input_.height() != job_.in_height) {
        throw InvalidArgument("input image size does not match the job");
    }
    references_.reserve(job_.boxes.size());
    for (const auto& b : job_.boxes) references_.push_back(object_reference(input_, b, job_.scale_s));
}

std::vector<ObjectBox> Objective::output_boxes(const Mesh& mesh_f) const {
    std::vector<ObjectBox> out;
    out.reserve(job_.boxes.size());
    for (const auto& b : job_.boxes) {
        const ObjectBox clipped = clip_box(b, job_.in_width, job_.in_height);
        out.push_back(clip_box(map_box(mesh_in_, mesh_f, clipped, job_.box_mapping),
                               job_.out_width, job_.out_height));
    }
    return out;
}

double Objective::object_term(const Mesh& mesh_f, std::span<const ObjectBox> boxes_out) const {
    if (job_.boxes.empty()) return 0.0;
    if (boxes_out.size() != job_.boxes.size()) {
        throw InvalidArgument("output boxes must be index-aligned with the job's boxes");
    }
    Image crop;
    double sum = 0.0;
    for (std::size_t i = 0; i < boxes_out.size(); ++i) {
        const PixelRect r = intersect(pixel_rect_of(boxes_out[i]), output_rect());
        warp_region(input_, mesh_in_, mesh_f, r, crop);
        sum += padded_mse(references_[i], crop);
    }
    return sum / static_cast<double>(boxes_out.size());
}

double Objective::geometric_term(const Mesh& mesh_f) const {
    return geometric_loss(mesh_in_, mesh_f, mask_, job_.scale_s,
                          {job_.normalize_losses, job_.squared_geometric});
}

double Objective::boundary_term(const MotionField& motion) const {
    return boundary_loss(motion, mesh_out_, job_.d_u(), job_.d_v(), job_.normalize_losses);
}

double Objective::geometric_divisor() const {
    return job_.normalize_losses && mask_.count > 0 ? mask_.count : 1.0;
}

double Objective::boundary_divisor() const {
    return job_.normalize_losses ? boundary_vertex_count(job_.rows, job_.cols) : 1.0;
}

LossReport Objective::evaluate(const MotionField& motion) const {
    const Mesh mesh_f = apply_motion(mesh_out_, motion);
    LossReport r;
    r.folded = !check_foldover(mesh_f).empty();
    r.object = object_term(mesh_f, output_boxes(mesh_f));
    r.geometric = geometric_term(mesh_f);
    r.boundary = boundary_term(motion);
    const auto& w = job_.weights;
    r.total = w.object * r.object + w.geometric * r.geometric + w.boundary * r.boundary;
    return r;
}

LossReport total_loss(const Image& input, const MotionField& motion, const RetargetJob& job) {
    return Objective(input, job).evaluate(motion);
}

}  // namespace objir
