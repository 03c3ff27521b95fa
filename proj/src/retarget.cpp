#include "objir/retarget.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "objir/parallel.hpp"

namespace objir {

std::pair<int, int> working_size(int width, int height, int resolution) {
    const double k = static_cast<double>(resolution) / std::max(width, height);
    return {std::max(1, static_cast<int>(std::lround(width * k))),
            std::max(1, static_cast<int>(std::lround(height * k)))};
}

std::vector<ObjectBox> scale_boxes(const std::vector<ObjectBox>& boxes, double from_w, double from_h,
                                   double to_w, double to_h) {
    const double kx = to_w / from_w;
    const double ky = to_h / from_h;
    std::vector<ObjectBox> out;
    for (const auto& b : boxes) {
        ObjectBox s = clip_box({b.x0 * kx, b.y0 * ky, b.x1 * kx, b.y1 * ky, b.id}, to_w, to_h);
        if (!s.valid()) {
            spdlog::warn("object box '{}' is empty at {}x{}; dropped", b.id, to_w, to_h);
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

Image resized(const Image& img, int w, int h) {
    if (img.width() == w && img.height() == h) return img;
    return resize_bilinear(img, w, h);
}

// Optimizes the motion field of a working-resolution job.
void optimize_working(MeshSolution& sol, const Image& work_img, std::vector<ObjectBox> work_boxes,
                      int work_out_w, int work_out_h, double scale_s, const JobConfig& cfg,
                      int threads) {
    JobConfig jc = cfg;
    jc.scale_s = scale_s;
    sol.job = RetargetJob::make(work_img.width(), work_img.height(), work_out_w, work_out_h,
                                std::move(work_boxes), jc);
    if (sol.job.boxes.empty()) {
        spdlog::warn("no object boxes; falling back to pure scaling");
        sol.degenerate = true;
        sol.motion = MotionField(cfg.rows, cfg.cols);
        sol.optim.motion = sol.motion;
        return;
    }
    const Objective obj(work_img, sol.job);
    sol.optim = optimize_motion(obj, cfg.optim, threads);
    sol.motion = sol.optim.motion;
    spdlog::info("optimized {} iteration(s), loss {:.6g} (object {:.6g}, geometric {:.6g}, boundary {:.6g})",
                 sol.optim.iterations, sol.optim.loss.total, sol.optim.loss.object,
                 sol.optim.loss.geometric, sol.optim.loss.boundary);
}

Mesh working_deformed(const MeshSolution& sol) {
    return apply_motion(
        build_rigid_mesh(sol.job.out_width, sol.job.out_height, sol.job.rows, sol.job.cols),
        sol.motion);
}

MeshSolution solve_forward(const Image& input, const std::vector<ObjectBox>& boxes, int out_w,
                           int out_h, const JobConfig& cfg, int threads) {
    validate(cfg);
    MeshSolution sol;
    const auto [ww, wh] = working_size(input.width(), input.height(), cfg.working_resolution);
    const int wo_w = std::max(1, static_cast<int>(std::lround(out_w * double(ww) / input.width())));
    const int wo_h = std::max(1, static_cast<int>(std::lround(out_h * double(wh) / input.height())));
    const double s =
        cfg.scale_s.value_or(auto_scale(input.width(), input.height(), out_w, out_h));
    optimize_working(sol, resized(input, ww, wh),
                     scale_boxes(boxes, input.width(), input.height(), ww, wh), wo_w, wo_h, s, cfg,
                     threads);
    sol.mesh_f = rescale_mesh(working_deformed(sol), out_w, out_h);
    sol.src = build_rigid_mesh(input.width(), input.height(), cfg.rows, cfg.cols);
    sol.dst = sol.mesh_f;
    return sol;
}

void check_size(int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw InvalidArgument("target size must be positive");
}

}  // namespace

MeshSolution solve_reduce(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                          int out_height, const JobConfig& cfg, int threads) {
    check_size(out_width, out_height);
    if (out_width > input.width() || out_height > input.height()) {
        throw InvalidArgument("reduction target must not exceed the input in either dimension");
    }
    return solve_forward(input, boxes, out_width, out_height, cfg, threads);
}

MeshSolution solve_enlarge(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                           int out_height, const JobConfig& cfg, int threads) {
    check_size(out_width, out_height);
    if (out_width < input.width() || out_height < input.height() ||
        (out_width == input.width() && out_height == input.height())) {
        throw InvalidArgument("enlargement target must be larger than the input");
    }
    if (cfg.enlarge_mode == EnlargeMode::Direct) {
        MeshSolution sol = solve_forward(input, boxes, out_width, out_height, cfg, threads);
        sol.enlarged = true;
        return sol;
    }

    // Optimize the reduction from a virtual image of the target size back
    // to the input size, then run that deformation in reverse.
    validate(cfg);
    MeshSolution sol;
    sol.enlarged = true;
    sol.inverted = true;
    const auto [lw, lh] = working_size(out_width, out_height, cfg.working_resolution);
    const int sw = std::max(1, static_cast<int>(std::lround(input.width() * double(lw) / out_width)));
    const int sh = std::max(1, static_cast<int>(std::lround(input.height() * double(lh) / out_height)));
    const double s =
        cfg.scale_s.value_or(auto_scale(out_width, out_height, input.width(), input.height()));
    optimize_working(sol, resized(input, lw, lh),
                     scale_boxes(boxes, input.width(), input.height(), lw, lh), sw, sh, s, cfg,
                     threads);
    sol.mesh_f = rescale_mesh(working_deformed(sol), input.width(), input.height());
    sol.src = sol.mesh_f;
    sol.dst = build_rigid_mesh(out_width, out_height, cfg.rows, cfg.cols);
    return sol;
}

MeshSolution solve(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                   int out_height, const JobConfig& cfg, int threads) {
    if (out_width <= input.width() && out_height <= input.height()) {
        return solve_reduce(input, boxes, out_width, out_height, cfg, threads);
    }
    return solve_enlarge(input, boxes, out_width, out_height, cfg, threads);
}

RetargetResult render(const Image& input, MeshSolution solution, int out_width, int out_height) {
    RetargetResult res;
    WarpResult w;
    if (solution.inverted) {
        const auto folded = check_foldover(solution.src);
        if (!folded.empty()) {
            std::ostringstream os;
            os << "deformed mesh has fold-over in " << folded.size() << " cell(s):";
            for (const auto& c : folded) os << " (" << c.row << "," << c.col << ")";
            throw FoldOverError(os.str(), folded);
        }
        w = warp_image(input, solution.src, solution.dst, out_width, out_height);
    } else {
        w = retarget_warp(input, solution.src, solution.dst, out_width, out_height);
    }
    if (w.uncovered > 0) {
        spdlog::warn("{} output pixel(s) not covered by the mesh were set to black", w.uncovered);
    }
    res.image = std::move(w.image);
    res.uncovered = w.uncovered;
    res.mesh = std::move(solution);
    return res;
}

RetargetResult retarget_reduce(const Image& input, const std::vector<ObjectBox>& boxes,
                               int out_width, int out_height, const JobConfig& cfg) {
    return render(input, solve_reduce(input, boxes, out_width, out_height, cfg, thread_count()),
                  out_width, out_height);
}

RetargetResult retarget_enlarge(const Image& input, const std::vector<ObjectBox>& boxes,
                                int out_width, int out_height, const JobConfig& cfg) {
    return render(input, solve_enlarge(input, boxes, out_width, out_height, cfg, thread_count()),
                  out_width, out_height);
}

RetargetResult retarget(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                        int out_height, const JobConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RetargetResult res =
        render(input, solve(input, boxes, out_width, out_height, cfg, thread_count()), out_width,
               out_height);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("retargeted {}x{} -> {}x{} in {:.3f}s", input.width(), input.height(), out_width,
                 out_height, secs);
    return res;
}

}  // namespace objir
