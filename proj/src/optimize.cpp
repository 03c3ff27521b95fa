#include "objir/optimize.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "objir/parallel.hpp"

namespace objir {

namespace {

MotionField geometric_gradient(const Mesh& mesh_in, const Mesh& mesh_f, const EdgeMask& mask,
                               double s, bool squared, double divisor) {
    MotionField g(mesh_in.rows(), mesh_in.cols());
    auto edge = [&](int ia, int ja, int ib, int jb) {
        const Vec2 e = mesh_in.vertex(ib, jb) - mesh_in.vertex(ia, ja);
        const Vec2 ep = mesh_f.vertex(ib, jb) - mesh_f.vertex(ia, ja);
        const Vec2 d = ep - s * e;  // = -(s*e - e')
        Vec2 gb;
        if (squared) {
            gb = 2.0 * d;
        } else {
            const double n = norm(d);
            if (n < 1e-12) return;
            gb = (1.0 / n) * d;
        }
        g.at(ib, jb) += gb;
        g.at(ia, ja) -= gb;
    };
    for (int i = 0; i <= mask.rows; ++i) {
        for (int j = 0; j < mask.cols; ++j) {
            if (mask.h(i, j)) edge(i, j, i, j + 1);
        }
    }
    for (int i = 0; i < mask.rows; ++i) {
        for (int j = 0; j <= mask.cols; ++j) {
            if (mask.v(i, j)) edge(i, j, i + 1, j);
        }
    }
    if (divisor != 1.0) {
        for (Vec2& v : g.values()) v = (1.0 / divisor) * v;
    }
    return g;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Pixel rectangle covering the cells incident to vertex (a, b), padded by
// one pixel on each side.
PixelRect incident_region(const Mesh& m, int a, int b) {
    double x0 = std::numeric_limits<double>::infinity();
    double y0 = x0;
    double x1 = -x0;
    double y1 = -x0;
    for (int i = std::max(0, a - 1); i <= std::min(m.rows(), a + 1); ++i) {
        for (int j = std::max(0, b - 1); j <= std::min(m.cols(), b + 1); ++j) {
            const Vec2& p = m.vertex(i, j);
            x0 = std::min(x0, p.x);
            y0 = std::min(y0, p.y);
            x1 = std::max(x1, p.x);
            y1 = std::max(y1, p.y);
        }
    }
    const int px0 = static_cast<int>(std::floor(x0)) - 1;
    const int py0 = static_cast<int>(std::floor(y0)) - 1;
    const int px1 = static_cast<int>(std::ceil(x1)) + 1;
    const int py1 = static_cast<int>(std::ceil(y1)) + 1;
    return {px0, py0, px1 - px0, py1 - py0};
}

PixelRect bounding_union(const PixelRect& a, const PixelRect& b) {
    const int x0 = std::min(a.x0, b.x0);
    const int y0 = std::min(a.y0, b.y0);
    return {x0, y0, std::max(a.x1(), b.x1()) - x0, std::max(a.y1(), b.y1()) - y0};
}

PixelRect grow(const PixelRect& r, int by) { return {r.x0 - by, r.y0 - by, r.w + 2 * by, r.h + 2 * by}; }

struct CropState {
    PixelRect rect;       // output pixels of the (fixed) output box
    const Image* ref;     // downsampled input crop
    Image base;           // warped pixels at the unperturbed mesh
    double weight = 0.0;  // 1 / (N * common_w * common_h * channels)
};

}  // namespace

MotionField grad_geometric(const Mesh& mesh_in, const MotionField& motion, const RetargetJob& job) {
    const Mesh mesh_out = build_rigid_mesh(job.out_width, job.out_height, job.rows, job.cols);
    const Mesh mesh_f = apply_motion(mesh_out, motion);
    const EdgeMask mask = edge_mask(mesh_in, job.boxes);
    const double divisor = job.normalize_losses && mask.count > 0 ? mask.count : 1.0;
    return geometric_gradient(mesh_in, mesh_f, mask, job.scale_s, job.squared_geometric, divisor);
}

MotionField grad_geometric(const Objective& obj, const MotionField& motion) {
    const Mesh mesh_f = apply_motion(obj.mesh_out(), motion);
    return geometric_gradient(obj.mesh_in(), mesh_f, obj.mask(), obj.job().scale_s,
                              obj.job().squared_geometric, obj.geometric_divisor());
}

MotionField grad_boundary(const MotionField& motion, const RetargetJob& job) {
    const int rows = motion.rows();
    const int cols = motion.cols();
    if (rows != job.rows || cols != job.cols) {
        throw InvalidArgument("motion field dimensions do not match the job");
    }
    const double du = job.d_u();
    const double dv = job.d_v();
    MotionField g(rows, cols);
    for (int i : {0, rows}) {
        for (int j = 0; j <= cols; ++j) {
            const Vec2& f = motion.at(i, j);
            g.at(i, j).y += sign(f.y);
            if (std::abs(f.x) > du) g.at(i, j).x += sign(f.x);
        }
    }
    for (int j : {0, cols}) {
        for (int i = 0; i <= rows; ++i) {
            const Vec2& f = motion.at(i, j);
            g.at(i, j).x += sign(f.x);
            if (std::abs(f.y) > dv) g.at(i, j).y += sign(f.y);
        }
    }
    if (job.normalize_losses) {
        const double n = boundary_vertex_count(rows, cols);
        for (Vec2& v : g.values()) v = (1.0 / n) * v;
    }
    return g;
}

MotionField grad_object_fd(const Objective& obj, const MotionField& motion, double fd_step,
                           int threads) {
    if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
    const RetargetJob& job = obj.job();
    MotionField grad(job.rows, job.cols);
    if (job.boxes.empty()) return grad;

    const Mesh mesh_f = apply_motion(obj.mesh_out(), motion);
    const std::vector<ObjectBox> boxes_out = obj.output_boxes(mesh_f);
    const double n_obj = static_cast<double>(boxes_out.size());
    const int channels = obj.input().channels();

    std::vector<CropState> crops;
    for (std::size_t i = 0; i < boxes_out.size(); ++i) {
        CropState c;
        c.rect = intersect(pixel_rect_of(boxes_out[i]), obj.output_rect());
        c.ref = &obj.references()[i];
        warp_region(obj.input(), obj.mesh_in(), mesh_f, c.rect, c.base);
        const int cw = std::max(c.ref->width(), c.rect.w);
        const int ch = std::max(c.ref->height(), c.rect.h);
        if (cw == 0 || ch == 0 || c.rect.empty()) continue;
        if (padded_mse(*c.ref, c.base) == 0.0) continue;
        c.weight = 1.0 / (n_obj * cw * ch * channels);
        crops.push_back(std::move(c));
    }
    if (crops.empty()) return grad;

    const int vcols = job.cols + 1;
    const int nvert = (job.rows + 1) * vcols;
    const int step_pad = static_cast<int>(std::ceil(fd_step)) + 1;

    // Change in the (fixed-box) object term when the warp over `region`
    // is recomputed with `mesh`.
    auto delta = [&](const Mesh& mesh, const PixelRect& region, Image& buf) {
        double d = 0.0;
        for (const CropState& c : crops) {
            const PixelRect r = intersect(region, c.rect);
            if (r.empty()) continue;
            warp_region(obj.input(), obj.mesh_in(), mesh, r, buf);
            double acc = 0.0;
            for (int y = 0; y < r.h; ++y) {
                const int ly = r.y0 + y - c.rect.y0;
                for (int x = 0; x < r.w; ++x) {
                    const int lx = r.x0 + x - c.rect.x0;
                    const bool in_ref = lx < c.ref->width() && ly < c.ref->height();
                    for (int k = 0; k < channels; ++k) {
                        const double a = in_ref ? c.ref->at(lx, ly, k) : 0.0;
                        const double now = a - buf.at(x, y, k);
                        const double was = a - c.base.at(lx, ly, k);
                        acc += now * now - was * was;
                    }
                }
            }
            d += c.weight * acc;
        }
        return d;
    };

    parallel_for(nvert, threads, [&](int idx) {
        const int a = idx / vcols;
        const int b = idx % vcols;
        const PixelRect base_region = incident_region(mesh_f, a, b);
        const PixelRect reach = grow(base_region, step_pad);
        const bool touches = std::any_of(crops.begin(), crops.end(), [&](const CropState& c) {
            return !intersect(reach, c.rect).empty();
        });
        if (!touches) return;

        Image buf;
        Vec2 g;
        for (int comp = 0; comp < 2; ++comp) {
            double d[2] = {0.0, 0.0};
            for (int side = 0; side < 2; ++side) {
                VertexGrid verts = mesh_f.grid();
                Vec2& p = verts.at(a, b);
                const double h = side == 0 ? fd_step : -fd_step;
                (comp == 0 ? p.x : p.y) += h;
                const Mesh moved(mesh_f.width(), mesh_f.height(), std::move(verts));
                const PixelRect region = bounding_union(base_region, incident_region(moved, a, b));
                d[side] = delta(moved, region, buf);
            }
            (comp == 0 ? g.x : g.y) = (d[0] - d[1]) / (2.0 * fd_step);
        }
        grad.at(a, b) = g;
    });
    return grad;
}

MotionField grad_object_fd(const Image& input, const MotionField& motion, const RetargetJob& job,
                           const OptimConfig& cfg) {
    return grad_object_fd(Objective(input, job), motion, cfg.fd_step);
}

MotionField total_gradient(const Objective& obj, const MotionField& motion, const OptimConfig& cfg,
                           int threads) {
    const LossWeights& w = obj.job().weights;
    MotionField g(obj.job().rows, obj.job().cols);
    if (w.object != 0.0) {
        const MotionField go = grad_object_fd(obj, motion, cfg.fd_step, threads);
        for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] += w.object * go.values()[k];
    }
    if (w.geometric != 0.0) {
        const MotionField gg = grad_geometric(obj, motion);
        for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] += w.geometric * gg.values()[k];
    }
    if (w.boundary != 0.0) {
        const MotionField gb = grad_boundary(motion, obj.job());
        for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] += w.boundary * gb.values()[k];
    }
    return g;
}

Adam::Adam(int rows, int cols, const OptimConfig& cfg)
    : cfg_(cfg), m_(rows, cols), v_(rows, cols) {
    validate(cfg_);
}

void Adam::step(MotionField& motion, const MotionField& gradient) {
    if (!motion.same_shape(m_) || !gradient.same_shape(m_)) {
        throw InvalidArgument("Adam state and field dimensions differ");
    }
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    const double lr = cfg_.learning_rate * std::pow(cfg_.decay, t_);
    const double c1 = 1.0 - std::pow(b1, t_ + 1);
    const double c2 = 1.0 - std::pow(b2, t_ + 1);
    auto update = [&](double& x, double& m, double& v, double g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        x -= lr * (m / c1) / (std::sqrt(v / c2) + cfg_.adam_eps);
    };
    for (std::size_t k = 0; k < motion.size(); ++k) {
        Vec2& x = motion.values()[k];
        Vec2& m = m_.values()[k];
        Vec2& v = v_.values()[k];
        const Vec2& g = gradient.values()[k];
        update(x.x, m.x, v.x, g.x);
        update(x.y, m.y, v.y, g.y);
    }
    ++t_;
}

namespace {

constexpr int kStopWindow = 10;

OptimResult run_once(const Objective& obj, const OptimConfig& cfg, int threads) {
    const RetargetJob& job = obj.job();
    OptimResult res;
    MotionField motion(job.rows, job.cols);
    Adam adam(job.rows, job.cols, cfg);

    auto fail = [&](const char* what) {
        std::vector<double> totals;
        for (const auto& r : res.trace) totals.push_back(r.total);
        throw OptimizerError(what, std::move(totals));
    };

    res.motion = motion;
    bool have_best = false;
    std::vector<double> best;
    for (int it = 0; it <= cfg.max_iters; ++it) {
        const LossReport rep = obj.evaluate(motion);
        res.trace.push_back(rep);
        if (!std::isfinite(rep.total)) fail("non-finite loss during optimization");
        res.iterations = it + 1;
        res.folded = rep.folded;
        // A folded mesh has no well-defined warp, so it never becomes the answer.
        if (!rep.folded && (!have_best || rep.total < res.loss.total)) {
            res.loss = rep;
            res.motion = motion;
            have_best = true;
        }
        best.push_back(res.loss.total);
        if (rep.total <= 1e-12 || it == cfg.max_iters) break;
        // Best-so-far rather than raw loss: Adam oscillates on the noisy object term.
        if (it >= kStopWindow) {
            const double before = best[static_cast<std::size_t>(it - kStopWindow)];
            if (before - res.loss.total <= cfg.tolerance * before) break;
        }
        const MotionField g = total_gradient(obj, motion, cfg, threads);
        for (const Vec2& v : g.values()) {
            if (!is_finite(v)) fail("non-finite gradient during optimization");
        }
        adam.step(motion, g);
    }
    return res;
}

}  // namespace

OptimResult optimize_motion(const Objective& obj, const OptimConfig& cfg, int threads) {
    validate(cfg);
    OptimResult res = run_once(obj, cfg, threads);
    if (res.folded) {
        spdlog::debug("final iterate folds over; restarting with learning rate {}",
                      cfg.learning_rate / 2);
        OptimConfig half = cfg;
        half.learning_rate /= 2;
        OptimResult second = run_once(obj, half, threads);
        if (second.loss.total <= res.loss.total) {
            std::swap(res, second);
        } else {
            res.folded = second.folded;
        }
        res.restarted = true;
    }
    return res;
}

OptimResult optimize_motion(const Image& input, const RetargetJob& job, const OptimConfig& cfg) {
    return optimize_motion(Objective(input, job), cfg);
}

}  // namespace objir
