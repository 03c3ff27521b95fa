#include "objir/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

namespace objir {

namespace {

constexpr int kNewtonMaxIters = 20;
constexpr double kNewtonResidualTol = 1e-9;
constexpr double kParamTol = 1e-6;
constexpr double kSnapTol = 1e-12;
constexpr double kRectTol = 1e-9;

struct Quad {
    Vec2 p00, p01, p10, p11;
};

Quad quad_of(const Mesh& m, int row, int col) {
    return {m.vertex(row, col), m.vertex(row, col + 1), m.vertex(row + 1, col),
            m.vertex(row + 1, col + 1)};
}

Vec2 bilinear(const Quad& q, double u, double v) {
    return (1 - u) * (1 - v) * q.p00 + (1 - u) * v * q.p01 + u * (1 - v) * q.p10 + u * v * q.p11;
}

// Distance of (u, v) from the unit square in parameter space; 0 inside.
double param_excess(double u, double v) {
    return std::max({0.0, -u, u - 1.0, -v, v - 1.0});
}

struct RawCoord {
    double u = 0.0;
    double v = 0.0;
    bool ok = false;
};

RawCoord newton_inverse(const Quad& q, const Vec2& p) {
    double u = 0.5;
    double v = 0.5;
    for (int it = 0; it < kNewtonMaxIters; ++it) {
        const Vec2 r = bilinear(q, u, v) - p;
        if (norm(r) <= kNewtonResidualTol) return {u, v, true};
        const Vec2 du = (1 - v) * (q.p10 - q.p00) + v * (q.p11 - q.p01);
        const Vec2 dv = (1 - u) * (q.p01 - q.p00) + u * (q.p11 - q.p10);
        const double det = cross(du, dv);
        if (det == 0.0 || !std::isfinite(det)) break;
        const Vec2 rhs = -1.0 * r;
        u += cross(rhs, dv) / det;
        v += cross(du, rhs) / det;
        if (!std::isfinite(u) || !std::isfinite(v)) break;
    }
    const Vec2 r = bilinear(q, u, v) - p;
    return {u, v, norm(r) <= kNewtonResidualTol};
}

// Closed-form inverse: p - p00 = v*e + u*f + u*v*g is quadratic in v.
RawCoord quadratic_inverse(const Quad& q, const Vec2& p) {
    const Vec2 e = q.p01 - q.p00;
    const Vec2 f = q.p10 - q.p00;
    const Vec2 g = q.p00 - q.p01 - q.p10 + q.p11;
    const Vec2 h = p - q.p00;

    const double k2 = cross(e, g);
    const double k1 = cross(e, f) - cross(h, g);
    const double k0 = -cross(h, f);

    std::array<double, 2> roots{};
    int nroots = 0;
    const double scale = std::abs(cross(e, f)) + std::abs(k1) + 1e-300;
    if (std::abs(k2) <= 1e-14 * scale) {
        if (k1 != 0.0) roots[nroots++] = -k0 / k1;
    } else {
        double disc = k1 * k1 - 4.0 * k2 * k0;
        if (disc < 0.0) disc = 0.0;
        const double sq = std::sqrt(disc);
        const double t = -0.5 * (k1 + std::copysign(sq, k1));
        if (t != 0.0) {
            roots[nroots++] = t / k2;
            roots[nroots++] = k0 / t;
        } else {
            roots[nroots++] = -k1 / (2.0 * k2);
        }
    }

    RawCoord best;
    double best_excess = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nroots; ++k) {
        const double v = roots[k];
        const Vec2 d = f + v * g;
        const double dd = dot(d, d);
        if (dd == 0.0 || !std::isfinite(v)) continue;
        const double u = dot(h - v * e, d) / dd;
        const double ex = param_excess(u, v);
        if (ex < best_excess) {
            best_excess = ex;
            best = {u, v, true};
        }
    }
    return best;
}

RawCoord invert_raw(const Quad& q, const Vec2& p) {
    RawCoord c = newton_inverse(q, p);
    if (c.ok && param_excess(c.u, c.v) <= kParamTol) return c;
    RawCoord alt = quadratic_inverse(q, p);
    if (!alt.ok) return c;
    if (!c.ok || param_excess(alt.u, alt.v) < param_excess(c.u, c.v)) return alt;
    return c;
}

bool in_quad_bbox(const Quad& q, const Vec2& p) {
    const double x0 = std::min({q.p00.x, q.p01.x, q.p10.x, q.p11.x});
    const double x1 = std::max({q.p00.x, q.p01.x, q.p10.x, q.p11.x});
    const double y0 = std::min({q.p00.y, q.p01.y, q.p10.y, q.p11.y});
    const double y1 = std::max({q.p00.y, q.p01.y, q.p10.y, q.p11.y});
    const double margin = 1e-6 * ((x1 - x0) + (y1 - y0)) + 1e-9;
    return p.x >= x0 - margin && p.x <= x1 + margin && p.y >= y0 - margin && p.y <= y1 + margin;
}

// Applies the grid-line convention: a point on an interior line belongs to
// the cell that starts there; the last row/column keeps u=1 / v=1.
CellCoord normalize(const Mesh& m, int row, int col, double u, double v) {
    u = std::clamp(u, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    if (u < kSnapTol) u = 0.0;
    if (v < kSnapTol) v = 0.0;
    if (u > 1.0 - kSnapTol) {
        if (row < m.rows() - 1) {
            ++row;
            u = 0.0;
        } else {
            u = 1.0;
        }
    }
    if (v > 1.0 - kSnapTol) {
        if (col < m.cols() - 1) {
            ++col;
            v = 0.0;
        } else {
            v = 1.0;
        }
    }
    return {row, col, u, v};
}

void require_finite_grid(const VertexGrid& g) {
    for (const Vec2& p : g.values()) {
        if (!is_finite(p)) throw InvalidArgument("mesh vertex is not finite");
    }
}

}  // namespace

VertexGrid::VertexGrid(int rows, int cols, Vec2 fill) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw InvalidArgument("grid needs at least one cell per axis");
    values_.assign(static_cast<std::size_t>(rows + 1) * static_cast<std::size_t>(cols + 1), fill);
}

Mesh::Mesh(double width, double height, VertexGrid vertices)
    : width_(width), height_(height), grid_(std::move(vertices)) {
    if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("mesh dimensions must be positive");
    if (grid_.rows() < 1 || grid_.cols() < 1) throw InvalidArgument("mesh needs at least one cell");
    if (grid_.size() != static_cast<std::size_t>(grid_.vertex_rows()) *
                            static_cast<std::size_t>(grid_.vertex_cols())) {
        throw InvalidArgument("mesh vertex count does not match its dimensions");
    }
    require_finite_grid(grid_);
}

Vec2 Mesh::eval(int row, int col, double u, double v) const {
    return bilinear(quad_of(*this, row, col), u, v);
}

bool Mesh::is_rigid() const {
    for (int i = 0; i <= rows(); ++i) {
        for (int j = 0; j <= cols(); ++j) {
            const Vec2& p = vertex(i, j);
            if (p.x != j * width_ / cols() || p.y != i * height_ / rows()) return false;
        }
    }
    return true;
}

Mesh build_rigid_mesh(double width, double height, int rows, int cols) {
    if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("mesh dimensions must be positive");
    if (rows < 1 || cols < 1) throw InvalidArgument("mesh needs at least one cell per axis");
    VertexGrid g(rows, cols);
    for (int i = 0; i <= rows; ++i) {
        for (int j = 0; j <= cols; ++j) {
            g.at(i, j) = {j * width / cols, i * height / rows};
        }
    }
    return Mesh(width, height, std::move(g));
}

Mesh apply_motion(const Mesh& base, const MotionField& motion) {
    if (!base.grid().same_shape(motion)) {
        throw InvalidArgument("motion field dimensions do not match the mesh");
    }
    VertexGrid g = base.grid();
    for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] += motion.values()[k];
    return Mesh(base.width(), base.height(), std::move(g));
}

CellCoord locate_in_rigid(const Mesh& mesh, const Vec2& p) {
    if (!(p.x >= -kRectTol && p.x <= mesh.width() + kRectTol && p.y >= -kRectTol &&
          p.y <= mesh.height() + kRectTol)) {
        std::ostringstream os;
        os << "point (" << p.x << ", " << p.y << ") outside mesh rectangle " << mesh.width() << "x"
           << mesh.height();
        throw OutOfBounds(os.str());
    }
    const double tx = std::clamp(p.x, 0.0, mesh.width()) * mesh.cols() / mesh.width();
    const double ty = std::clamp(p.y, 0.0, mesh.height()) * mesh.rows() / mesh.height();
    const int col = std::clamp(static_cast<int>(std::floor(tx)), 0, mesh.cols() - 1);
    const int row = std::clamp(static_cast<int>(std::floor(ty)), 0, mesh.rows() - 1);
    return {row, col, ty - row, tx - col};
}

std::optional<CellCoord> invert_bilinear(const Mesh& mesh, int row, int col, const Vec2& p) {
    const Quad q = quad_of(mesh, row, col);
    const RawCoord c = invert_raw(q, p);
    if (!c.ok || param_excess(c.u, c.v) > kParamTol) return std::nullopt;
    return CellCoord{row, col, std::clamp(c.u, 0.0, 1.0), std::clamp(c.v, 0.0, 1.0)};
}

std::optional<CellCoord> try_locate(const Mesh& mesh, const Vec2& p,
                                    std::optional<CellCoord> hint) {
    const int rows = mesh.rows();
    const int cols = mesh.cols();

    std::optional<CellCoord> best;
    double best_excess = std::numeric_limits<double>::infinity();

    auto probe = [&](int r, int c) -> bool {
        const Quad q = quad_of(mesh, r, c);
        if (!in_quad_bbox(q, p)) return false;
        const RawCoord raw = invert_raw(q, p);
        if (!raw.ok) return false;
        const double ex = param_excess(raw.u, raw.v);
        if (ex > kParamTol) return false;
        if (ex < best_excess) {
            best_excess = ex;
            best = normalize(mesh, r, c, raw.u, raw.v);
        }
        return ex == 0.0;
    };

    int hr = -1;
    int hc = -1;
    if (hint && hint->row >= 0 && hint->row < rows && hint->col >= 0 && hint->col < cols) {
        hr = hint->row;
        hc = hint->col;
        if (probe(hr, hc)) return best;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                const int r = hr + dr;
                const int c = hc + dc;
                if ((dr == 0 && dc == 0) || r < 0 || r >= rows || c < 0 || c >= cols) continue;
                if (probe(r, c)) return best;
            }
        }
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (hr >= 0 && std::abs(r - hr) <= 1 && std::abs(c - hc) <= 1) continue;
            if (probe(r, c)) return best;
        }
    }
    return best;
}

CellCoord locate_in_deformed(const Mesh& mesh, const Vec2& p, std::optional<CellCoord> hint) {
    if (auto c = try_locate(mesh, p, hint)) {
        const Vec2 back = mesh.eval(c->row, c->col, c->u, c->v);
        if (norm(back - p) > 1e-6) {
            std::ostringstream os;
            os << "inverse bilinear residual " << norm(back - p) << " px at (" << p.x << ", " << p.y
               << ")";
            throw NumericalError(os.str());
        }
        return *c;
    }
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") is not covered by the mesh";
    throw OutsideMesh(os.str());
}

Vec2 map_point(const Mesh& src, const Mesh& dst, const Vec2& p) {
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
        throw InvalidArgument("meshes must share rows and cols");
    }
    if (src == dst) return p;
    if (src.is_rigid()) {
        if (dst.is_rigid()) return {p.x * dst.width() / src.width(), p.y * dst.height() / src.height()};
        const CellCoord c = locate_in_rigid(src, p);
        return dst.eval(c.row, c.col, c.u, c.v);
    }
    if (const auto c = try_locate(src, p)) return dst.eval(c->row, c->col, c->u, c->v);

    // Not covered (the deformed boundary may sit slightly inside the image):
    // extrapolate the bilinear map of the nearest cell in parameter space.
    int best_r = 0;
    int best_c = 0;
    RawCoord best;
    double best_excess = std::numeric_limits<double>::infinity();
    for (int r = 0; r < src.rows(); ++r) {
        for (int c = 0; c < src.cols(); ++c) {
            const RawCoord raw = invert_raw(quad_of(src, r, c), p);
            if (!raw.ok) continue;
            const double ex = param_excess(raw.u, raw.v);
            if (ex < best_excess) {
                best_excess = ex;
                best = raw;
                best_r = r;
                best_c = c;
            }
        }
    }
    if (!best.ok) throw OutsideMesh("point cannot be related to any cell of the source mesh");
    return dst.eval(best_r, best_c, best.u, best.v);
}

ObjectBox map_box(const Mesh& src, const Mesh& dst, const ObjectBox& box, BoxMapping mode) {
    const double xm = 0.5 * (box.x0 + box.x1);
    const double ym = 0.5 * (box.y0 + box.y1);
    std::vector<Vec2> samples = {{box.x0, box.y0}, {box.x1, box.y0}, {box.x0, box.y1},
                                 {box.x1, box.y1}};
    if (mode == BoxMapping::Hull8) {
        samples.insert(samples.end(), {{xm, box.y0}, {xm, box.y1}, {box.x0, ym}, {box.x1, ym}});
    } else if (mode == BoxMapping::Exact) {
        if (src.is_rigid()) {
            // Inside a cell a horizontal or vertical input segment maps to a
            // straight segment, so the image of the boundary is a polyline
            // bending only where it crosses grid lines.
            for (int j = 1; j < src.cols(); ++j) {
                const double x = j * src.width() / src.cols();
                if (x > box.x0 && x < box.x1) samples.insert(samples.end(), {{x, box.y0}, {x, box.y1}});
            }
            for (int i = 1; i < src.rows(); ++i) {
                const double y = i * src.height() / src.rows();
                if (y > box.y0 && y < box.y1) samples.insert(samples.end(), {{box.x0, y}, {box.x1, y}});
            }
        } else {
            const int nx = std::max(1, static_cast<int>(std::ceil(box.width())));
            const int ny = std::max(1, static_cast<int>(std::ceil(box.height())));
            for (int k = 1; k < nx; ++k) {
                const double x = box.x0 + box.width() * k / nx;
                samples.insert(samples.end(), {{x, box.y0}, {x, box.y1}});
            }
            for (int k = 1; k < ny; ++k) {
                const double y = box.y0 + box.height() * k / ny;
                samples.insert(samples.end(), {{box.x0, y}, {box.x1, y}});
            }
        }
    }
    ObjectBox out;
    out.id = box.id;
    out.x0 = out.y0 = std::numeric_limits<double>::infinity();
    out.x1 = out.y1 = -std::numeric_limits<double>::infinity();
    for (const Vec2& s : samples) {
        const Vec2 q = map_point(src, dst, s);
        out.x0 = std::min(out.x0, q.x);
        out.y0 = std::min(out.y0, q.y);
        out.x1 = std::max(out.x1, q.x);
        out.y1 = std::max(out.y1, q.y);
    }
    return out;
}

Mesh rescale_mesh(const Mesh& mesh, double new_width, double new_height) {
    if (!(new_width > 0.0) || !(new_height > 0.0)) {
        throw InvalidArgument("rescale target must be positive");
    }
    if (mesh.is_rigid()) return build_rigid_mesh(new_width, new_height, mesh.rows(), mesh.cols());
    const double kx = new_width / mesh.width();
    const double ky = new_height / mesh.height();
    VertexGrid g = mesh.grid();
    for (Vec2& p : g.values()) p = {p.x * kx, p.y * ky};
    return Mesh(new_width, new_height, std::move(g));
}

std::vector<CellIndex> check_foldover(const Mesh& mesh) {
    std::vector<CellIndex> bad;
    auto area = [](const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); };
    for (int r = 0; r < mesh.rows(); ++r) {
        for (int c = 0; c < mesh.cols(); ++c) {
            const Quad q = quad_of(mesh, r, c);
            const bool ok = area(q.p00, q.p01, q.p11) > 0 && area(q.p00, q.p11, q.p10) > 0 &&
                            area(q.p00, q.p01, q.p10) > 0 && area(q.p01, q.p11, q.p10) > 0;
            if (!ok) bad.push_back({r, c});
        }
    }
    return bad;
}

ObjectBox clip_box(const ObjectBox& box, double width, double height) {
    ObjectBox out = box;
    out.x0 = std::clamp(box.x0, 0.0, width);
    out.x1 = std::clamp(box.x1, 0.0, width);
    out.y0 = std::clamp(box.y0, 0.0, height);
    out.y1 = std::clamp(box.y1, 0.0, height);
    return out;
}

}  // namespace objir
