#pragma once

// Quad-mesh geometry: rigid/deformed meshes, point location, inverse
// bilinear coordinates and box mapping between a pair of meshes.
//
// Coordinates are continuous pixels with the origin at the top-left image
// corner, x to the right and y downward. A mesh with `rows` = U and
// `cols` = V cells has (U+1)x(V+1) vertices stored row-major.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "objir/errors.hpp"

namespace objir {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend Vec2 operator*(double k, const Vec2& a) { return {k * a.x, k * a.y}; }
    friend Vec2 operator*(const Vec2& a, double k) { return {k * a.x, k * a.y}; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

// Dense (rows+1)x(cols+1) grid of 2D values. Shared storage layout for
// mesh vertices, motion fields and their gradients.
class VertexGrid {
public:
    VertexGrid() = default;
    VertexGrid(int rows, int cols, Vec2 fill = {});

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int vertex_rows() const { return rows_ + 1; }
    int vertex_cols() const { return cols_ + 1; }
    std::size_t size() const { return values_.size(); }

    Vec2& at(int i, int j) { return values_[index(i, j)]; }
    const Vec2& at(int i, int j) const { return values_[index(i, j)]; }
    std::vector<Vec2>& values() { return values_; }
    const std::vector<Vec2>& values() const { return values_; }

    bool same_shape(const VertexGrid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const VertexGrid&) const = default;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_ + 1) +
               static_cast<std::size_t>(j);
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<Vec2> values_;
};

// Per-vertex displacement in pixels; also used for gradients.
using MotionField = VertexGrid;

class Mesh {
public:
    Mesh() = default;
    // Takes ownership of a vertex grid; validates finiteness and dimensions.
    Mesh(double width, double height, VertexGrid vertices);

    int rows() const { return grid_.rows(); }
    int cols() const { return grid_.cols(); }
    double width() const { return width_; }
    double height() const { return height_; }

    const Vec2& vertex(int i, int j) const { return grid_.at(i, j); }
    const VertexGrid& grid() const { return grid_; }

    // Bilinear interpolation of cell (row, col) at local (u vertical, v horizontal).
    Vec2 eval(int row, int col, double u, double v) const;

    // True iff every vertex sits exactly at its uniform-grid position.
    bool is_rigid() const;

    bool operator==(const Mesh&) const = default;

private:
    double width_ = 0.0;
    double height_ = 0.0;
    VertexGrid grid_;
};

struct CellCoord {
    int row = 0;
    int col = 0;
    double u = 0.0;  // vertical, 0 at the cell's top edge
    double v = 0.0;  // horizontal, 0 at the cell's left edge
};

struct ObjectBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    std::string id;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(const Vec2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    bool valid() const { return x0 < x1 && y0 < y1; }
    bool operator==(const ObjectBox&) const = default;
};

enum class BoxMapping {
    Hull8,    // corners plus edge midpoints, axis-aligned hull
    Corners,  // corners only
    Exact,    // hull of the whole mapped boundary (grid crossings for a rigid src)
};

Mesh build_rigid_mesh(double width, double height, int rows, int cols);

Mesh apply_motion(const Mesh& base, const MotionField& motion);

CellCoord locate_in_rigid(const Mesh& mesh, const Vec2& p);

// Inverse bilinear location in a general (fold-over-free) quad mesh.
// Searches the hint cell, then its neighbours, then every cell.
CellCoord locate_in_deformed(const Mesh& mesh, const Vec2& p,
                             std::optional<CellCoord> hint = std::nullopt);

// Same as locate_in_deformed but returns nullopt instead of throwing when
// p is not covered. Used by the warp, which counts uncovered pixels.
std::optional<CellCoord> try_locate(const Mesh& mesh, const Vec2& p,
                                    std::optional<CellCoord> hint = std::nullopt);

// Local coordinates of p inside a single quad; nullopt when p falls outside
// it by more than 1e-6 in (u, v).
std::optional<CellCoord> invert_bilinear(const Mesh& mesh, int row, int col, const Vec2& p);

// Locates p in src (closed form when src is rigid) and evaluates the same
// local coordinates in dst.
Vec2 map_point(const Mesh& src, const Mesh& dst, const Vec2& p);

ObjectBox map_box(const Mesh& src, const Mesh& dst, const ObjectBox& box,
                  BoxMapping mode = BoxMapping::Exact);

Mesh rescale_mesh(const Mesh& mesh, double new_width, double new_height);

std::vector<CellIndex> check_foldover(const Mesh& mesh);

// Clips a box to [0,width]x[0,height]. The result may be empty (x0 >= x1).
ObjectBox clip_box(const ObjectBox& box, double width, double height);

}  // namespace objir
