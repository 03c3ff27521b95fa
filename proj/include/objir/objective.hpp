#pragma once

// Retargeting objective: weighted sum of an object-appearance term, a
// geometric (scale-preserving) term on in-object mesh edges and a boundary
// term that keeps the output mesh rectangular.

#include <cstdint>
#include <span>
#include <vector>

#include "objir/config.hpp"
#include "objir/geometry.hpp"
#include "objir/image.hpp"
#include "objir/warp.hpp"

namespace objir {

// One retargeting problem at optimization resolution.
struct RetargetJob {
    int in_width = 0;
    int in_height = 0;
    int out_width = 0;
    int out_height = 0;
    int rows = 8;
    int cols = 8;
    double scale_s = 1.0;
    LossWeights weights;
    std::vector<ObjectBox> boxes;  // input space
    bool normalize_losses = true;
    bool squared_geometric = false;
    BoxMapping box_mapping = BoxMapping::Exact;

    // Tangential slack for boundary vertices: W(J)/2V and H(J)/2U.
    double d_u() const { return out_width / (2.0 * cols); }
    double d_v() const { return out_height / (2.0 * rows); }

    static RetargetJob make(int in_width, int in_height, int out_width, int out_height,
                            std::vector<ObjectBox> boxes, const JobConfig& cfg = {});
};

// sqrt(out area / in area)
double auto_scale(double in_width, double in_height, double out_width, double out_height);

void validate(const RetargetJob& job);

struct LossReport {
    double total = 0.0;
    double object = 0.0;
    double geometric = 0.0;
    double boundary = 0.0;
    bool folded = false;
};

// Per-edge in-object flags. An edge counts when both endpoints of its rigid
// input-mesh edge lie in the same closed box.
struct EdgeMask {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> horizontal;  // (rows+1) x cols, (i,j)->(i,j+1)
    std::vector<std::uint8_t> vertical;    // rows x (cols+1), (i,j)->(i+1,j)
    int count = 0;

    bool h(int i, int j) const { return horizontal[static_cast<std::size_t>(i * cols + j)] != 0; }
    bool v(int i, int j) const { return vertical[static_cast<std::size_t>(i * (cols + 1) + j)] != 0; }
};

EdgeMask edge_mask(const Mesh& mesh_in, std::span<const ObjectBox> boxes_in);

// Input-side object crop resized by `scale_s` (the downsampling operator).
Image object_reference(const Image& input, const ObjectBox& box, double scale_s);

// Mean squared error after zero-padding both crops top-left to their
// elementwise maximum size.
double padded_mse(const Image& reference, const Image& output);

double object_loss(const Image& input, const Image& warped, std::span<const ObjectBox> boxes_in,
                   std::span<const ObjectBox> boxes_out, double scale_s);

struct GeometricOptions {
    bool normalize = false;  // divide by the number of in-object edges
    bool squared = false;
};

double geometric_loss(const Mesh& mesh_in, const Mesh& mesh_f, std::span<const ObjectBox> boxes_in,
                      double scale_s, GeometricOptions opts = {});
double geometric_loss(const Mesh& mesh_in, const Mesh& mesh_f, const EdgeMask& mask,
                      double scale_s, GeometricOptions opts = {});

// Number of boundary vertex slots: top/bottom rows plus left/right columns,
// corners counted in both groups.
int boundary_vertex_count(int rows, int cols);

double boundary_loss(const MotionField& motion, const Mesh& mesh_out_rigid, double d_u, double d_v,
                     bool normalize = false);

// Precomputed state for repeated evaluation of one job.
class Objective {
public:
    Objective(Image input, RetargetJob job);

    const RetargetJob& job() const { return job_; }
    const Image& input() const { return input_; }
    const Mesh& mesh_in() const { return mesh_in_; }
    const Mesh& mesh_out() const { return mesh_out_; }
    const EdgeMask& mask() const { return mask_; }
    const std::vector<Image>& references() const { return references_; }
    PixelRect output_rect() const { return {0, 0, job_.out_width, job_.out_height}; }

    LossReport evaluate(const MotionField& motion) const;

    // Input boxes mapped through (mesh_in -> mesh_f) and clipped to the output.
    std::vector<ObjectBox> output_boxes(const Mesh& mesh_f) const;

    // Object term for fixed output boxes.
    double object_term(const Mesh& mesh_f, std::span<const ObjectBox> boxes_out) const;
    double geometric_term(const Mesh& mesh_f) const;
    double boundary_term(const MotionField& motion) const;

    double geometric_divisor() const;
    double boundary_divisor() const;

private:
    Image input_;
    RetargetJob job_;
    Mesh mesh_in_;
    Mesh mesh_out_;
    EdgeMask mask_;
    std::vector<Image> references_;
};

LossReport total_loss(const Image& input, const MotionField& motion, const RetargetJob& job);

}  // namespace objir
