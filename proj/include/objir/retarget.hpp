#pragma once

// End-to-end retargeting: optimize the mesh at working resolution, upsample
// it and warp the full-resolution input.

#include <vector>

#include "objir/config.hpp"
#include "objir/optimize.hpp"
#include "objir/warp.hpp"

namespace objir {

// Optimized meshes at full resolution plus the working-resolution solution.
// The warp reads input pixels at `src` positions for output pixels located
// in `dst`. For reduction src is the rigid input mesh and dst the deformed
// output mesh; for inverted enlargement src is the deformed mesh resized to
// the input and dst the rigid output mesh.
struct MeshSolution {
    Mesh src;
    Mesh dst;
    Mesh mesh_f;          // deformed mesh at full resolution (== dst or src)
    MotionField motion;   // raw working-resolution motion
    OptimResult optim;
    RetargetJob job;      // working-resolution job that was optimized
    bool enlarged = false;
    bool inverted = false;  // mesh roles exchanged
    bool degenerate = false;  // no objects: pure scale
};

struct RetargetResult {
    Image image;
    MeshSolution mesh;
    std::size_t uncovered = 0;
};

// Working size keeping the aspect with the long side at `resolution`.
std::pair<int, int> working_size(int width, int height, int resolution);

// Boxes scaled from one image size to another, clipped, invalid ones dropped.
std::vector<ObjectBox> scale_boxes(const std::vector<ObjectBox>& boxes, double from_w, double from_h,
                                   double to_w, double to_h);

MeshSolution solve_reduce(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                          int out_height, const JobConfig& cfg, int threads = 1);
MeshSolution solve_enlarge(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                           int out_height, const JobConfig& cfg, int threads = 1);
// Picks reduction or enlargement by comparing the target to the input.
MeshSolution solve(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                   int out_height, const JobConfig& cfg, int threads = 1);

RetargetResult retarget_reduce(const Image& input, const std::vector<ObjectBox>& boxes,
                               int out_width, int out_height, const JobConfig& cfg);
RetargetResult retarget_enlarge(const Image& input, const std::vector<ObjectBox>& boxes,
                                int out_width, int out_height, const JobConfig& cfg);
RetargetResult retarget(const Image& input, const std::vector<ObjectBox>& boxes, int out_width,
                        int out_height, const JobConfig& cfg);

// Renders a solution; throws FoldOverError when the deformed mesh folds.
RetargetResult render(const Image& input, MeshSolution solution, int out_width, int out_height);

}  // namespace objir
