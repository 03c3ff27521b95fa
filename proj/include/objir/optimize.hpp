#pragma once

// Direct minimization of the retargeting objective over the per-vertex
// motion field. Geometric and boundary gradients are analytic; the object
// term is differentiated by central differences on the warped crops.

#include <vector>

#include "objir/config.hpp"
#include "objir/objective.hpp"

namespace objir {

// Gradient of the geometric term (normalized per job settings) with respect
// to every vertex displacement. Edges with |s*e - e'| < 1e-12 contribute 0.
MotionField grad_geometric(const Mesh& mesh_in, const MotionField& motion, const RetargetJob& job);
MotionField grad_geometric(const Objective& obj, const MotionField& motion);

// Subgradient of the boundary term; sign(0) = 0 and the relu kink gives 0.
MotionField grad_boundary(const MotionField& motion, const RetargetJob& job);

// Central-difference gradient of the object term. Output boxes are taken
// from the unperturbed mesh and held fixed. Only pixels inside the cells
// incident to the perturbed vertex are re-warped; vertices whose cells
// cannot touch any output box get exactly 0. Objects whose error is already
// exactly 0 sit at a minimum and contribute 0.
MotionField grad_object_fd(const Objective& obj, const MotionField& motion, double fd_step,
                           int threads = 1);
MotionField grad_object_fd(const Image& input, const MotionField& motion, const RetargetJob& job,
                           const OptimConfig& cfg);

// Weighted sum of the three gradients.
MotionField total_gradient(const Objective& obj, const MotionField& motion, const OptimConfig& cfg,
                           int threads = 1);

// Bias-corrected Adam with learning rate lr * decay^t at step t (0-based).
class Adam {
public:
    Adam(int rows, int cols, const OptimConfig& cfg);

    void step(MotionField& motion, const MotionField& gradient);
    int iteration() const { return t_; }

private:
    OptimConfig cfg_;
    MotionField m_;
    MotionField v_;
    int t_ = 0;
};

struct OptimResult {
    MotionField motion;  // lowest-loss fold-free iterate
    LossReport loss;     // loss at `motion`
    std::vector<LossReport> trace;  // every evaluated iterate of the returned run
    int iterations = 0;
    bool restarted = false;  // the first run ended on a folded mesh
    bool folded = false;     // the returned run ended on a folded mesh
};

// Runs Adam from zero motion. When the last iterate folds over, a second run
// with half the learning rate is made and the lower-loss result is kept.

OptimResult optimize_motion(const Objective& obj, const OptimConfig& cfg, int threads = 1);
OptimResult optimize_motion(const Image& input, const RetargetJob& job, const OptimConfig& cfg);

}  // namespace objir
