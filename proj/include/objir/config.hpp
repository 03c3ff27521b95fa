#pragma once

#include <cstdint>
#include <optional>

#include "objir/geometry.hpp"

namespace objir {

struct LossWeights {
    double object = 1.0;
    double geometric = 0.1;
    double boundary = 0.01;
    bool operator==(const LossWeights&) const = default;
};

// Optimizer settings for the per-image motion search. Learning rate is in
// pixels per step; the defaults were tuned on the synthetic fixture suite.
struct OptimConfig {
    double learning_rate = 0.5;
    double decay = 0.995;
    int max_iters = 500;
    double tolerance = 1e-5;
    double fd_step = 0.5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    bool operator==(const OptimConfig&) const = default;
};

enum class EnlargeMode { Invert, Direct };

// Everything a retargeting run needs besides the image, boxes and target size.
struct JobConfig {
    int rows = 8;
    int cols = 8;
    LossWeights weights;
    std::optional<double> scale_s;  // overrides sqrt(out area / in area)
    bool normalize_losses = true;
    bool squared_geometric = false;
    BoxMapping box_mapping = BoxMapping::Exact;
    OptimConfig optim;
    int working_resolution = 224;
    EnlargeMode enlarge_mode = EnlargeMode::Invert;
    bool operator==(const JobConfig&) const = default;
};

void validate(const OptimConfig& cfg);
void validate(const JobConfig& cfg);

}  // namespace objir
