#include "objir/config.hpp"

#include <cmath>

namespace objir {

void validate(const OptimConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("optimizer.learning_rate must be > 0");
    if (!(cfg.decay > 0.0 && cfg.decay <= 1.0)) throw InvalidArgument("optimizer.decay must be in (0, 1]");
    if (!(cfg.fd_step > 0.0)) throw InvalidArgument("optimizer.fd_step must be > 0");
    if (cfg.max_iters < 0) throw InvalidArgument("optimizer.max_iters must be >= 0");
    if (!(cfg.tolerance >= 0.0)) throw InvalidArgument("optimizer.tolerance must be >= 0");
    if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
        !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) {
        throw InvalidArgument("optimizer Adam betas must be in [0, 1)");
    }
    if (!(cfg.adam_eps > 0.0)) throw InvalidArgument("optimizer.adam_eps must be > 0");
}

void validate(const JobConfig& cfg) {
    if (cfg.rows < 2 || cfg.cols < 2) throw InvalidArgument("mesh.rows and mesh.cols must be >= 2");
    const auto& w = cfg.weights;
    if (!(w.object >= 0.0) || !(w.geometric >= 0.0) || !(w.boundary >= 0.0)) {
        throw InvalidArgument("weights must be non-negative");
    }
    if (cfg.scale_s && !(*cfg.scale_s > 0.0 && std::isfinite(*cfg.scale_s))) {
        throw InvalidArgument("scale_s must be positive");
    }
    if (cfg.working_resolution < 16) throw InvalidArgument("working_resolution must be >= 16");
    validate(cfg.optim);
}

}  // namespace objir
