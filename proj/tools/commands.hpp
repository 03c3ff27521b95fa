#pragma once

// Command implementations behind the `objir` executable. Everything here is
// callable from tests; main() only forwards argv.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "objir/config.hpp"
#include "objir/metric.hpp"

namespace objir::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kBadArgs = 2,
    kIoError = 3,
    kOptimizerError = 4,
    kFoldOver = 5,
};

// Parses args (args[0] is the program name) and runs the subcommand.
// Machine-readable results go to `out`, diagnostics to stderr.
int run(const std::vector<std::string>& args, std::ostream& out);

enum class Axis { Width, Height };

// --scale k resizes one axis to round(k * size); explicit sizes win.
std::pair<int, int> target_size(int width, int height, std::optional<double> scale,
                                std::optional<int> out_width, std::optional<int> out_height,
                                Axis axis = Axis::Width);

// <dir>/<stem>.boxes.json next to an image.
std::filesystem::path sibling_boxes(const std::filesystem::path& image);

struct BenchOptions {
    std::filesystem::path dataset_dir;
    std::vector<double> scales{0.5, 0.75, 1.25, 1.5, 1.75};
    std::vector<std::string> methods{"objectir", "scl", "cr"};
    JobConfig config;
    int threads = 1;
    std::optional<std::filesystem::path> mesh_dir;  // dump objectir meshes here
};

struct BenchRow {
    std::string image;
    std::string method;
    double scale = 1.0;
    std::optional<DistortionReport> report;  // empty: not applicable ("--")
};

// Rows ordered by image name, then method, then scale.
std::vector<BenchRow> run_bench(const BenchOptions& opts);
std::string bench_csv(const std::vector<BenchRow>& rows);
// Mean error per (method, scale), one line per method.
std::string bench_summary(const std::vector<BenchRow>& rows, const std::vector<double>& scales,
                          const std::vector<std::string>& methods);

// File name fragment for a mesh dumped by the benchmark.
std::string bench_mesh_name(const std::string& image_stem, double scale);

struct GradcheckReport {
    double max_rel_error = 0.0;
    int checked = 0;
    int skipped = 0;  // components next to a kink of |.| or relu
    bool passed = false;
};

inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kGradcheckStep = 1e-4;

// Central differences of lambda_g*l_g + lambda_b*l_b against the analytic
// gradient at `trials` random motion fields. `corrupt` perturbs the analytic
// gradient as a negative control.
GradcheckReport gradient_check(std::uint64_t seed, int trials, bool corrupt = false);

// Writes fixture_NN.png and fixture_NN.boxes.json for the synthetic suite.
void write_synth_dataset(const std::filesystem::path& dir, int count, std::uint64_t seed, int size);

}  // namespace objir::cli
