#include "commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "objir/errors.hpp"
#include "objir/io.hpp"
#include "objir/optimize.hpp"
#include "objir/parallel.hpp"
#include "objir/retarget.hpp"
#include "objir/synth.hpp"
#include "objir/viz.hpp"

namespace objir::cli {

namespace fs = std::filesystem;
using io::json;

std::pair<int, int> target_size(int width, int height, std::optional<double> scale,
                                std::optional<int> out_width, std::optional<int> out_height, Axis axis) {
    int w = width;
    int h = height;
    if (scale) {
        if (!(*scale > 0.0)) throw InvalidArgument("--scale must be positive");
        if (axis == Axis::Width) {
            w = static_cast<int>(std::lround(*scale * width));
        } else {
            h = static_cast<int>(std::lround(*scale * height));
        }
    }
    if (out_width) w = *out_width;
    if (out_height) h = *out_height;
    if (w <= 0 || h <= 0) throw InvalidArgument("target size must be positive");
    return {w, h};
}

fs::path sibling_boxes(const fs::path& image) {
    return image.parent_path() / (image.stem().string() + ".boxes.json");
}

std::string bench_mesh_name(const std::string& image_stem, double scale) {
    return image_stem + "_objectir_" + io::format_double(scale) + ".mesh.json";
}

namespace {

bool is_image(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<BenchRow> bench_image(const fs::path& path, const BenchOptions& opts) {
    std::vector<BenchRow> rows;
    const fs::path box_path = sibling_boxes(path);
    if (!fs::exists(box_path)) {
        spdlog::warn("{}: no box file {}; skipped", path.filename().string(), box_path.filename().string());
        return rows;
    }
    const Image img = io::load_image(path);
    const std::vector<ObjectBox> boxes = io::load_boxes(box_path, std::pair{img.width(), img.height()}).boxes;
    if (boxes.empty()) {
        spdlog::warn("{}: no valid boxes; skipped", path.filename().string());
        return rows;
    }
    const std::string name = path.filename().string();
    for (const auto& method : opts.methods) {
        for (double k : opts.scales) {
            const auto [w, h] = target_size(img.width(), img.height(), k, std::nullopt, std::nullopt);
            BenchRow row{name, method, k, std::nullopt};
            if (method == "objectir") {
                const MeshSolution sol = solve(img, boxes, w, h, opts.config, 1);
                row.report = measure_result(sol.src, sol.dst, boxes, w, h, opts.config.box_mapping);
                if (opts.mesh_dir) {
                    io::save_mesh(sol.inverted ? sol.src : sol.dst,
                                  *opts.mesh_dir / bench_mesh_name(path.stem().string(), k));
                }
            } else if (method == "scl") {
                row.report = distortion_error(boxes, scl_boxes(boxes, img.width(), img.height(), w, h));
            } else if (method == "cr") {
                if (w <= img.width() && h <= img.height()) {
                    const PixelRect win = best_crop_window(img.width(), img.height(), boxes, w, h);
                    row.report = distortion_error(boxes, crop_boxes(boxes, win));
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
    if (!fs::is_directory(opts.dataset_dir)) {
        throw IoError("dataset directory not found: " + opts.dataset_dir.string());
    }
    for (const auto& m : opts.methods) {
        if (m != "objectir" && m != "scl" && m != "cr") throw InvalidArgument("unknown method '" + m + "'");
    }
    if (opts.mesh_dir) fs::create_directories(*opts.mesh_dir);
    std::vector<fs::path> images;
    for (const auto& e : fs::directory_iterator(opts.dataset_dir)) {
        if (e.is_regular_file() && is_image(e.path())) images.push_back(e.path());
    }
    std::sort(images.begin(), images.end());
    std::vector<std::vector<BenchRow>> slots(images.size());
    parallel_for(static_cast<int>(images.size()), opts.threads, [&](int i) {
        slots[static_cast<std::size_t>(i)] = bench_image(images[static_cast<std::size_t>(i)], opts);
    });
    std::vector<BenchRow> rows;
    for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string s = io::csv_header() + "\n";
    for (const auto& r : rows) {
        if (r.report) {
            s += io::csv_row(r.image, r.method, r.scale, *r.report) + "\n";
        } else {
            s += r.image + "," + r.method + "," + io::format_double(r.scale) + ",--,--\n";
        }
    }
    return s;
}

std::string bench_summary(const std::vector<BenchRow>& rows, const std::vector<double>& scales,
                          const std::vector<std::string>& methods) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "method";
    for (double k : scales) os << std::right << std::setw(9) << io::format_double(k);
    os << "\n";
    for (const auto& m : methods) {
        os << std::left << std::setw(10) << m;
        for (double k : scales) {
            double sum = 0;
            int n = 0;
            for (const auto& r : rows) {
                if (r.method == m && r.scale == k && r.report) {
                    sum += r.report->mean_error;
                    ++n;
                }
            }
            std::ostringstream cell;
            if (n > 0) {
                cell << std::fixed << std::setprecision(4) << sum / n;
            } else {
                cell << "--";
            }
            os << std::right << std::setw(9) << cell.str();
        }
        os << "\n";
    }
    return os.str();
}

GradcheckReport gradient_check(std::uint64_t seed, int trials, bool corrupt) {
    if (trials < 1) throw InvalidArgument("--trials must be at least 1");
    const auto fx = synth::make_fixture(static_cast<int>(seed % 10), seed);
    const RetargetJob job = RetargetJob::make(224, 224, 112, 224, fx.boxes);
    const Objective obj(fx.image, job);
    const double lg = job.weights.geometric;
    const double lb = job.weights.boundary;
    const double h = kGradcheckStep;
    auto smooth_part = [&](const MotionField& m) {
        return lg * obj.geometric_term(apply_motion(obj.mesh_out(), m)) + lb * obj.boundary_term(m);
    };
    const Mesh& in = obj.mesh_in();
    const EdgeMask& mask = obj.mask();

    // Distance of a component from the nearest nondifferentiable point.
    auto kink_distance = [&](const MotionField& m, int i, int j, int axis) {
        double best = std::numeric_limits<double>::infinity();
        const double f = axis == 0 ? m.at(i, j).x : m.at(i, j).y;
        const bool top_bottom = i == 0 || i == job.rows;
        const bool left_right = j == 0 || j == job.cols;
        if ((axis == 1 && top_bottom) || (axis == 0 && left_right)) best = std::min(best, std::abs(f));
        if (axis == 0 && top_bottom) best = std::min(best, std::abs(std::abs(f) - job.d_u()));
        if (axis == 1 && left_right) best = std::min(best, std::abs(std::abs(f) - job.d_v()));
        const Mesh mf = apply_motion(obj.mesh_out(), m);
        auto edge = [&](int i0, int j0, int i1, int j1) {
            const Vec2 r = job.scale_s * (in.vertex(i1, j1) - in.vertex(i0, j0)) -
                           (mf.vertex(i1, j1) - mf.vertex(i0, j0));
            best = std::min(best, std::sqrt(dot(r, r)));
        };
        if (j < job.cols && mask.h(i, j)) edge(i, j, i, j + 1);
        if (j > 0 && mask.h(i, j - 1)) edge(i, j - 1, i, j);
        if (i < job.rows && mask.v(i, j)) edge(i, j, i + 1, j);
        if (i > 0 && mask.v(i - 1, j)) edge(i - 1, j, i, j);
        return best;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    GradcheckReport rep;
    for (int t = 0; t < trials; ++t) {
        MotionField m(job.rows, job.cols);
        for (Vec2& v : m.values()) v = {d(rng), d(rng)};
        const MotionField ga = grad_geometric(obj, m);
        const MotionField gb = grad_boundary(m, job);
        for (int i = 0; i <= job.rows; ++i) {
            for (int j = 0; j <= job.cols; ++j) {
                for (int axis = 0; axis < 2; ++axis) {
                    if (kink_distance(m, i, j, axis) < 1e-6) {
                        ++rep.skipped;
                        continue;
                    }
                    double& x = axis == 0 ? m.at(i, j).x : m.at(i, j).y;
                    const double x0 = x;
                    x = x0 + h;
                    const double up = smooth_part(m);
                    x = x0 - h;
                    const double dn = smooth_part(m);
                    x = x0;
                    const double fd = (up - dn) / (2 * h);
                    double an = lg * (axis == 0 ? ga.at(i, j).x : ga.at(i, j).y) +
                                lb * (axis == 0 ? gb.at(i, j).x : gb.at(i, j).y);
                    if (corrupt) an *= 1.01;
                    const double rel = std::abs(an - fd) / std::max(std::abs(fd), 1e-8);
                    rep.max_rel_error = std::max(rep.max_rel_error, rel);
                    ++rep.checked;
                }
            }
        }
    }
    const int total = rep.checked + rep.skipped;
    rep.passed = rep.max_rel_error <= kGradcheckTolerance && rep.skipped * 20 <= total;
    return rep;
}

void write_synth_dataset(const fs::path& dir, int count, std::uint64_t seed, int size) {
    if (count < 1) throw InvalidArgument("--count must be at least 1");
    fs::create_directories(dir);
    for (const auto& fx : synth::fixture_suite(count, seed, size)) {
        io::save_png(fx.image, dir / (fx.name + ".png"));
        json j = io::boxes_to_json(fx.name + ".png", fx.boxes);
        j["width"] = fx.image.width();
        j["height"] = fx.image.height();
        io::write_text(dir / (fx.name + ".boxes.json"), j.dump(2) + "\n");
    }
}

namespace {

void setup_logging(int verbosity, bool quiet) {
    static auto logger = [] {
        auto l = spdlog::stderr_color_mt("objir");
        spdlog::set_default_logger(l);
        return l;
    }();
    spdlog::level::level_enum level = spdlog::level::info;
    if (quiet) level = spdlog::level::warn;
    if (verbosity > 0) level = spdlog::level::debug;
    logger->set_level(level);
}

std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x != std::string::npos) {
            std::size_t a = 0;
            std::size_t b = 0;
            const int w = std::stoi(s.substr(0, x), &a);
            const int h = std::stoi(s.substr(x + 1), &b);
            if (a == x && b == s.size() - x - 1 && w > 0 && h > 0) return {w, h};
        }
    } catch (const std::exception&) {
    }
    throw InvalidArgument("expected a size WxH, got '" + s + "'");
}

std::vector<double> parse_scales(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t n = 0;
            const double v = std::stod(tok, &n);
            if (n != tok.size() || !(v > 0.0)) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InvalidArgument("bad scale '" + tok + "'");
        }
    }
    if (out.empty()) throw InvalidArgument("no scales given");
    return out;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

// Options shared by retarget and bench that override the config file.
struct ConfigFlags {
    std::string config;
    int rows = 0;
    int cols = 0;
    double lr = 0;
    int max_iters = 0;
    double scale_s = 0;
    std::uint64_t seed = 0;
    std::string enlarge_mode;
    std::string box_mapping;
    CLI::Option* o_rows = nullptr;
    CLI::Option* o_cols = nullptr;
    CLI::Option* o_lr = nullptr;
    CLI::Option* o_iters = nullptr;
    CLI::Option* o_s = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_enlarge = nullptr;
    CLI::Option* o_mapping = nullptr;

    void add(CLI::App* app) {
        app->add_option("--config", config, "job configuration JSON");
        o_rows = app->add_option("--rows", rows, "mesh rows U");
        o_cols = app->add_option("--cols", cols, "mesh columns V");
        o_lr = app->add_option("--lr", lr, "optimizer learning rate (px)");
        o_iters = app->add_option("--max-iters", max_iters, "optimizer iteration cap");
        o_s = app->add_option("--scale-s", scale_s, "override the object scale s");
        o_seed = app->add_option("--seed", seed, "optimizer seed");
        o_enlarge = app->add_option("--enlarge-mode", enlarge_mode, "invert or direct")
                        ->check(CLI::IsMember({"invert", "direct"}));
        o_mapping = app->add_option("--box-mapping", box_mapping, "exact, hull8 or corners")
                        ->check(CLI::IsMember({"exact", "hull8", "corners"}));
    }

    JobConfig resolve() const {
        JobConfig c = config.empty() ? JobConfig{} : io::load_config(config);
        if (o_rows->count()) c.rows = rows;
        if (o_cols->count()) c.cols = cols;
        if (o_lr->count()) c.optim.learning_rate = lr;
        if (o_iters->count()) c.optim.max_iters = max_iters;
        if (o_s->count()) c.scale_s = scale_s;
        if (o_seed->count()) c.optim.seed = seed;
        if (o_enlarge->count()) c.enlarge_mode = enlarge_mode == "direct" ? EnlargeMode::Direct : EnlargeMode::Invert;
        if (o_mapping->count()) {
            c.box_mapping = box_mapping == "hull8"     ? BoxMapping::Hull8
                            : box_mapping == "corners" ? BoxMapping::Corners
                                                       : BoxMapping::Exact;
        }
        validate(c);
        return c;
    }
};

json loss_json(const LossReport& r) {
    return {{"total", r.total}, {"object", r.object}, {"geometric", r.geometric}, {"boundary", r.boundary}};
}

struct RetargetArgs {
    std::string input;
    std::string boxes;
    std::optional<double> scale;
    std::optional<int> width;
    std::optional<int> height;
    std::string axis = "width";
    std::string out;
    std::string dump_mesh;
    std::string loss_trace;
    std::string viz;
    ConfigFlags flags;
};

int cmd_retarget(const RetargetArgs& a, bool as_json, std::ostream& out) {
    const JobConfig cfg = a.flags.resolve();
    if (!a.scale && !a.width && !a.height) throw InvalidArgument("give --scale, --width or --height");
    const Image img = io::load_image(a.input);
    std::vector<ObjectBox> boxes;
    fs::path box_path = a.boxes;
    if (box_path.empty() && fs::exists(sibling_boxes(a.input))) box_path = sibling_boxes(a.input);
    if (!box_path.empty()) {
        boxes = io::load_boxes(box_path, std::pair{img.width(), img.height()}).boxes;
    } else {
        spdlog::warn("no box file given; the result is a plain rescale");
    }
    const auto [w, h] = target_size(img.width(), img.height(), a.scale, a.width, a.height,
                                    a.axis == "height" ? Axis::Height : Axis::Width);
    spdlog::info("{}: {}x{} -> {}x{}, {} object(s)", a.input, img.width(), img.height(), w, h, boxes.size());

    MeshSolution sol = solve(img, boxes, w, h, cfg, thread_count());
    const OptimResult optim = sol.optim;
    const bool enlarged = sol.enlarged;
    const bool inverted = sol.inverted;
    const bool degenerate = sol.degenerate;
    const Mesh src = sol.src;
    const Mesh dst = sol.dst;
    if (!a.loss_trace.empty()) {
        std::string text;
        for (std::size_t i = 0; i < optim.trace.size(); ++i) {
            text += io::loss_trace_line(static_cast<int>(i), optim.trace[i]) + "\n";
        }
        io::write_text(a.loss_trace, text);
    }
    if (!a.dump_mesh.empty()) io::save_mesh(inverted ? src : dst, a.dump_mesh);
    const RetargetResult res = render(img, std::move(sol), w, h);
    io::save_png(res.image, a.out);
    const DistortionReport rep = measure_result(src, dst, boxes.empty() ? std::vector<ObjectBox>{{0, 0, 1, 1, ""}} : boxes,
                                                w, h, cfg.box_mapping);

    if (!a.viz.empty()) {
        const viz::Color mesh_col{0.1f, 0.9f, 0.2f};
        const viz::Color box_col{1.0f, 0.1f, 0.1f};
        std::vector<ObjectBox> mapped;
        for (const auto& b : boxes) {
            if (auto m = clip_or_vanish(map_box(src, dst, b, cfg.box_mapping), w, h)) mapped.push_back(*m);
        }
        const Image left = viz::draw_boxes(viz::draw_mesh_overlay(img, src, mesh_col), boxes, box_col);
        const Image right = viz::draw_boxes(viz::draw_mesh_overlay(res.image, dst, mesh_col), mapped, box_col);
        const std::vector<Image> panels{left, right};
        io::save_png(viz::compose_panel(panels), a.viz);
    }

    if (as_json) {
        json j = {{"output", a.out},
                  {"width", w},
                  {"height", h},
                  {"mode", enlarged ? "enlarge" : "reduce"},
                  {"inverted", inverted},
                  {"degenerate", degenerate},
                  {"iterations", optim.iterations},
                  {"restarted", optim.restarted},
                  {"folded", optim.folded},
                  {"uncovered", res.uncovered},
                  {"loss", loss_json(optim.loss)}};
        j["mean_error"] = boxes.empty() ? json(nullptr) : json(rep.mean_error);
        out << j.dump() << "\n";
    } else {
        out << "wrote " << a.out << " (" << w << "x" << h << ", " << (enlarged ? "enlarge" : "reduce") << ", "
            << optim.iterations << " iterations";
        if (!boxes.empty()) out << ", distortion " << io::format_double(rep.mean_error);
        out << ")\n";
    }
    return kOk;
}

struct EvaluateArgs {
    std::string input_boxes;
    std::string mesh;
    std::string out_size;
    std::string in_size;
    bool inverse = false;
    std::string mapping = "exact";
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const Mesh mesh = io::load_mesh(a.mesh);
    const json raw = json::parse(io::read_text(a.input_boxes), nullptr, false);
    std::pair<int, int> in;
    if (!a.in_size.empty()) {
        in = parse_size(a.in_size);
    } else if (raw.is_object() && raw.contains("width") && raw.contains("height")) {
        in = {raw.at("width").get<int>(), raw.at("height").get<int>()};
    } else if (a.inverse) {
        in = {static_cast<int>(std::lround(mesh.width())), static_cast<int>(std::lround(mesh.height()))};
    } else {
        throw InvalidArgument("input size unknown: pass --in-size or add width/height to the box file");
    }
    std::pair<int, int> outsz;
    if (!a.out_size.empty()) {
        outsz = parse_size(a.out_size);
    } else if (!a.inverse) {
        outsz = {static_cast<int>(std::lround(mesh.width())), static_cast<int>(std::lround(mesh.height()))};
    } else {
        throw InvalidArgument("--out-size is required with --inverse");
    }
    const auto boxes = io::load_boxes(a.input_boxes, in).boxes;
    if (boxes.empty()) throw DegenerateInput("no valid boxes to evaluate");
    const BoxMapping mode = a.mapping == "hull8" ? BoxMapping::Hull8
                            : a.mapping == "corners" ? BoxMapping::Corners
                                                     : BoxMapping::Exact;
    DistortionReport rep;
    if (a.inverse) {
        const Mesh dst = build_rigid_mesh(outsz.first, outsz.second, mesh.rows(), mesh.cols());
        rep = measure_result(mesh, dst, boxes, outsz.first, outsz.second, mode);
    } else {
        const Mesh src = build_rigid_mesh(in.first, in.second, mesh.rows(), mesh.cols());
        rep = measure_result(src, mesh, boxes, outsz.first, outsz.second, mode);
    }
    out << io::report_to_json(rep).dump(2) << "\n";
    return kOk;
}

struct BenchArgs {
    std::string dataset_dir;
    std::string scales = "0.5,0.75,1.25,1.5,1.75";
    std::string methods = "objectir,scl,cr";
    std::string out;
    std::string mesh_dir;
    int threads = 0;
    ConfigFlags flags;
};

int cmd_bench(const BenchArgs& a, bool as_json, std::ostream& out) {
    BenchOptions opts;
    opts.dataset_dir = a.dataset_dir;
    opts.scales = parse_scales(a.scales);
    opts.methods = split(a.methods);
    opts.config = a.flags.resolve();
    opts.threads = a.threads > 0 ? a.threads : thread_count();
    if (!a.mesh_dir.empty()) opts.mesh_dir = fs::path(a.mesh_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<BenchRow> rows = run_bench(opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("benchmarked {} row(s) in {:.1f} s", rows.size(), secs);
    const std::string csv = bench_csv(rows);
    if (!a.out.empty()) io::write_text(a.out, csv);
    if (as_json) {
        json summary = json::object();
        for (const auto& m : opts.methods) {
            json per = json::object();
            for (double k : opts.scales) {
                double sum = 0;
                int n = 0;
                for (const auto& r : rows) {
                    if (r.method == m && r.scale == k && r.report) {
                        sum += r.report->mean_error;
                        ++n;
                    }
                }
                per[io::format_double(k)] = n > 0 ? json(sum / n) : json("--");
            }
            summary[m] = per;
        }
        out << json{{"rows", rows.size()}, {"summary", summary}}.dump() << "\n";
    } else {
        if (a.out.empty()) out << csv;
        out << bench_summary(rows, opts.scales, opts.methods);
    }
    return kOk;
}

int cmd_gradcheck(std::uint64_t seed, int trials, bool corrupt, bool as_json, std::ostream& out) {
    const GradcheckReport r = gradient_check(seed, trials, corrupt);
    if (as_json) {
        out << json{{"max_rel_error", r.max_rel_error},
                    {"checked", r.checked},
                    {"skipped", r.skipped},
                    {"passed", r.passed}}
                   .dump()
            << "\n";
    } else {
        out << (r.passed ? "PASS" : "FAIL") << " gradient check: max rel err " << r.max_rel_error << " over "
            << r.checked << " components, " << r.skipped << " skipped near kinks\n";
    }
    return r.passed ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out) {
    CLI::App app{"Object-aware mesh retargeting"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    int verbose = 0;
    bool quiet = false;
    app.add_flag("--json", as_json, "machine-readable output on stdout");
    app.add_flag("-v,--verbose", verbose, "debug logging");
    app.add_flag("-q,--quiet", quiet, "warnings and errors only");

    RetargetArgs ra;
    auto* rt = app.add_subcommand("retarget", "retarget one image");
    rt->add_option("--input", ra.input, "input image")->required();
    rt->add_option("--boxes", ra.boxes, "object box JSON (default: <stem>.boxes.json)");
    auto* o_scale = rt->add_option("--scale", ra.scale, "resize factor along --axis");
    rt->add_option("--width", ra.width, "target width")->excludes(o_scale);
    rt->add_option("--height", ra.height, "target height");
    rt->add_option("--axis", ra.axis, "axis for --scale")->check(CLI::IsMember({"width", "height"}));
    rt->add_option("--out", ra.out, "output PNG")->required();
    rt->add_option("--dump-mesh", ra.dump_mesh, "write the deformed mesh JSON");
    rt->add_option("--loss-trace", ra.loss_trace, "write the loss trace as JSON lines");
    rt->add_option("--viz", ra.viz, "write an overlay panel PNG");
    ra.flags.add(rt);

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "distortion error of a saved mesh");
    ev->add_option("--input-boxes", ea.input_boxes, "input box JSON")->required();
    ev->add_option("--mesh", ea.mesh, "mesh JSON")->required();
    ev->add_option("--out-size", ea.out_size, "output size WxH (default: mesh size)");
    ev->add_option("--in-size", ea.in_size, "input size WxH (default: box file width/height)");
    ev->add_flag("--inverse", ea.inverse, "mesh lives on the input side (inverted enlargement)");
    ev->add_option("--box-mapping", ea.mapping, "exact, hull8 or corners")
        ->check(CLI::IsMember({"exact", "hull8", "corners"}));

    BenchArgs ba;
    auto* be = app.add_subcommand("bench", "benchmark a dataset directory");
    be->add_option("--dataset-dir", ba.dataset_dir, "images with sibling <stem>.boxes.json")->required();
    be->add_option("--scales", ba.scales, "comma-separated width factors")->capture_default_str();
    be->add_option("--methods", ba.methods, "comma-separated: objectir,scl,cr")->capture_default_str();
    be->add_option("--out", ba.out, "CSV output path");
    be->add_option("--mesh-dir", ba.mesh_dir, "dump objectir meshes here");
    be->add_option("--threads", ba.threads, "worker count (default: RETARGET_THREADS or cores)");
    ba.flags.add(be);

    std::uint64_t gc_seed = 0;
    int gc_trials = 20;
    bool gc_corrupt = false;
    auto* gc = app.add_subcommand("gradcheck", "check analytic gradients against finite differences");
    gc->add_option("--seed", gc_seed, "random seed")->capture_default_str();
    gc->add_option("--trials", gc_trials, "random motion fields")->capture_default_str();
    gc->add_flag("--corrupt", gc_corrupt, "perturb the analytic gradient (negative control)");

    std::string sy_dir;
    int sy_count = 10;
    std::uint64_t sy_seed = 0;
    int sy_size = 224;
    auto* sy = app.add_subcommand("synth", "write the synthetic fixture suite");
    sy->add_option("--out-dir", sy_dir, "output directory")->required();
    sy->add_option("--count", sy_count, "number of fixtures")->capture_default_str();
    sy->add_option("--seed", sy_seed, "random seed")->capture_default_str();
    sy->add_option("--size", sy_size, "image side in pixels")->capture_default_str();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, std::cerr) == 0 ? kOk : kBadArgs;
    }
    setup_logging(verbose, quiet);

    try {
        if (rt->parsed()) return cmd_retarget(ra, as_json, out);
        if (ev->parsed()) return cmd_evaluate(ea, out);
        if (be->parsed()) return cmd_bench(ba, as_json, out);
        if (gc->parsed()) return cmd_gradcheck(gc_seed, gc_trials, gc_corrupt, as_json, out);
        if (sy->parsed()) {
            write_synth_dataset(sy_dir, sy_count, sy_seed, sy_size);
            if (as_json) out << json{{"written", sy_count}, {"dir", sy_dir}}.dump() << "\n";
            return kOk;
        }
    } catch (const FoldOverError& e) {
        spdlog::error("{}", e.what());
        return kFoldOver;
    } catch (const OptimizerError& e) {
        spdlog::error("{} (after {} evaluation(s))", e.what(), e.trace().size());
        return kOptimizerError;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kIoError;
    } catch (const ParseError& e) {
        spdlog::error("{}", e.what());
        return kIoError;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kBadArgs;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kIoError;
    }
    return kBadArgs;
}

}  // namespace objir::cli
