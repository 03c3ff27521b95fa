#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "objir/io.hpp"
#include "objir/parallel.hpp"
#include "objir/synth.hpp"

using namespace objir;
namespace fs = std::filesystem;
using io::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("objir_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "objir");
    args.push_back("-q");
    std::ostringstream os;
    const int code = cli::run(args, os);
    return {code, os.str()};
}

}  // namespace

TEST_CASE("target size conventions") {
    CHECK(cli::target_size(224, 224, 0.5, {}, {}) == std::pair{112, 224});
    CHECK(cli::target_size(1024, 683, 0.75, {}, {}) == std::pair{768, 683});
    CHECK(cli::target_size(100, 50, 0.5, {}, {}, cli::Axis::Height) == std::pair{100, 25});
    CHECK(cli::target_size(100, 50, {}, 80, {}) == std::pair{80, 50});
    CHECK(cli::target_size(100, 50, {}, {}, 70) == std::pair{100, 70});
    CHECK_THROWS_AS(cli::target_size(100, 50, -1.0, {}, {}), InvalidArgument);
    CHECK(cli::sibling_boxes("/a/b/img.png") == fs::path("/a/b/img.boxes.json"));
}

TEST_CASE("exit codes") {
    TempDir tmp;
    CHECK(run({}).code == cli::kBadArgs);
    CHECK(run({"retarget", "--bogus"}).code == cli::kBadArgs);
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"retarget", "--input", tmp / "none.png", "--scale", "0.5", "--out", tmp / "o.png"}).code ==
          cli::kIoError);

    cli::write_synth_dataset(tmp.path, 1, 0, 64);
    const std::string img = tmp / "fixture_00.png";
    CHECK(run({"retarget", "--input", img, "--scale", "-2", "--out", tmp / "o.png"}).code == cli::kBadArgs);
    CHECK(run({"retarget", "--input", img, "--out", tmp / "o.png"}).code == cli::kBadArgs);
    io::write_text(tmp / "bad.json", "{\"optimizer\": {\"decay\": 7}}");
    CHECK(run({"retarget", "--input", img, "--scale", "0.5", "--out", tmp / "o.png", "--config", tmp / "bad.json"})
              .code == cli::kIoError);
}

TEST_CASE("retarget writes its outputs") {
    TempDir tmp;
    cli::write_synth_dataset(tmp.path, 1, 0, 224);
    const std::string img = tmp / "fixture_00.png";

    const Run same = run({"retarget", "--input", img, "--scale", "1.0", "--out", tmp / "same.png", "--json"});
    REQUIRE(same.code == 0);
    const json js = json::parse(same.out);
    CHECK(js["width"] == 224);
    CHECK(mean_abs_diff(io::load_image(tmp / "same.png"), io::load_image(img)) < 1e-3);

    const Run half = run({"retarget", "--input", img, "--scale", "0.5", "--out", tmp / "half.png", "--dump-mesh",
                          tmp / "m.json", "--loss-trace", tmp / "t.jsonl", "--viz", tmp / "v.png", "--json",
                          "--max-iters", "40"});
    REQUIRE(half.code == 0);
    const json jh = json::parse(half.out);
    CHECK(jh["mode"] == "reduce");
    CHECK(jh["mean_error"].get<double>() < 0.5);
    const Image out = io::load_image(tmp / "half.png");
    CHECK(out.width() == 112);
    CHECK(out.height() == 224);
    CHECK(io::load_mesh(tmp / "m.json").width() == 112);
    std::istringstream trace(io::read_text(tmp / "t.jsonl"));
    int lines = 0;
    for (std::string line; std::getline(trace, line); ++lines) CHECK(json::parse(line).contains("total"));
    CHECK(lines == jh["iterations"].get<int>());
    CHECK(io::load_image(tmp / "v.png").width() == 224 + 112 + 4);

    // The mesh on disk reproduces the reported distortion.
    const Run ev = run({"evaluate", "--input-boxes", tmp / "fixture_00.boxes.json", "--mesh", tmp / "m.json"});
    REQUIRE(ev.code == 0);
    CHECK(json::parse(ev.out)["mean_error"].get<double>() == jh["mean_error"].get<double>());

    const Run up = run({"retarget", "--input", img, "--scale", "1.25", "--out", tmp / "up.png", "--json",
                        "--max-iters", "30", "--dump-mesh", tmp / "mu.json"});
    REQUIRE(up.code == 0);
    const json ju = json::parse(up.out);
    CHECK(ju["mode"] == "enlarge");
    CHECK(ju["width"] == 280);
    const Run evu = run({"evaluate", "--input-boxes", tmp / "fixture_00.boxes.json", "--mesh", tmp / "mu.json",
                         "--inverse", "--out-size", "280x224"});
    REQUIRE(evu.code == 0);
    CHECK(json::parse(evu.out)["mean_error"].get<double>() == ju["mean_error"].get<double>());
}

TEST_CASE("explicit flags override the config file") {
    TempDir tmp;
    cli::write_synth_dataset(tmp.path, 1, 0, 96);
    JobConfig c;
    c.optim.max_iters = 200;
    c.optim.tolerance = 0;
    io::save_config(c, tmp / "c.json");
    const Run r = run({"retarget", "--input", tmp / "fixture_00.png", "--scale", "0.5", "--out", tmp / "o.png",
                       "--config", tmp / "c.json", "--max-iters", "2", "--json"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["iterations"].get<int>() <= 3);
}

TEST_CASE("evaluate on rigid meshes") {
    TempDir tmp;
    io::write_text(tmp / "b.json", R"({"boxes":[{"id":"a","x0":20,"y0":30,"x1":90,"y1":80}],"width":224,"height":224})");
    io::save_mesh(build_rigid_mesh(224, 224, 8, 8), tmp / "id.json");
    io::save_mesh(build_rigid_mesh(112, 224, 8, 8), tmp / "half.json");
    const Run id = run({"evaluate", "--input-boxes", tmp / "b.json", "--mesh", tmp / "id.json"});
    REQUIRE(id.code == 0);
    CHECK(json::parse(id.out)["mean_error"].get<double>() == 0.0);
    const Run half = run({"evaluate", "--input-boxes", tmp / "b.json", "--mesh", tmp / "half.json", "--in-size", "224x224"});
    REQUIRE(half.code == 0);
    CHECK(json::parse(half.out)["mean_error"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(run({"evaluate", "--input-boxes", tmp / "b.json", "--mesh", tmp / "id.json", "--in-size", "abc"}).code ==
          cli::kBadArgs);
}

TEST_CASE("bench rows, summary and determinism") {
    TempDir tmp;
    const fs::path ds = tmp.path / "ds";
    cli::write_synth_dataset(ds, 2, 0, 128);
    io::save_png(Image(16, 16, 3, 0.5f), ds / "stray.png");  // no box file: skipped

    JobConfig cfg;
    cfg.optim.max_iters = 30;
    io::save_config(cfg, tmp / "c.json");
    const std::vector<std::string> args{"bench", "--dataset-dir", ds.string(), "--scales", "0.5,1.25",
                                        "--config", tmp / "c.json", "--mesh-dir", tmp / "meshes"};
    auto a1 = args;
    a1.insert(a1.end(), {"--out", tmp / "r1.csv", "--threads", "1"});
    auto a2 = args;
    a2.insert(a2.end(), {"--out", tmp / "r2.csv", "--threads", "2"});
    const Run r1 = run(a1);
    REQUIRE(r1.code == 0);
    REQUIRE(run(a2).code == 0);
    const std::string csv = io::read_text(tmp / "r1.csv");
    CHECK(csv == io::read_text(tmp / "r2.csv"));

    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "image,method,scale,mean_error,vanished_count");
    int rows = 0;
    std::map<std::string, double> objectir_05;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(line.find("stray") == std::string::npos);
        if (line.find(",scl,0.5,") != std::string::npos) CHECK(line.find(",scl,0.5,0.5,0") != std::string::npos);
        if (line.find(",cr,1.25,") != std::string::npos) CHECK(line.substr(line.size() - 6) == ",--,--");
        if (line.find(",objectir,0.5,") != std::string::npos) {
            const auto pos = line.find(",objectir,0.5,") + 14;
            objectir_05[line.substr(0, line.find(','))] = std::stod(line.substr(pos, line.find(',', pos) - pos));
        }
    }
    CHECK(rows == 2 * 3 * 2);

    // Summary: methods in order, scales as columns, CR enlargement as "--".
    CHECK(r1.out.find("method") == 0);
    CHECK(r1.out.find("objectir") < r1.out.find("scl"));
    CHECK(r1.out.find("scl") < r1.out.find("cr "));
    CHECK(r1.out.find("--") != std::string::npos);

    // Saved meshes reproduce the CSV values through evaluate.
    REQUIRE(objectir_05.size() == 2);
    for (const auto& [image, err] : objectir_05) {
        const std::string stem = image.substr(0, image.size() - 4);
        const Run ev = run({"evaluate", "--input-boxes", (ds / (stem + ".boxes.json")).string(), "--mesh",
                            tmp / ("meshes/" + cli::bench_mesh_name(stem, 0.5))});
        REQUIRE(ev.code == 0);
        CHECK(std::abs(json::parse(ev.out)["mean_error"].get<double>() - err) <= 1e-9);
    }

    CHECK(run({"bench", "--dataset-dir", tmp / "missing"}).code == cli::kIoError);
    CHECK(run({"bench", "--dataset-dir", ds.string(), "--methods", "seam"}).code == cli::kBadArgs);
}

TEST_CASE("bench summary formatting") {
    DistortionReport half;
    half.mean_error = 0.5;
    const std::vector<cli::BenchRow> rows{{"a.png", "scl", 0.5, half}, {"a.png", "cr", 1.5, std::nullopt}};
    const std::string s = cli::bench_summary(rows, {0.5, 1.5}, {"scl", "cr"});
    CHECK(s == "method          0.5      1.5\n"
               "scl          0.5000       --\n"
               "cr               --       --\n");
    CHECK(cli::bench_csv(rows) == "image,method,scale,mean_error,vanished_count\na.png,scl,0.5,0.5,0\na.png,cr,1.5,--,--\n");
}

TEST_CASE("gradcheck command") {
    const Run ok = run({"gradcheck", "--json"});
    CHECK(ok.code == 0);
    const json j = json::parse(ok.out);
    CHECK(j["passed"] == true);
    CHECK(j["max_rel_error"].get<double>() <= 1e-4);
    CHECK(run({"gradcheck", "--trials", "100", "--seed", "3"}).code == 0);
    CHECK(run({"gradcheck", "--corrupt"}).code == cli::kCheckFailed);
}

TEST_CASE("RETARGET_THREADS caps the worker count") {
    ::setenv("RETARGET_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    ::setenv("RETARGET_THREADS", "0", 1);
    CHECK(thread_count() >= 1);
    ::unsetenv("RETARGET_THREADS");
}

TEST_CASE("synth writes loadable fixtures") {
    TempDir tmp;
    const Run r = run({"synth", "--out-dir", tmp / "s", "--count", "2", "--size", "64", "--json"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["written"] == 2);
    const auto bf = io::load_boxes(tmp / "s/fixture_01.boxes.json");
    CHECK(bf.boxes == synth::make_fixture(1, 0, 64).boxes);
    CHECK(io::load_image(tmp / "s/fixture_01.png").width() == 64);
}

TEST_CASE("objectir is no worse than scaling at every bench scale") {
    TempDir tmp;
    cli::write_synth_dataset(tmp.path, 2, 0, 224);
    cli::BenchOptions opts;
    opts.dataset_dir = tmp.path;
    opts.methods = {"objectir", "scl"};
    const auto rows = cli::run_bench(opts);
    REQUIRE(rows.size() == 2 * 2 * 5);
    for (double k : opts.scales) {
        double ours = 0, scl = 0;
        for (const auto& r : rows) {
            if (r.scale != k) continue;
            (r.method == "scl" ? scl : ours) += r.report->mean_error;
        }
        CAPTURE(k);
        CHECK(ours <= scl);
    }
}
