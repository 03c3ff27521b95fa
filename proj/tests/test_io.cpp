#include <filesystem>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "objir/errors.hpp"
#include "objir/io.hpp"

using namespace objir;
namespace fs = std::filesystem;
using io::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("objir_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string parse_error_of(const json& j) {
    try {
        io::config_from_json(j);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double v = d(rng) / 7.0;
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK(io::format_double(3.0) == "3");
}

TEST_CASE("box file parsing") {
    const json two = json::parse(R"({"image":"a.png","boxes":[
        {"id":"cat","x0":10,"y0":20,"x1":50,"y1":60,"score":0.9,"label":"cat"},
        {"x0":1,"y0":2,"x1":3,"y1":4}]})");
    const io::BoxFile bf = io::parse_boxes(two);
    CHECK(bf.image == "a.png");
    REQUIRE(bf.boxes.size() == 2);
    CHECK(bf.boxes[0] == ObjectBox{10, 20, 50, 60, "cat"});
    CHECK(bf.boxes[1].id == "1");
    CHECK(bf.warnings.empty());

    const json bad = json::parse(R"({"boxes":[
        {"id":"a","x0":10,"y0":0,"x1":5,"y1":8},
        {"id":"b","x0":0,"y0":0,"x1":5,"y1":8}]})");
    const io::BoxFile r = io::parse_boxes(bad);
    REQUIRE(r.boxes.size() == 1);
    CHECK(r.boxes[0].id == "b");
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("boxes[0]") != std::string::npos);

    // 60% of a 100x100 image: kept, warned about the training filter.
    const json big = json::parse(R"({"boxes":[{"id":"big","x0":0,"y0":0,"x1":60,"y1":100}]})");
    const io::BoxFile g = io::parse_boxes(big, std::pair{100, 100});
    CHECK(g.boxes.size() == 1);
    REQUIRE(g.warnings.size() == 1);
    CHECK(g.warnings[0].find("half of the image") != std::string::npos);

    const io::BoxFile clipped = io::parse_boxes(
        json::parse(R"({"boxes":[{"id":"c","x0":-5,"y0":10,"x1":20,"y1":20}]})"), std::pair{100, 100});
    CHECK(clipped.boxes[0] == ObjectBox{0, 10, 20, 20, "c"});
    CHECK(clipped.warnings.size() == 1);

    CHECK(io::parse_boxes(json::parse(R"({"boxes":[]})")).boxes.empty());
}

TEST_CASE("box parse errors carry field paths") {
    auto err = [](const char* text) {
        try {
            io::parse_boxes(json::parse(text));
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(err(R"({"boxes":[{"x0":1,"y0":1,"x1":2}]})").find("boxes[0].y1") != std::string::npos);
    CHECK(err(R"({"boxes":[{"x0":"a","y0":1,"x1":2,"y1":3}]})").find("boxes[0].x0") != std::string::npos);
    CHECK(err(R"({"boxes":[{"x0":1,"y0":1,"x1":2,"y1":3,"color":1}]})").find("boxes[0].color") != std::string::npos);
    CHECK(err(R"({"image":"x"})").find("boxes") != std::string::npos);

    TempDir tmp;
    io::write_text(tmp / "broken.json", "{\"boxes\": [ {\"x0\": 1,\n ]}");
    try {
        io::load_boxes(tmp / "broken.json");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    CHECK_THROWS_AS(io::load_boxes(tmp / "missing.json"), IoError);
}

TEST_CASE("box file round trip is byte-identical") {
    TempDir tmp;
    const std::vector<ObjectBox> boxes{{0.1, 2.0 / 3, 50.25, 60, "x"}, {1e-3, 5, 7.7, 9.125, "y"}};
    io::save_boxes(tmp / "a.json", "img.png", boxes);
    const io::BoxFile bf = io::load_boxes(tmp / "a.json");
    CHECK(bf.boxes == boxes);
    io::save_boxes(tmp / "b.json", bf.image, bf.boxes);
    CHECK(io::read_text(tmp / "a.json") == io::read_text(tmp / "b.json"));
}

TEST_CASE("default config reproduces the paper settings") {
    const JobConfig c = io::config_from_json(json::object());
    CHECK(c.rows == 8);
    CHECK(c.cols == 8);
    CHECK(c.weights.object == 1.0);
    CHECK(c.weights.geometric == 0.1);
    CHECK(c.weights.boundary == 0.01);
    CHECK(c.working_resolution == 224);
    CHECK(c == JobConfig{});

    // Missing optional fields fall back to defaults.
    const JobConfig partial = io::config_from_json(json::parse(R"({"weights":{"geometric":0.5}})"));
    CHECK(partial.weights.geometric == 0.5);
    CHECK(partial.weights.boundary == 0.01);
    CHECK(partial.optim == OptimConfig{});
}

TEST_CASE("config round trip and errors") {
    TempDir tmp;
    JobConfig c;
    c.rows = 6;
    c.scale_s = 0.61;
    c.box_mapping = BoxMapping::Hull8;
    c.enlarge_mode = EnlargeMode::Direct;
    c.optim.learning_rate = 0.123456789;
    c.optim.seed = 42;
    io::save_config(c, tmp / "c1.json");
    const JobConfig back = io::load_config(tmp / "c1.json");
    CHECK(back == c);
    io::save_config(back, tmp / "c2.json");
    CHECK(io::read_text(tmp / "c1.json") == io::read_text(tmp / "c2.json"));

    CHECK(parse_error_of(json::parse(R"({"optimizer":{"learning_rate":"fast"}})")).find("optimizer.learning_rate") != std::string::npos);
    CHECK(parse_error_of(json::parse(R"({"mesh":{"rows":2.5}})")).find("mesh.rows") != std::string::npos);
    CHECK(parse_error_of(json::parse(R"({"box_mapping":"round"})")).find("box_mapping") != std::string::npos);
    CHECK(parse_error_of(json::parse(R"({"weights":{"size":1}})")).find("weights.size") != std::string::npos);
    CHECK(!parse_error_of(json::parse(R"({"optimizer":{"learning_rate":-1}})")).empty());
}

TEST_CASE("mesh round trip keeps full precision") {
    TempDir tmp;
    std::mt19937_64 rng(2);
    const Mesh m = testutil::random_mesh(224.0 / 3, 149, 8, 8, 0.3, rng);
    io::save_mesh(m, tmp / "m1.json");
    const Mesh back = io::load_mesh(tmp / "m1.json");
    CHECK(back == m);
    io::save_mesh(back, tmp / "m2.json");
    CHECK(io::read_text(tmp / "m1.json") == io::read_text(tmp / "m2.json"));

    json j = io::mesh_to_json(m);
    j["vertices"].erase(j["vertices"].begin());
    CHECK_THROWS_AS(io::mesh_from_json(j), ParseError);
}

TEST_CASE("report round trip") {
    TempDir tmp;
    DistortionReport r;
    r.per_object = {{"a", 2.0, 1.0 / 3, 5.0 / 6, false}, {"b", 0.7, 0.0, 1.0, true}};
    r.mean_error = (5.0 / 6 + 1.0) / 2;
    r.vanished_count = 1;
    io::save_report(r, tmp / "r1.json");
    const DistortionReport back = io::load_report(tmp / "r1.json");
    CHECK(back.mean_error == r.mean_error);
    CHECK(back.vanished_count == 1);
    REQUIRE(back.per_object.size() == 2);
    CHECK(back.per_object[0].output_aspect == r.per_object[0].output_aspect);
    CHECK(back.per_object[1].vanished);
    io::save_report(back, tmp / "r2.json");
    CHECK(io::read_text(tmp / "r1.json") == io::read_text(tmp / "r2.json"));
}

TEST_CASE("PNG save and load is lossless at 8 bits") {
    TempDir tmp;
    std::mt19937_64 rng(3);
    Image img(37, 23, 3);
    std::uniform_int_distribution<int> d(0, 255);
    for (float& v : img.data()) v = d(rng) / 255.0f;
    io::save_png(img, tmp / "a.png");
    const Image back = io::load_image(tmp / "a.png");
    REQUIRE(back.width() == 37);
    REQUIRE(back.height() == 23);
    REQUIRE(back.channels() == 3);
    CHECK(max_abs_diff(back, img) <= 1e-6);
    io::save_png(back, tmp / "b.png");
    CHECK(io::read_text(tmp / "a.png") == io::read_text(tmp / "b.png"));

    Image gray(5, 4, 1, 0.2f);
    io::save_png(gray, tmp / "g.png");
    CHECK(io::load_image(tmp / "g.png").channels() == 1);
    CHECK_THROWS_AS(io::load_image(tmp / "none.png"), IoError);
    io::write_text(tmp / "junk.png", "not an image");
    CHECK_THROWS_AS(io::load_image(tmp / "junk.png"), IoError);
}

TEST_CASE("csv and trace line formats") {
    DistortionReport r;
    r.mean_error = 0.25;
    r.vanished_count = 2;
    CHECK(io::csv_header() == "image,method,scale,mean_error,vanished_count");
    CHECK(io::csv_row("a.png", "scl", 0.5, r) == "a.png,scl,0.5,0.25,2");
    LossReport l;
    l.total = 1.5;
    l.object = 1;
    l.geometric = 4;
    l.boundary = 0.5;
    const json t = json::parse(io::loss_trace_line(3, l));
    CHECK(t["iter"] == 3);
    CHECK(t["total"] == 1.5);
    CHECK(t["boundary"] == 0.5);
}
