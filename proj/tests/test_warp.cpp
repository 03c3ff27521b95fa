#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "objir/retarget.hpp"
#include "objir/synth.hpp"
#include "objir/warp.hpp"

using namespace objir;

TEST_CASE("sample_bilinear conventions") {
    Image img(4, 3, 1);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 4; ++x) img.at(x, y) = 0.1f * x + 0.25f * y;
    }
    CHECK(sample_bilinear(img, {2.5, 1.5})[0] == img.at(2, 1));
    CHECK(sample_bilinear(img, {2.0, 1.5})[0] == doctest::Approx((img.at(1, 1) + img.at(2, 1)) / 2));
    CHECK(sample_bilinear(img, {-5, -5})[0] == img.at(0, 0));
    CHECK(sample_bilinear(img, {50, 50})[0] == img.at(3, 2));

    std::mt19937_64 rng(1);
    const Image rgb = testutil::random_image(17, 11, 3, rng);
    std::uniform_real_distribution<double> dx(-2, 19), dy(-2, 13);
    for (int k = 0; k < 500; ++k) {
        const double x = dx(rng), y = dy(rng);
        const auto s = sample_bilinear(rgb, {x, y});
        for (int c = 0; c < 3; ++c) CHECK(std::abs(s[c] - testutil::ref_sample(rgb, x, y, c)) <= 1e-6);
    }
}

TEST_CASE("pixel rects of boxes") {
    CHECK(pixel_rect_of({0, 0, 10, 8, ""}) == PixelRect{0, 0, 10, 8});
    CHECK(pixel_rect_of({0.6, 0.4, 3.4, 2.6, ""}) == PixelRect{1, 0, 2, 3});
    CHECK(intersect({0, 0, 5, 5}, {3, 3, 5, 5}) == PixelRect{3, 3, 2, 2});
    CHECK(intersect({0, 0, 2, 2}, {3, 3, 5, 5}).empty());
}

TEST_CASE("identity warp reproduces the input") {
    std::mt19937_64 rng(2);
    const Image img = testutil::random_image(224, 160, 3, rng);
    const Mesh m = build_rigid_mesh(224, 160, 8, 8);
    const WarpResult w = retarget_warp(img, m, m, 224, 160);
    CHECK(w.uncovered == 0);
    CHECK(max_abs_diff(w.image, img) <= 1e-6);

    // Deformed path on an exact rigid copy that is not flagged rigid.
    VertexGrid g = m.grid();
    const Mesh same(224, 160, g);
    const WarpResult w2 = warp_image(img, m, same, 224, 160);
    CHECK(max_abs_diff(w2.image, img) <= 1e-6);
}

TEST_CASE("rigid k-scale warp equals bilinear rescale") {
    std::mt19937_64 rng(3);
    const Image img = testutil::random_image(224, 224, 3, rng);
    const Mesh in = build_rigid_mesh(224, 224, 8, 8);
    for (double k : {0.5, 0.75, 1.25}) {
        const int w = static_cast<int>(std::lround(224 * k));
        const WarpResult r = retarget_warp(img, in, build_rigid_mesh(w, 224, 8, 8), w, 224);
        CHECK(r.uncovered == 0);
        double worst = 0;
        for (int y = 0; y < 224; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const float ref = testutil::ref_sample(img, (x + 0.5) * 224.0 / w, y + 0.5, c);
                    worst = std::max(worst, double(std::abs(r.image.at(x, y, c) - ref)));
                }
            }
        }
        CHECK(worst <= 1e-6);
        CHECK(max_abs_diff(r.image, resize_bilinear(img, w, 224)) <= 1e-6);
    }
}

TEST_CASE("warp of a shifted vertex matches the bisection oracle") {
    const Image img = testutil::checkerboard(224, 224, 7);
    const Mesh in = build_rigid_mesh(224, 224, 8, 8);
    MotionField f(8, 8);
    f.at(4, 3).x = 7;
    const Mesh out = apply_motion(in, f);
    const WarpResult w = retarget_warp(img, in, out, 224, 224);
    CHECK(w.uncovered == 0);
    double worst = 0;
    for (int y = 84; y < 140; ++y) {
        for (int x = 56; x < 112; ++x) {
            const Vec2 q{x + 0.5, y + 0.5};
            const auto cc = testutil::bisect_locate(out, q);
            REQUIRE(cc.has_value());
            const Vec2 p = in.eval(cc->row, cc->col, cc->u, cc->v);
            worst = std::max(worst, double(std::abs(w.image.at(x, y) - testutil::ref_sample(img, p.x, p.y, 0))));
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("warp locality and range") {
    std::mt19937_64 rng(4);
    const Image img = testutil::random_image(224, 224, 3, rng);
    const Mesh in = build_rigid_mesh(224, 224, 8, 8);
    const Image base = retarget_warp(img, in, in, 224, 224).image;
    MotionField f(8, 8);
    f.at(5, 2) = {4.5, -3.25};
    const Image moved = retarget_warp(img, in, apply_motion(in, f), 224, 224).image;
    int changed_outside = 0;
    for (int y = 0; y < 224; ++y) {
        for (int x = 0; x < 224; ++x) {
            const bool incident = x >= 28 && x < 84 && y >= 112 && y < 168;
            for (int c = 0; c < 3; ++c) {
                const float v = moved.at(x, y, c);
                CHECK((v >= 0.0f && v <= 1.0f));
                if (!incident && v != base.at(x, y, c)) ++changed_outside;
            }
        }
    }
    CHECK(changed_outside == 0);
    CHECK(max_abs_diff(moved, base) > 0.0);
}

TEST_CASE("fold-over is refused with the offending cells") {
    const Image img(64, 64, 1, 0.5f);
    const Mesh in = build_rigid_mesh(64, 64, 4, 4);
    MotionField f(4, 4);
    f.at(2, 2).x = 20;
    try {
        retarget_warp(img, in, apply_motion(in, f), 64, 64);
        FAIL("expected FoldOverError");
    } catch (const FoldOverError& e) {
        CHECK(!e.cells().empty());
    }
}

TEST_CASE("uncovered pixels are black and counted") {
    const Image img(64, 64, 1, 0.5f);
    const Mesh in = build_rigid_mesh(64, 64, 4, 4);
    MotionField f(4, 4);
    for (int i = 0; i <= 4; ++i) f.at(i, 4).x = -8;  // right column pulled in
    const WarpResult w = retarget_warp(img, in, apply_motion(in, f), 64, 64);
    CHECK(w.uncovered == 8 * 64);
    CHECK(w.image.at(63, 10) == 0.0f);
    CHECK(w.image.at(10, 10) == 0.5f);
}

TEST_CASE("parallel warp is bit-identical to a single band") {
    std::mt19937_64 rng(5);
    const Image img = testutil::random_image(200, 150, 3, rng);
    const Mesh in = build_rigid_mesh(200, 150, 8, 8);
    const Mesh out = testutil::random_mesh(200, 150, 8, 8, 0.25, rng);
    const WarpResult a = warp_image(img, in, out, 200, 150);
    Image region;
    const std::size_t unc = warp_region(img, in, out, {0, 0, 200, 150}, region);
    CHECK(a.image == region);
    CHECK(a.uncovered == unc);
}

TEST_CASE("enlargement with zero motion is a plain upscale") {
    std::mt19937_64 rng(6);
    const Image img = testutil::random_image(160, 120, 3, rng);
    JobConfig cfg;
    MeshSolution sol = solve_enlarge(img, {}, 200, 120, cfg);
    CHECK(sol.inverted);
    CHECK(sol.degenerate);
    const RetargetResult r = render(img, sol, 200, 120);
    CHECK(max_abs_diff(r.image, resize_bilinear(img, 200, 120)) <= 1e-6);
}

TEST_CASE("enlarge then reduce with zero motion is close to identity") {
    const auto fx = synth::smooth_fixture(128);
    JobConfig cfg;
    const RetargetResult up = render(fx.image, solve_enlarge(fx.image, {}, 256, 128, cfg), 256, 128);
    const RetargetResult down = render(up.image, solve_reduce(up.image, {}, 128, 128, cfg), 128, 128);
    CHECK(mean_abs_diff(down.image, fx.image) < 0.02);
}

TEST_CASE("identity target keeps the image") {
    const auto fx = synth::make_fixture(0);
    const RetargetResult r = retarget(fx.image, fx.boxes, 224, 224, JobConfig{});
    CHECK(r.image.width() == 224);
    CHECK(mean_abs_diff(r.image, fx.image) < 1e-3);
    CHECK(r.mesh.optim.iterations <= 50);
}

TEST_CASE("empty boxes fall back to pure scaling") {
    const auto fx = synth::make_fixture(2);
    const RetargetResult r = retarget_reduce(fx.image, {}, 112, 224, JobConfig{});
    CHECK(r.mesh.degenerate);
    CHECK(max_abs_diff(r.image, resize_bilinear(fx.image, 112, 224)) <= 1e-6);
}

TEST_CASE("half-width reduction of a fixture beats simple scaling") {
    const auto fx = synth::make_fixture(0);
    const RetargetResult r = retarget_reduce(fx.image, fx.boxes, 112, 224, JobConfig{});
    CHECK(r.image.width() == 112);
    CHECK(r.image.height() == 224);
    CHECK(check_foldover(r.mesh.mesh_f).empty());
    CHECK(r.uncovered < 224);
}

TEST_CASE("non-square full-resolution input completes end to end") {
    const Image big = synth::textured_background(1024, 683, 9);
    const std::vector<ObjectBox> boxes{{300, 200, 700, 500, "o"}};
    JobConfig cfg;
    cfg.optim.max_iters = 40;
    const RetargetResult r = retarget(big, boxes, 512, 683, cfg);
    CHECK(r.image.width() == 512);
    CHECK(r.image.height() == 683);
    CHECK(r.mesh.job.in_width == 224);
    CHECK(r.mesh.job.in_height == 149);
    CHECK(r.mesh.mesh_f.width() == 512);
}
