#include "objir/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace objir::synth {

namespace {

// mt19937_64 output is fully specified by the standard; the distributions
// are not, so map raw draws to [0, 1) by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

private:
    std::mt19937_64 gen_;
};

constexpr std::array<std::array<float, 3>, 6> kColors = {{
    {0.90f, 0.15f, 0.10f},
    {0.10f, 0.30f, 0.85f},
    {0.95f, 0.85f, 0.10f},
    {0.10f, 0.70f, 0.20f},
    {0.80f, 0.10f, 0.80f},
    {0.05f, 0.05f, 0.05f},
}};

void fill_rect(Image& img, const ObjectBox& b, const std::array<float, 3>& color) {
    for (int y = static_cast<int>(b.y0); y < static_cast<int>(b.y1); ++y) {
        for (int x = static_cast<int>(b.x0); x < static_cast<int>(b.x1); ++x) {
            for (int c = 0; c < img.channels(); ++c) img.at(x, y, c) = color[static_cast<std::size_t>(c)];
        }
    }
}

}  // namespace

Image textured_background(int width, int height, std::uint64_t seed) {
    Rng rng(seed * 7919 + 17);
    Image img(width, height, 3);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int c = 0; c < 3; ++c) {
        const double fx = rng.uniform(6.0, 14.0);
        const double fy = rng.uniform(6.0, 14.0);
        const double ph = rng.uniform(0.0, two_pi);
        const double base = rng.uniform(0.4, 0.6);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double wave = 0.15 * std::sin(two_pi * x / fx + ph) * std::cos(two_pi * y / fy - ph);
                const double noise = 0.1 * (rng.uniform() - 0.5);
                img.at(x, y, c) = static_cast<float>(base + wave + noise);
            }
        }
    }
    return img;
}

Fixture make_fixture(int index, std::uint64_t seed, int size) {
    Rng rng(seed * 1000003 + static_cast<std::uint64_t>(index) * 7717 + 1);
    Fixture f;
    f.name = (index < 10 ? "fixture_0" : "fixture_") + std::to_string(index);
    f.image = textured_background(size, size, seed * 131 + static_cast<std::uint64_t>(index));
    const double k = size / 224.0;

    // Object edges sit on the lines of the default 8x8 mesh, pushed outward by
    // 0-3 px, so that in-object mesh edges cover almost the whole object.
    const double cell = size / 8.0;
    auto box = [&](int c0, int r0, int wc, int hc, std::string id) {
        return ObjectBox{std::floor(c0 * cell - k * rng.integer(0, 3)),
                         std::floor(r0 * cell - k * rng.integer(0, 3)),
                         std::ceil((c0 + wc) * cell + k * rng.integer(0, 3)),
                         std::ceil((r0 + hc) * cell + k * rng.integer(0, 3)), std::move(id)};
    };
    if (index % 2 == 0) {
        const int wc = rng.integer(4, 5);
        const int hc = rng.integer(2, 4);
        const int c0 = rng.integer(1, 7 - wc);
        const int r0 = rng.integer(1, 7 - hc);
        f.boxes.push_back(box(c0, r0, wc, hc, "obj0"));
    } else {
        const int w1 = rng.integer(2, 3);
        const int w2 = rng.integer(2, 5 - w1);
        const int c0 = rng.integer(1, 6 - (w1 + w2));
        const int h1 = rng.integer(2, 4);
        const int h2 = rng.integer(2, 4);
        f.boxes.push_back(box(c0, rng.integer(1, 7 - h1), w1, h1, "obj0"));
        f.boxes.push_back(box(c0 + w1 + 1, rng.integer(1, 7 - h2), w2, h2, "obj1"));
    }
    for (std::size_t i = 0; i < f.boxes.size(); ++i) {
        fill_rect(f.image, f.boxes[i], kColors[(static_cast<std::size_t>(index) + 2 * i) % kColors.size()]);
    }
    return f;
}

std::vector<Fixture> fixture_suite(int count, std::uint64_t seed, int size) {
    std::vector<Fixture> out;
    for (int i = 0; i < count; ++i) out.push_back(make_fixture(i, seed, size));
    return out;
}

Fixture smooth_fixture(int size) {
    Fixture f;
    f.name = "smooth";
    f.image = Image(size, size, 3);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double u = double(x) / size;
            const double v = double(y) / size;
            f.image.at(x, y, 0) = static_cast<float>(0.5 + 0.3 * std::sin(two_pi * (1.5 * u + 0.5 * v)));
            f.image.at(x, y, 1) = static_cast<float>(0.5 + 0.3 * std::cos(two_pi * (0.7 * u - 1.2 * v)));
            f.image.at(x, y, 2) = static_cast<float>(0.5 + 0.2 * std::sin(two_pi * (u * v + 0.25)));
        }
    }
    const double k = size / 224.0;
    f.boxes.push_back({60 * k, 50 * k, 170 * k, 160 * k, "smooth"});
    return f;
}

}  // namespace objir::synth
