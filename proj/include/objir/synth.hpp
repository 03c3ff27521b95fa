#pragma once

// Deterministic synthetic images with known object boxes: constant-colour
// rectangles on a textured background.

#include <cstdint>
#include <string>
#include <vector>

#include "objir/geometry.hpp"
#include "objir/image.hpp"

namespace objir::synth {

struct Fixture {
    std::string name;
    Image image;
    std::vector<ObjectBox> boxes;
};

// Fixture `index` of the standard suite: even indices hold one object, odd
// indices two. Same (index, seed) gives the same image on every run.
Fixture make_fixture(int index, std::uint64_t seed = 0, int size = 224);

std::vector<Fixture> fixture_suite(int count = 10, std::uint64_t seed = 0, int size = 224);

// Band-limited image (low-frequency sinusoids, no edges) with one box.
Fixture smooth_fixture(int size = 224);

// Textured background only.
Image textured_background(int width, int height, std::uint64_t seed);

}  // namespace objir::synth
