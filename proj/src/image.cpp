#include "objir/image.hpp"

#include <algorithm>
#include <cmath>

namespace objir {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0) throw InvalidArgument("image dimensions must be non-negative");
    if (channels != 1 && channels != 3) throw InvalidArgument("image must have 1 or 3 channels");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                     static_cast<std::size_t>(channels),
                 fill);
}

Image Image::crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_) {
        throw OutOfBounds("crop rectangle outside image");
    }
    Image out(w, h, channels_);
    for (int y = 0; y < h; ++y) {
        const auto src = data_.begin() + static_cast<std::ptrdiff_t>(offset(x0, y0 + y));
        std::copy(src, src + static_cast<std::ptrdiff_t>(w) * channels_,
                  out.data_.begin() + static_cast<std::ptrdiff_t>(out.offset(0, y)));
    }
    return out;
}

double max_abs_diff(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
        throw InvalidArgument("image shapes differ");
    }
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        m = std::max(m, std::abs(static_cast<double>(a.data()[k]) - b.data()[k]));
    }
    return m;
}

double mean_abs_diff(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
        throw InvalidArgument("image shapes differ");
    }
    if (a.data().empty()) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) {
        s += std::abs(static_cast<double>(a.data()[k]) - b.data()[k]);
    }
    return s / static_cast<double>(a.data().size());
}

}  // namespace objir
