#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "objir/errors.hpp"

namespace objir {

// Row-major interleaved float image with intensities in [0, 1].
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    float& at(int x, int y, int c = 0) { return data_[offset(x, y) + c]; }
    float at(int x, int y, int c = 0) const { return data_[offset(x, y) + c]; }

    std::span<float> pixel(int x, int y) {
        return {data_.data() + offset(x, y), static_cast<std::size_t>(channels_)};
    }
    std::span<const float> pixel(int x, int y) const {
        return {data_.data() + offset(x, y), static_cast<std::size_t>(channels_)};
    }

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

    // Copy of the pixel rectangle [x0, x0+w) x [y0, y0+h); must lie inside.
    Image crop(int x0, int y0, int w, int h) const;

    bool operator==(const Image&) const = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

double max_abs_diff(const Image& a, const Image& b);
double mean_abs_diff(const Image& a, const Image& b);

}  // namespace objir
