// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "relight/errors.hpp"

namespace relight {

/// Reflect padding applied before encoding; cropped again after decoding.
struct Padding {
    int top = 0;
    int bottom = 0;
    int left = 0;
    int right = 0;

    bool none() const { return top == 0 && bottom == 0 && left == 0 && right == 0; }
    friend bool operator==(const Padding&, const Padding&) = default;
};

/// H x W x 3 sRGB raster, interleaved RGB, real values on the 0-255 scale.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    double& at(int x, int y, int c) { return px_[index(x, y, c)]; }
    double at(int x, int y, int c) const { return px_[index(x, y, c)]; }

    std::span<double> values() { return px_; }
    std::span<const double> values() const { return px_; }

    const Padding& padding() const { return padding_; }
    void set_padding(const Padding& p) { padding_ = p; }
    int original_width() const { return width_ - padding_.left - padding_.right; }
    int original_height() const { return height_ - padding_.top - padding_.bottom; }

    /// Mean over all pixels and channels.
    double mean() const;
    /// Per-channel means (R, G, B).
    std::array<double, 3> channel_means() const;

    bool same_size(const ImageBuffer& o) const { return width_ == o.width_ && height_ == o.height_; }

    friend bool operator==(const ImageBuffer& a, const ImageBuffer& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.px_ == b.px_;
    }

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3 + static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> px_;
    Padding padding_;
};

/// Throws ContractError unless both images share dimensions.
void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* what);

/// Rounds to the nearest integer and clamps to [0, 255].
ImageBuffer quantize(const ImageBuffer& img);

/// Mirror-pads (edge pixel repeated) by the given amounts.
ImageBuffer reflect_pad(const ImageBuffer& img, const Padding& pad);

/// Removes the padding recorded in `padding`.
ImageBuffer crop(const ImageBuffer& img, const Padding& padding);

/// Decodes png/jpg/jpeg/bmp into an 8-bit-valued buffer.
ImageBuffer load_image(const std::filesystem::path& path);
/// Loads a single-channel mask; returns one byte per pixel.
std::vector<unsigned char> load_gray(const std::filesystem::path& path, int& width, int& height);
/// Writes an 8-bit sRGB PNG (values rounded and clamped).
void save_png(const std::filesystem::path& path, const ImageBuffer& img);

}  // namespace relight
