// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "relight/image.hpp"

namespace relight {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrCap = 99.0;

/// Per-pixel evaluation mask; keep[i] != 0 means pixel i (row-major) is scored.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> keep;

    static Mask all(int width, int height);
    std::size_t kept() const;
    /// Fraction of pixels that are scored.
    double coverage() const;
    bool keeps(int x, int y) const { return keep[static_cast<std::size_t>(y) * width + x] != 0; }
    void exclude(int x, int y) { keep[static_cast<std::size_t>(y) * width + x] = 0; }
};

/// A pixel survives only if both masks keep it.
Mask intersect(const Mask& a, const Mask& b);

/// Inclusive-exclusive pixel rectangle [x0, x1) x [y0, y1).
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int area() const { return (x1 - x0) * (y1 - y0); }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Largest axis-aligned rectangle whose pixels are exactly (0, 0, 0).
/// Rectangles smaller than max(16, 0.0005 * pixel_count) are ignored.
std::optional<Rect> detect_black_box(const ImageBuffer& img);

/// Mask keeping everything except `box` (if any).
Mask mask_excluding(int width, int height, const std::optional<Rect>& box);

/// Binary mask image: white (>= 128) marks the excluded calibration object.
Mask mask_from_gray(const std::vector<unsigned char>& gray, int width, int height);

using Lab = std::array<double, 3>;

/// sRGB in [0, 1] (D65) to CIELAB. Throws ContractError outside [0, 1].
Lab srgb_to_lab(double r, double g, double b);
/// Inverse of srgb_to_lab for in-gamut colours.
std::array<double, 3> lab_to_srgb(const Lab& lab);
/// Converts a 0-255 image pixel by pixel.
std::vector<Lab> to_lab(const ImageBuffer& img);

double mse(const ImageBuffer& a, const ImageBuffer& b, const Mask* mask = nullptr);
double psnr(const ImageBuffer& a, const ImageBuffer& b);
/// Mean SSIM on Rec.601 luma, 11x11 Gaussian window (sigma 1.5), valid windows only.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

/// Mean CIE76 distance over kept pixels.
double delta_e76(const std::vector<Lab>& a, const std::vector<Lab>& b, const Mask* mask = nullptr);
double delta_e76(const ImageBuffer& a, const ImageBuffer& b, const Mask* mask = nullptr);

struct AngularError {
    double degrees = 0.0;
    std::size_t excluded = 0;  ///< kept pixels skipped because a vector was (near) zero
};

/// Mean angle between RGB vectors over kept pixels whose norms are both >= 1e-9.
AngularError angular_mae(const ImageBuffer& a, const ImageBuffer& b, const Mask* mask = nullptr);

}  // namespace relight
