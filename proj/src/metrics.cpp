// SPDX-License-Identifier: Apache-2.0
#include "relight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stack>
#include <string>

namespace relight {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kSsimC2 = (0.03 * 255.0) * (0.03 * 255.0);

// sRGB primaries, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhite[3] = {0.95047, 1.0, 1.08883};
constexpr double kLabDelta = 6.0 / 29.0;

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }
double linear_to_srgb(double c) { return c <= 0.0031308 ? c * 12.92 : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055; }

double lab_f(double t) {
    return t > kLabDelta * kLabDelta * kLabDelta ? std::cbrt(t) : t / (3.0 * kLabDelta * kLabDelta) + 4.0 / 29.0;
}
double lab_f_inv(double f) {
    return f > kLabDelta ? f * f * f : 3.0 * kLabDelta * kLabDelta * (f - 4.0 / 29.0);
}

std::array<std::array<double, 3>, 3> invert3(const double m[3][3]) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    std::array<std::array<double, 3>, 3> r{};
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return r;
}

void check_mask(const Mask* mask, const ImageBuffer& img) {
    if (mask && (mask->width != img.width() || mask->height != img.height())) {
        throw ContractError("mask is " + std::to_string(mask->width) + "x" + std::to_string(mask->height) +
                            " but image is " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
}

bool kept(const Mask* mask, std::size_t i) { return !mask || mask->keep[i] != 0; }

std::vector<double> luma(const ImageBuffer& img) {
    std::vector<double> out(img.pixel_count());
    const auto v = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = kLumaR * v[3 * i] + kLumaG * v[3 * i + 1] + kLumaB * v[3 * i + 2];
    return out;
}

/// Valid-mode separable Gaussian filter.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
            rows[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

}  // namespace

Mask Mask::all(int width, int height) {
    return Mask{width, height, std::vector<unsigned char>(static_cast<std::size_t>(width) * height, 1)};
}

std::size_t Mask::kept() const {
    return static_cast<std::size_t>(std::count_if(keep.begin(), keep.end(), [](unsigned char k) { return k != 0; }));
}

double Mask::coverage() const { return keep.empty() ? 0.0 : static_cast<double>(kept()) / keep.size(); }

Mask intersect(const Mask& a, const Mask& b) {
    if (a.width != b.width || a.height != b.height) throw ContractError("cannot intersect masks of different sizes");
    Mask out = a;
    for (std::size_t i = 0; i < out.keep.size(); ++i) out.keep[i] = (a.keep[i] && b.keep[i]) ? 1 : 0;
    return out;
}

std::optional<Rect> detect_black_box(const ImageBuffer& img) {
    const int w = img.width();
    const int h = img.height();
    std::vector<int> heights(static_cast<std::size_t>(w) + 1, 0);
    Rect best;
    int best_area = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool black = img.at(x, y, 0) == 0.0 && img.at(x, y, 1) == 0.0 && img.at(x, y, 2) == 0.0;
            heights[x] = black ? heights[x] + 1 : 0;
        }
        // Largest rectangle under the histogram ending at row y; heights[w] = 0 flushes the stack.
        std::stack<int> st;
        for (int x = 0; x <= w; ++x) {
            while (!st.empty() && heights[st.top()] >= heights[x]) {
                const int top = st.top();
                st.pop();
                const int left = st.empty() ? 0 : st.top() + 1;
                const int area = heights[top] * (x - left);
                if (area > best_area) {
                    best_area = area;
                    best = Rect{left, y - heights[top] + 1, x, y + 1};
                }
            }
            st.push(x);
        }
    }
    const double min_area = std::max(16.0, 0.0005 * static_cast<double>(img.pixel_count()));
    if (best_area == 0 || best_area < min_area) return std::nullopt;
    return best;
}

Mask mask_excluding(int width, int height, const std::optional<Rect>& box) {
    Mask m = Mask::all(width, height);
    if (box)
        for (int y = box->y0; y < box->y1; ++y)
            for (int x = box->x0; x < box->x1; ++x) m.exclude(x, y);
    return m;
}

Mask mask_from_gray(const std::vector<unsigned char>& gray, int width, int height) {
    if (gray.size() != static_cast<std::size_t>(width) * height) throw ContractError("mask buffer size mismatch");
    Mask m = Mask::all(width, height);
    for (std::size_t i = 0; i < gray.size(); ++i) m.keep[i] = gray[i] >= 128 ? 0 : 1;
    return m;
}

Lab srgb_to_lab(double r, double g, double b) {
    for (double c : {r, g, b}) {
        if (!(c >= 0.0 && c <= 1.0)) throw ContractError("sRGB component out of [0, 1]: " + std::to_string(c));
    }
    const double lin[3] = {srgb_to_linear(r), srgb_to_linear(g), srgb_to_linear(b)};
    double f[3];
    for (int i = 0; i < 3; ++i) {
        const double xyz = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
        f[i] = lab_f(xyz / kWhite[i]);
    }
    return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
}

std::array<double, 3> lab_to_srgb(const Lab& lab) {
    static const auto inv = invert3(kRgbToXyz);
    const double fy = (lab[0] + 16.0) / 116.0;
    const double f[3] = {fy + lab[1] / 500.0, fy, fy - lab[2] / 200.0};
    double xyz[3];
    for (int i = 0; i < 3; ++i) xyz[i] = lab_f_inv(f[i]) * kWhite[i];
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        const double lin = inv[i][0] * xyz[0] + inv[i][1] * xyz[1] + inv[i][2] * xyz[2];
        out[i] = linear_to_srgb(lin);
    }
    return out;
}

std::vector<Lab> to_lab(const ImageBuffer& img) {
    std::vector<Lab> out(img.pixel_count());
    const auto v = img.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = srgb_to_lab(v[3 * i] / 255.0, v[3 * i + 1] / 255.0, v[3 * i + 2] / 255.0);
    return out;
}

double mse(const ImageBuffer& a, const ImageBuffer& b, const Mask* mask) {
    require_same_size(a, b, "mse");
    check_mask(mask, a);
    const auto va = a.values();
    const auto vb = b.values();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        if (!kept(mask, i)) continue;
        for (int c = 0; c < 3; ++c) {
            const double d = va[3 * i + c] - vb[3 * i + c];
            sum += d * d;
        }
        n += 3;
    }
    if (n == 0) throw ContractError("mse: mask excludes every pixel");
    return sum / static_cast<double>(n);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    const double e = mse(a, b);
    if (e == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / e));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_size(a, b, "ssim");
    const int w = a.width();
    const int h = a.height();
    if (w < kSsimWindow || h < kSsimWindow) {
        throw ContractError("ssim needs at least 11x11 pixels, got " + std::to_string(w) + "x" + std::to_string(h));
    }
    std::vector<double> k(kSsimWindow);
    double ksum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        ksum += k[i];
    }
    for (double& v : k) v /= ksum;

    const auto la = luma(a);
    const auto lb = luma(b);
    std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        aa[i] = la[i] * la[i];
        bb[i] = lb[i] * lb[i];
        ab[i] = la[i] * lb[i];
    }
    const auto ma = filter_valid(la, w, h, k);
    const auto mb = filter_valid(lb, w, h, k);
    const auto saa = filter_valid(aa, w, h, k);
    const auto sbb = filter_valid(bb, w, h, k);
    const auto sab = filter_valid(ab, w, h, k);
    double total = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
        const double va = saa[i] - ma[i] * ma[i];
        const double vb = sbb[i] - mb[i] * mb[i];
        const double cov = sab[i] - ma[i] * mb[i];
        total += ((2.0 * ma[i] * mb[i] + kSsimC1) * (2.0 * cov + kSsimC2)) /
                 ((ma[i] * ma[i] + mb[i] * mb[i] + kSsimC1) * (va + vb + kSsimC2));
    }
    return total / static_cast<double>(ma.size());
}

double delta_e76(const std::vector<Lab>& a, const std::vector<Lab>& b, const Mask* mask) {
    if (a.size() != b.size()) throw ContractError("delta_e76: pixel counts differ");
    if (mask && mask->keep.size() != a.size()) throw ContractError("delta_e76: mask size mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!kept(mask, i)) continue;
        const double d0 = a[i][0] - b[i][0];
        const double d1 = a[i][1] - b[i][1];
        const double d2 = a[i][2] - b[i][2];
        sum += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
        ++n;
    }
    if (n == 0) throw ContractError("delta_e76: mask excludes every pixel");
    return sum / static_cast<double>(n);
}

double delta_e76(const ImageBuffer& a, const ImageBuffer& b, const Mask* mask) {
    require_same_size(a, b, "delta_e76");
    check_mask(mask, a);
    return delta_e76(to_lab(a), to_lab(b), mask);
}

AngularError angular_mae(const ImageBuffer& a, const ImageBuffer& b, const Mask* mask) {
    require_same_size(a, b, "angular_mae");
    check_mask(mask, a);
    const auto va = a.values();
    const auto vb = b.values();
    AngularError out;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        if (!kept(mask, i)) continue;
        const double* p = &va[3 * i];
        const double* q = &vb[3 * i];
        const double np = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        const double nq = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
        if (np < 1e-9 || nq < 1e-9) {
            ++out.excluded;
            continue;
        }
        const double dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
        const double cx = p[1] * q[2] - p[2] * q[1];
        const double cy = p[2] * q[0] - p[0] * q[2];
        const double cz = p[0] * q[1] - p[1] * q[0];
        sum += std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
        ++n;
    }
    if (n == 0) throw ContractError("angular_mae: no pixel left to evaluate");
    out.degrees = sum / static_cast<double>(n) * 180.0 / std::numbers::pi;
    return out;
}

}  // namespace relight
