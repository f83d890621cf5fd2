// SPDX-License-Identifier: Apache-2.0
#include "relight/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <opencv2/imgcodecs.hpp>

namespace relight {

ImageBuffer::ImageBuffer(int width, int height, double fill)
    : width_(width), height_(height), px_(static_cast<std::size_t>(width) * height * 3, fill) {
    if (width < 0 || height < 0) throw ContractError("ImageBuffer: negative size");
}

double ImageBuffer::mean() const {
    if (px_.empty()) return 0.0;
    double s = 0.0;
    for (double v : px_) s += v;
    return s / static_cast<double>(px_.size());
}

std::array<double, 3> ImageBuffer::channel_means() const {
    std::array<double, 3> m{0.0, 0.0, 0.0};
    if (px_.empty()) return m;
    for (std::size_t i = 0; i < px_.size(); ++i) m[i % 3] += px_[i];
    for (auto& v : m) v /= static_cast<double>(pixel_count());
    return m;
}

void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
    if (!a.same_size(b)) {
        throw ContractError(std::string(what) + ": image size mismatch " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                            std::to_string(b.height()));
    }
}

ImageBuffer quantize(const ImageBuffer& img) {
    ImageBuffer out = img;
    for (auto& v : out.values()) v = std::clamp(std::round(v), 0.0, 255.0);
    return out;
}

namespace {

// symmetric mirror: -1 -> 0, -2 -> 1, n -> n-1, ...
int mirror(int i, int n) {
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

}  // namespace

ImageBuffer reflect_pad(const ImageBuffer& img, const Padding& pad) {
    if (img.width() == 0 || img.height() == 0) throw ContractError("cannot pad an empty image");
    ImageBuffer out(img.width() + pad.left + pad.right, img.height() + pad.top + pad.bottom);
    for (int y = 0; y < out.height(); ++y) {
        const int sy = mirror(y - pad.top, img.height());
        for (int x = 0; x < out.width(); ++x) {
            const int sx = mirror(x - pad.left, img.width());
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
        }
    }
    const auto& prev = img.padding();
    out.set_padding({prev.top + pad.top, prev.bottom + pad.bottom, prev.left + pad.left, prev.right + pad.right});
    return out;
}

ImageBuffer crop(const ImageBuffer& img, const Padding& p) {
    const int w = img.width() - p.left - p.right;
    const int h = img.height() - p.top - p.bottom;
    if (w <= 0 || h <= 0) throw ContractError("crop removes the whole image");
    ImageBuffer out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x + p.left, y + p.top, c);
    return out;
}

ImageBuffer load_image(const std::filesystem::path& path) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (m.empty()) throw IoError("cannot read image " + path.string());
    ImageBuffer img(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < m.cols; ++x) {
            img.at(x, y, 0) = row[x][2];
            img.at(x, y, 1) = row[x][1];
            img.at(x, y, 2) = row[x][0];
        }
    }
    return img;
}

std::vector<unsigned char> load_gray(const std::filesystem::path& path, int& width, int& height) {
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (m.empty()) throw IoError("cannot read mask " + path.string());
    width = m.cols;
    height = m.rows;
    std::vector<unsigned char> out(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const auto* row = m.ptr<unsigned char>(y);
        std::copy(row, row + width, out.begin() + static_cast<std::ptrdiff_t>(y) * width);
    }
    return out;
}

void save_png(const std::filesystem::path& path, const ImageBuffer& img) {
    cv::Mat m(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y) {
        auto* row = m.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(std::round(img.at(x, y, c)), 0.0, 255.0);
                row[x][2 - c] = static_cast<unsigned char>(v);
            }
        }
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (!cv::imwrite(path.string(), m)) throw IoError("cannot write " + path.string());
}

}  // namespace relight
