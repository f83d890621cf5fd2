// SPDX-License-Identifier: Apache-2.0
#include "relight/codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace relight {

DecoderVariant parse_decoder_variant(std::string_view name) {
    if (name == "standard") return DecoderVariant::standard;
    if (name == "high-fidelity") return DecoderVariant::high_fidelity;
    throw ConfigError("unknown decoder variant '" + std::string(name) + "'");
}

std::string_view to_string(DecoderVariant v) {
    return v == DecoderVariant::standard ? "standard" : "high-fidelity";
}

namespace {

const double kS3 = std::sqrt(3.0);
const double kS2 = std::sqrt(2.0);
const double kS6 = std::sqrt(6.0);

const std::array<std::array<double, 3>, 3> kColour{{
    {1 / kS3, 1 / kS3, 1 / kS3},
    {1 / kS2, -1 / kS2, 0.0},
    {1 / kS6, 1 / kS6, -2 / kS6},
}};

// rows: bands; columns: block pixels (0,0) (0,1) (1,0) (1,1) in (row, col) order
constexpr std::array<std::array<double, 4>, 4> kHaar{{
    {0.5, 0.5, 0.5, 0.5},
    {0.5, -0.5, 0.5, -0.5},
    {0.5, 0.5, -0.5, -0.5},
    {0.5, -0.5, -0.5, 0.5},
}};

}  // namespace

LatentState ToyCodec::encode(const ImageBuffer& img) const {
    if (img.width() == 0 || img.height() == 0 || img.width() % 2 != 0 || img.height() % 2 != 0) {
        throw ContractError("toy codec needs even image dimensions (got " + std::to_string(img.width()) + "x" +
                            std::to_string(img.height()) + "); pad in preprocessing first");
    }
    Tensor3 z(12, img.height() / 2, img.width() / 2);
    for (int by = 0; by < z.dim(1); ++by) {
        for (int bx = 0; bx < z.dim(2); ++bx) {
            std::array<std::array<double, 3>, 4> rot{};  // [pixel][colour axis]
            for (int p = 0; p < 4; ++p) {
                const int x = 2 * bx + (p & 1), y = 2 * by + (p >> 1);
                std::array<double, 3> n{};
                for (int c = 0; c < 3; ++c) n[static_cast<std::size_t>(c)] = img.at(x, y, c) / 255.0 * 2.0 - 1.0;
                for (int a = 0; a < 3; ++a) {
                    double s = 0.0;
                    for (int c = 0; c < 3; ++c) s += kColour[a][c] * n[static_cast<std::size_t>(c)];
                    rot[static_cast<std::size_t>(p)][static_cast<std::size_t>(a)] = s;
                }
            }
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 4; ++b) {
                    double s = 0.0;
                    for (int p = 0; p < 4; ++p) s += kHaar[b][p] * rot[static_cast<std::size_t>(p)][static_cast<std::size_t>(a)];
                    z(a * 4 + b, by, bx) = s * band_scale(b);
                }
            }
        }
    }
    return {std::move(z), 0};
}

ImageBuffer ToyCodec::decode(const LatentState& z, DecoderVariant variant) const {
    if (z.t != 0) throw ContractError("decode needs a clean latent (t=0), got t=" + std::to_string(z.t));
    if (z.data.dim(0) != 12) throw ContractError("toy codec decodes 12-channel latents");
    const double detail = variant == DecoderVariant::standard ? kStandardDetailGain : 1.0;
    ImageBuffer img(z.data.dim(2) * 2, z.data.dim(1) * 2);
    for (int by = 0; by < z.data.dim(1); ++by) {
        for (int bx = 0; bx < z.data.dim(2); ++bx) {
            for (int p = 0; p < 4; ++p) {
                std::array<double, 3> rot{};
                for (int a = 0; a < 3; ++a) {
                    double s = 0.0;
                    for (int b = 0; b < 4; ++b) {
                        const double g = b == 0 ? 1.0 : detail;
                        s += kHaar[b][p] * g * z.data(a * 4 + b, by, bx) / band_scale(b);
                    }
                    rot[static_cast<std::size_t>(a)] = s;
                }
                const int x = 2 * bx + (p & 1), y = 2 * by + (p >> 1);
                for (int c = 0; c < 3; ++c) {
                    double n = 0.0;
                    for (int a = 0; a < 3; ++a) n += kColour[a][c] * rot[static_cast<std::size_t>(a)];
                    const double v = (n + 1.0) / 2.0 * 255.0;
                    img.at(x, y, c) = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 255.0);
                }
            }
        }
    }
    return img;
}

}  // namespace relight
