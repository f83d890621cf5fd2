// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string_view>

#include "relight/image.hpp"
#include "relight/tensor.hpp"

namespace relight {

/// A latent tensor tagged with its diffusion timestep.
struct LatentState {
    Tensor3 data;
    int t = 0;
};

/// `standard` is the decoder shipped with the diffusion checkpoint;
/// `high_fidelity` is the swapped-in decoder with better self-reconstruction.
enum class DecoderVariant { standard, high_fidelity };

DecoderVariant parse_decoder_variant(std::string_view name);
std::string_view to_string(DecoderVariant v);

/// Paired image <-> latent transforms. Encoding never depends on the decoder
/// variant, so a checkpoint's encoder can be mixed with another decoder.
class LatentCodec {
public:
    virtual ~LatentCodec() = default;

    virtual int latent_channels() const = 0;
    virtual int downscale() const = 0;

    /// Image dims must be multiples of downscale(); see preprocess().
    virtual LatentState encode(const ImageBuffer& img) const = 0;
    /// Requires t == 0. Output pixels are clamped to [0, 255].
    virtual ImageBuffer decode(const LatentState& z, DecoderVariant variant) const = 0;
};

/// Lossless analytic codec for desk-scale runs.
///
/// Pixels are normalized to [-1, 1], rotated by a fixed orthonormal colour
/// basis (luma (1,1,1)/sqrt3, then (1,-1,0)/sqrt2 and (1,1,-2)/sqrt6), and each
/// 2x2 block is taken through the orthonormal Haar basis. Latent channel
/// `colour * 4 + band` holds band 0 (block average), 1 (horizontal detail),
/// 2 (vertical detail) or 3 (diagonal detail) of that colour axis, multiplied
/// by band_scale(band).
///
/// The high-fidelity decoder is the exact inverse. The standard decoder
/// attenuates the three detail bands by kStandardDetailGain before inverting,
/// the blur a compressing decoder introduces.
class ToyCodec final : public LatentCodec {
public:
    static constexpr double kStandardDetailGain = 0.8;

    int latent_channels() const override { return 12; }
    int downscale() const override { return 2; }
    /// Latent scaling per Haar band, bringing typical image latents near unit variance.
    static double band_scale(int band) { return band == 0 ? kAverageBandScale : kDetailBandScale; }

    static constexpr double kAverageBandScale = 2.0;
    static constexpr double kDetailBandScale = 10.0;

    LatentState encode(const ImageBuffer& img) const override;
    ImageBuffer decode(const LatentState& z, DecoderVariant variant) const override;
};

}  // namespace relight
