// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "relight/codec.hpp"
#include "relight/denoiser.hpp"
#include "relight/image.hpp"
#include "relight/schedule.hpp"

namespace relight {

/// Where the replayed features come from.
enum class FeatureSource {
    inversion,  ///< recorded while inverting the input (the method)
    sampling,   ///< recorded during a plain DDIM reconstruction from the inverted latent
};

/// Which version of the input the features are recorded from.
enum class FeatureInput {
    preprocessed,  ///< the same intensity-lifted image that is inverted
    raw,           ///< the input without intensity lifting
    custom,        ///< the input lifted to `feature_threshold` instead
};

FeatureSource parse_feature_source(std::string_view name);
FeatureInput parse_feature_input(std::string_view name);
std::string_view to_string(FeatureSource s);
std::string_view to_string(FeatureInput i);

struct PipelineConfig {
    double intensity_threshold = 30.0;
    int steps = 25;
    std::uint64_t seed = 0;
    bool adain_enabled = true;
    std::optional<std::vector<int>> adain_channels;  ///< nullopt: every latent channel
    bool injection = true;
    TapConfig tap;
    FeatureSource feature_source = FeatureSource::inversion;
    FeatureInput feature_input = FeatureInput::preprocessed;
    double feature_threshold = 60.0;
    DecoderVariant decoder = DecoderVariant::high_fidelity;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Codec, backend and schedule one run is executed with.
struct Engine {
    const LatentCodec& codec;
    const Denoiser& backend;
    const NoiseSchedule& sched;

    /// Padding granularity: codec downscale times backend patch size.
    int granularity() const { return codec.downscale() * backend.patch_size(); }
    /// Throws ConfigError if codec and backend disagree on the latent layout.
    void check_compatible() const;
};

/// Reflect-pads (split evenly, extra pixel bottom/right) to multiples of `granularity`.
ImageBuffer pad_to_multiple(const ImageBuffer& img, int granularity);

/// Scales the image so its mean intensity (all pixels and channels, 0-255)
/// reaches `threshold` when it is below it, clamping at 255; brighter images
/// pass through untouched. Then pads via pad_to_multiple().
/// Throws DegenerateInputError for an all-black image.
ImageBuffer preprocess(const ImageBuffer& img, double threshold, int granularity);

struct Inversion {
    LatentState latent;
    AttentionCache cache;
};

/// DDIM inversion of an already preprocessed image. With `record`, features
/// of the tapped layers are stored under keys t = 1..T.
Inversion invert(const ImageBuffer& img, const Engine& engine, const TapConfig& tap, bool record = true);

/// Standard-normal tensor drawn deterministically from `seed`.
Tensor3 standard_normal(int d0, int d1, int d2, std::uint64_t seed);

/// Renormalizes the selected channels of `zc` to the channel-wise mean and
/// population standard deviation of a standard-normal draw from `seed`.
/// Unselected channels pass through bit for bit.
/// Throws DegenerateInputError for a selected channel with std < 1e-8.
LatentState adain(const LatentState& zc, std::uint64_t seed, const std::optional<std::vector<int>>& channels);

/// adain() against an explicit reference tensor of the same shape.
LatentState adain_to(const LatentState& zc, const Tensor3& zs, const std::optional<std::vector<int>>& channels);

/// Runs T DDIM sampling steps from `zT`. The cache mode decides whether the
/// features cached at step t are injected (replay), recorded (record) or
/// ignored (off) while stepping t -> t-1.
LatentState sample(const LatentState& zT, const Engine& engine, AttentionCache& cache, const TapConfig& tap);

/// Samples with replay (or off) and decodes, cropping `padding` away.
/// Checks cache completeness up front and throws CacheMissError naming the
/// first missing (layer, t).
ImageBuffer denoise_with_injection(const LatentState& zT, AttentionCache& cache, const Engine& engine,
                                   const TapConfig& tap, DecoderVariant decoder, const Padding& padding);

/// preprocess -> invert (record) -> adain -> denoise (replay) -> decode.
ImageBuffer enhance(const ImageBuffer& img, const PipelineConfig& cfg, const Engine& engine);

}  // namespace relight
