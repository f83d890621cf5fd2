// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "relight/denoiser.hpp"

namespace relight {

/// Desk-scale stand-in for a latent-diffusion U-Net.
///
/// The prediction is the closed-form noise estimate of a Gaussian data prior
/// with standard deviation `prior_std` plus an untrained token network:
///
///     patchify(2x2) -> embed -> down.res0 -> mid.attn0 -> up.res0 -> up.attn0 -> up.attn1
///
/// Attention layers are genuine 4-head self-attention over all tokens and
/// residual layers are `h + W2 tanh(W1 h)`. The output head projects the sum
/// of the up-block attention outputs back to patches, so the network's share
/// of the prediction is fully determined by the up-block attention features.
/// The projection u goes through `head_amplitude * sin(head_slope * u / head_amplitude)`,
/// bounded in magnitude but steep, so plain DDIM inversion followed by
/// sampling drifts while replaying the recorded attention does not.
///
/// Weights are seeded Gaussians rescaled to a fixed spectral norm:
/// `embed_norm` for the patch embedding, `qk_norm` for q/k, 0.5 for attention
/// output and W2, 1.0 elsewhere.
class ToyDenoiser final : public Denoiser {
public:
    struct Options {
        std::uint64_t seed = 0;
        int latent_channels = 12;
        int spatial = 16;  ///< nominal latent side, sets positional-encoding frequencies
        int d_model = 32;
        int heads = 4;
        double prior_std = 1.0;
        double embed_norm = 3.0;
        double qk_norm = 1.0;
        double head_amplitude = 0.1;
        double head_slope = 100.0;
    };

    explicit ToyDenoiser(const Options& opts);
    ~ToyDenoiser() override;

    int latent_channels() const override { return opts_.latent_channels; }
    int latent_downscale() const override { return 2; }
    int patch_size() const override { return kPatch; }
    const std::vector<LayerInfo>& layer_catalog() const override { return catalog_; }

    Tensor3 predict(const Tensor3& z, const StepContext& ctx, AttentionCache& cache,
                    const TapConfig& tap) const override;

    double prior_std(int channel) const;
    const Options& options() const { return opts_; }

    static constexpr int kPatch = 2;

private:
    struct Weights;

    Options opts_;
    std::vector<LayerInfo> catalog_;
    std::unique_ptr<Weights> w_;
};

std::shared_ptr<const Denoiser> build_toy_backend(std::uint64_t seed, int latent_channels, int spatial);

}  // namespace relight
