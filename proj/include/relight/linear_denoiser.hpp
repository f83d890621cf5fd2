// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "relight/denoiser.hpp"

namespace relight {

/// Verification backend: predict(z, step t) = c[t - 1] * z, no layers to tap.
class LinearDenoiser final : public Denoiser {
public:
    explicit LinearDenoiser(std::vector<double> coefficients, int latent_channels = 12, int downscale = 2);

    int latent_channels() const override { return channels_; }
    int latent_downscale() const override { return downscale_; }
    int patch_size() const override { return 1; }
    const std::vector<LayerInfo>& layer_catalog() const override { return catalog_; }

    Tensor3 predict(const Tensor3& z, const StepContext& ctx, AttentionCache& cache,
                    const TapConfig& tap) const override;

    const std::vector<double>& coefficients() const { return c_; }

private:
    std::vector<double> c_;
    int channels_;
    int downscale_;
    std::vector<LayerInfo> catalog_;
};

std::shared_ptr<const Denoiser> build_linear_backend(std::vector<double> coefficients);

}  // namespace relight
