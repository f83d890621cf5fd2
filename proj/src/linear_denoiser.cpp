// SPDX-License-Identifier: Apache-2.0
#include "relight/linear_denoiser.hpp"

namespace relight {

LinearDenoiser::LinearDenoiser(std::vector<double> coefficients, int latent_channels, int downscale)
    : c_(std::move(coefficients)), channels_(latent_channels), downscale_(downscale) {
    if (c_.empty()) throw ConfigError("linear backend needs at least one coefficient");
}

Tensor3 LinearDenoiser::predict(const Tensor3& z, const StepContext& ctx, AttentionCache&,
                                const TapConfig&) const {
    if (ctx.step < 1 || ctx.step > static_cast<int>(c_.size())) {
        throw StepRangeError("linear backend has no coefficient for step " + std::to_string(ctx.step));
    }
    const double c = c_[static_cast<std::size_t>(ctx.step - 1)];
    Tensor3 out = z;
    for (auto& v : out.values()) v *= c;
    return out;
}

std::shared_ptr<const Denoiser> build_linear_backend(std::vector<double> coefficients) {
    return std::make_shared<LinearDenoiser>(std::move(coefficients));
}

}  // namespace relight
