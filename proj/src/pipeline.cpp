// SPDX-License-Identifier: Apache-2.0
#include "relight/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace relight {

namespace {

constexpr double kMinChannelStd = 1e-8;

StepContext step_context(const NoiseSchedule& sched, int t) {
    return {t, sched.model_timestep(t), sched.alpha_bar(t)};
}

}  // namespace

FeatureSource parse_feature_source(std::string_view name) {
    if (name == "inversion") return FeatureSource::inversion;
    if (name == "sampling") return FeatureSource::sampling;
    throw ConfigError("unknown feature source '" + std::string(name) + "' (inversion|sampling)");
}

FeatureInput parse_feature_input(std::string_view name) {
    if (name == "preprocessed") return FeatureInput::preprocessed;
    if (name == "raw") return FeatureInput::raw;
    if (name == "custom") return FeatureInput::custom;
    throw ConfigError("unknown feature input '" + std::string(name) + "' (preprocessed|raw|custom)");
}

std::string_view to_string(FeatureSource s) { return s == FeatureSource::inversion ? "inversion" : "sampling"; }

std::string_view to_string(FeatureInput i) {
    switch (i) {
    case FeatureInput::preprocessed: return "preprocessed";
    case FeatureInput::raw: return "raw";
    case FeatureInput::custom: return "custom";
    }
    return "?";
}

void PipelineConfig::validate() const {
    if (!(intensity_threshold > 0.0 && intensity_threshold < 255.0)) {
        throw ConfigError("intensity_threshold must lie in (0, 255)");
    }
    if (feature_input == FeatureInput::custom && !(feature_threshold > 0.0 && feature_threshold < 255.0)) {
        throw ConfigError("feature_threshold must lie in (0, 255)");
    }
    if (steps < 1) throw ConfigError("steps must be at least 1");
    if (adain_channels) {
        std::set<int> seen;
        for (int c : *adain_channels) {
            if (c < 0) throw ConfigError("negative AdaIN channel index");
            if (!seen.insert(c).second) throw ConfigError("duplicate AdaIN channel index");
        }
    }
}

void Engine::check_compatible() const {
    if (codec.latent_channels() != backend.latent_channels()) {
        throw ConfigError("codec produces " + std::to_string(codec.latent_channels()) +
                          " latent channels, backend expects " + std::to_string(backend.latent_channels()));
    }
    if (codec.downscale() != backend.latent_downscale()) {
        throw ConfigError("codec and backend disagree on the latent downscale");
    }
}

ImageBuffer pad_to_multiple(const ImageBuffer& img, int granularity) {
    if (granularity < 1) throw ConfigError("padding granularity must be positive");
    auto need = [&](int n) { return (granularity - n % granularity) % granularity; };
    const int ph = need(img.height()), pw = need(img.width());
    if (ph == 0 && pw == 0) return img;
    return reflect_pad(img, {ph / 2, ph - ph / 2, pw / 2, pw - pw / 2});
}

ImageBuffer preprocess(const ImageBuffer& img, double threshold, int granularity) {
    if (!(threshold > 0.0 && threshold < 255.0)) throw ConfigError("threshold must lie in (0, 255)");
    if (img.pixel_count() == 0) throw ContractError("preprocess: empty image");
    const double mean = img.mean();
    if (mean <= 0.0) {
        throw DegenerateInputError("image is entirely black (mean intensity 0); intensity scaling is undefined");
    }
    if (mean >= threshold) return pad_to_multiple(img, granularity);
    ImageBuffer lifted = img;
    const double gain = threshold / mean;
    for (auto& v : lifted.values()) v = std::min(v * gain, 255.0);
    return pad_to_multiple(lifted, granularity);
}

Inversion invert(const ImageBuffer& img, const Engine& engine, const TapConfig& tap, bool record) {
    engine.check_compatible();
    Inversion out{engine.codec.encode(img), AttentionCache(record ? CacheMode::record : CacheMode::off)};
    const auto& sched = engine.sched;
    for (int t = 0; t < sched.steps(); ++t) {
        // eps is evaluated on z_t with the label of the step being entered;
        // sampling later evaluates z_{t+1} with the same label and cache key.
        const Tensor3 eps = engine.backend.predict(out.latent.data, step_context(sched, t + 1), out.cache, tap);
        out.latent.data = ddim_invert_step(out.latent.data, t, eps, sched);
        out.latent.t = t + 1;
        if (!out.latent.data.all_finite()) throw ContractError("non-finite latent during inversion");
    }
    return out;
}

Tensor3 standard_normal(int d0, int d1, int d2, std::uint64_t seed) {
    Tensor3 z(d0, d1, d2);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : z.values()) v = normal(rng);
    return z;
}

namespace {

struct Moments {
    double mean;
    double std;
};

Moments channel_moments(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - m) * (v - m);
    return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace

LatentState adain(const LatentState& zc, std::uint64_t seed, const std::optional<std::vector<int>>& channels) {
    const auto& z = zc.data;
    return adain_to(zc, standard_normal(z.dim(0), z.dim(1), z.dim(2), seed), channels);
}

LatentState adain_to(const LatentState& zc, const Tensor3& zs, const std::optional<std::vector<int>>& channels) {
    const auto& z = zc.data;
    require_same_shape(z, zs, "adain reference");
    if (!z.all_finite()) throw ContractError("adain: non-finite latent");
    std::vector<int> selected;
    if (channels) {
        selected = *channels;
    } else {
        for (int c = 0; c < z.dim(0); ++c) selected.push_back(c);
    }
    LatentState out = zc;
    for (int c : selected) {
        if (c < 0 || c >= z.dim(0)) {
            throw ConfigError("AdaIN channel " + std::to_string(c) + " outside latent with " +
                              std::to_string(z.dim(0)) + " channels");
        }
        const Moments content = channel_moments(z.slab(c));
        const Moments style = channel_moments(zs.slab(c));
        if (content.std < kMinChannelStd) {
            throw DegenerateInputError("latent channel " + std::to_string(c) +
                                       " is constant; cannot renormalize it");
        }
        // scale * z + offset: returns zs bit for bit when zc == zs
        const double scale = style.std / content.std;
        const double offset = style.mean - scale * content.mean;
        auto dst = out.data.slab(c);
        auto src = z.slab(c);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = scale * src[i] + offset;
    }
    return out;
}

LatentState sample(const LatentState& zT, const Engine& engine, AttentionCache& cache, const TapConfig& tap) {
    engine.check_compatible();
    const auto& sched = engine.sched;
    if (zT.t != sched.steps()) {
        throw ContractError("sampling starts at t=T=" + std::to_string(sched.steps()) + ", latent is at t=" +
                            std::to_string(zT.t));
    }
    LatentState z = zT;
    for (int t = sched.steps(); t >= 1; --t) {
        const Tensor3 eps = engine.backend.predict(z.data, step_context(sched, t), cache, tap);
        z.data = ddim_sample_step(z.data, t, eps, sched);
        z.t = t - 1;
        if (!z.data.all_finite()) throw ContractError("non-finite latent during sampling");
    }
    return z;
}

ImageBuffer denoise_with_injection(const LatentState& zT, AttentionCache& cache, const Engine& engine,
                                   const TapConfig& tap, DecoderVariant decoder, const Padding& padding) {
    if (cache.mode() == CacheMode::record) throw ContractError("denoise_with_injection needs a replay or off cache");
    if (cache.mode() == CacheMode::replay) {
        for (const auto& layer : engine.backend.tapped_layers(tap)) {
            for (int t = 1; t <= engine.sched.steps(); ++t) {
                if (!cache.contains(layer.id, t)) throw CacheMissError(layer.id, t);
            }
        }
    }
    const LatentState z0 = sample(zT, engine, cache, tap);
    return crop(engine.codec.decode(z0, decoder), padding);
}

ImageBuffer enhance(const ImageBuffer& img, const PipelineConfig& cfg, const Engine& engine) {
    cfg.validate();
    engine.check_compatible();
    if (engine.sched.steps() != cfg.steps) {
        throw ConfigError("schedule has " + std::to_string(engine.sched.steps()) + " steps, config asks for " +
                          std::to_string(cfg.steps));
    }
    const int gran = engine.granularity();
    const ImageBuffer pre = preprocess(img, cfg.intensity_threshold, gran);

    LatentState zT;
    AttentionCache cache(CacheMode::off);
    if (!cfg.injection) {
        zT = invert(pre, engine, cfg.tap, false).latent;
    } else if (cfg.feature_source == FeatureSource::sampling) {
        zT = invert(pre, engine, cfg.tap, false).latent;
        cache.set_mode(CacheMode::record);
        sample(zT, engine, cache, cfg.tap);
    } else if (cfg.feature_input == FeatureInput::preprocessed) {
        auto inv = invert(pre, engine, cfg.tap, true);
        zT = std::move(inv.latent);
        cache = std::move(inv.cache);
    } else {
        const ImageBuffer feature_img = cfg.feature_input == FeatureInput::raw
                                            ? pad_to_multiple(img, gran)
                                            : preprocess(img, cfg.feature_threshold, gran);
        cache = invert(feature_img, engine, cfg.tap, true).cache;
        zT = invert(pre, engine, cfg.tap, false).latent;
    }

    if (cfg.adain_enabled) zT = adain(zT, cfg.seed, cfg.adain_channels);
    if (cache.mode() == CacheMode::record) cache.set_mode(CacheMode::replay);
    return denoise_with_injection(zT, cache, engine, cfg.tap, cfg.decoder, pre.padding());
}

}  // namespace relight
