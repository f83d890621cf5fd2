// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relight/tensor.hpp"

namespace relight {

enum class FeatureKind { self_attention, residual };
enum class BlockPosition { down, mid, up };

FeatureKind parse_feature_kind(std::string_view name);
BlockPosition parse_block_position(std::string_view name);
std::string_view to_string(FeatureKind kind);
std::string_view to_string(BlockPosition pos);

/// One tappable layer of a denoiser.
struct LayerInfo {
    std::string id;
    FeatureKind kind;
    BlockPosition position;
};

/// Which cached tensors replace the live ones on replay.
enum class InjectionTarget { qkv, kv };

InjectionTarget parse_injection_target(std::string_view name);
std::string_view to_string(InjectionTarget t);

/// Selects the layers whose features are recorded and replayed.
struct TapConfig {
    FeatureKind feature_kind = FeatureKind::self_attention;
    std::set<BlockPosition> block_scope{BlockPosition::up};
    std::optional<std::set<std::string>> layer_filter;
    InjectionTarget target = InjectionTarget::qkv;

    bool taps(const LayerInfo& layer) const;
};

/// Activations captured at one layer for one timestep.
///
/// Self-attention layers fill q, k and v (heads x tokens x head_dim).
/// Residual layers store the residual-branch output in v and leave q, k empty.
struct FeatureBundle {
    Tensor3 q;
    Tensor3 k;
    Tensor3 v;

    bool has_qk() const { return !q.empty(); }
};

enum class CacheMode { record, replay, off };

/// Feature store keyed by (layer id, pipeline step).
///
/// Record mode accepts each key once; replay mode is read-only and a missing
/// key is a CacheMissError, never a silent fallback.
class AttentionCache {
public:
    using Key = std::pair<std::string, int>;

    explicit AttentionCache(CacheMode mode = CacheMode::off) : mode_(mode) {}

    CacheMode mode() const { return mode_; }
    void set_mode(CacheMode mode) { mode_ = mode; }

    void record(const std::string& layer, int t, FeatureBundle bundle);
    const FeatureBundle& fetch(const std::string& layer, int t) const;
    bool contains(const std::string& layer, int t) const;

    std::size_t size() const { return entries_.size(); }
    const std::map<Key, FeatureBundle>& entries() const { return entries_; }

    /// Writes `manifest.txt` plus one little-endian f64 blob per entry.
    void spill(const std::filesystem::path& dir) const;
    /// Loads a spilled directory; the returned cache is in replay mode.
    static AttentionCache load(const std::filesystem::path& dir);

    friend bool operator==(const AttentionCache& a, const AttentionCache& b) {
        return a.entries_ == b.entries_;
    }

private:
    CacheMode mode_;
    std::map<Key, FeatureBundle> entries_;
};

inline bool operator==(const FeatureBundle& a, const FeatureBundle& b) {
    return a.q == b.q && a.k == b.k && a.v == b.v;
}

/// Timestep information handed to a denoiser for one evaluation.
struct StepContext {
    int step = 0;            ///< pipeline step, also the cache key
    int model_timestep = 0;  ///< timestep the network was trained with
    double alpha_bar = 1.0;
};

/// The noise predictor eps(z, t; no prompt) with feature taps.
///
/// Implementations are immutable after construction and may be shared across
/// threads; all per-run state lives in the AttentionCache argument. This is
/// the adapter contract external pretrained backends implement as well.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual int latent_channels() const = 0;
    /// Image-to-latent spatial ratio of the codec this backend pairs with.
    virtual int latent_downscale() const = 0;
    /// Latent height and width must be multiples of this.
    virtual int patch_size() const = 0;
    /// Tappable layers in forward-pass order.
    virtual const std::vector<LayerInfo>& layer_catalog() const = 0;

    /// Predicts the noise in `z`. The cache mode selects recording, replaying
    /// or ignoring features at the layers `tap` selects.
    virtual Tensor3 predict(const Tensor3& z, const StepContext& ctx, AttentionCache& cache,
                            const TapConfig& tap) const = 0;

    /// Layers `tap` selects from this backend's catalog. Throws ConfigError if
    /// the tap names a layer the backend does not have.
    std::vector<LayerInfo> tapped_layers(const TapConfig& tap) const;
};

}  // namespace relight
