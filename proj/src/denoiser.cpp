// SPDX-License-Identifier: Apache-2.0
#include "relight/denoiser.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace relight {

static_assert(std::endian::native == std::endian::little, "cache blobs assume a little-endian host");

FeatureKind parse_feature_kind(std::string_view name) {
    if (name == "self-attention") return FeatureKind::self_attention;
    if (name == "residual") return FeatureKind::residual;
    throw ConfigError("unknown feature kind '" + std::string(name) + "'");
}

BlockPosition parse_block_position(std::string_view name) {
    if (name == "down") return BlockPosition::down;
    if (name == "mid") return BlockPosition::mid;
    if (name == "up") return BlockPosition::up;
    throw ConfigError("unknown block position '" + std::string(name) + "'");
}

std::string_view to_string(FeatureKind kind) {
    return kind == FeatureKind::self_attention ? "self-attention" : "residual";
}

std::string_view to_string(BlockPosition pos) {
    switch (pos) {
        case BlockPosition::down: return "down";
        case BlockPosition::mid: return "mid";
        case BlockPosition::up: return "up";
    }
    return "?";
}

InjectionTarget parse_injection_target(std::string_view name) {
    if (name == "qkv") return InjectionTarget::qkv;
    if (name == "kv") return InjectionTarget::kv;
    throw ConfigError("unknown injection target '" + std::string(name) + "' (qkv|kv)");
}

std::string_view to_string(InjectionTarget t) { return t == InjectionTarget::qkv ? "qkv" : "kv"; }

bool TapConfig::taps(const LayerInfo& layer) const {
    if (layer.kind != feature_kind) return false;
    if (!block_scope.contains(layer.position)) return false;
    return !layer_filter || layer_filter->contains(layer.id);
}

std::vector<LayerInfo> Denoiser::tapped_layers(const TapConfig& tap) const {
    const auto& catalog = layer_catalog();
    if (tap.layer_filter) {
        for (const auto& id : *tap.layer_filter) {
            const bool known = std::any_of(catalog.begin(), catalog.end(),
                                           [&](const LayerInfo& l) { return l.id == id; });
            if (!known) throw ConfigError("tap names unknown layer '" + id + "'");
        }
    }
    std::vector<LayerInfo> out;
    std::copy_if(catalog.begin(), catalog.end(), std::back_inserter(out),
                 [&](const LayerInfo& l) { return tap.taps(l); });
    return out;
}

void AttentionCache::record(const std::string& layer, int t, FeatureBundle bundle) {
    if (mode_ != CacheMode::record) throw ContractError("cache is not in record mode");
    auto [it, inserted] = entries_.try_emplace(Key{layer, t}, std::move(bundle));
    if (!inserted) {
        throw ContractError("cache entry (" + layer + ", t=" + std::to_string(t) + ") recorded twice");
    }
}

const FeatureBundle& AttentionCache::fetch(const std::string& layer, int t) const {
    auto it = entries_.find(Key{layer, t});
    if (it == entries_.end()) throw CacheMissError(layer, t);
    return it->second;
}

bool AttentionCache::contains(const std::string& layer, int t) const {
    return entries_.contains(Key{layer, t});
}

namespace {

void write_blob(std::ofstream& os, const Tensor3& t) {
    auto v = t.values();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

Tensor3 read_blob(std::ifstream& is, const std::array<int, 3>& shape) {
    Tensor3 t(shape[0], shape[1], shape[2]);
    auto v = t.values();
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
    if (!is) throw IoError("truncated cache blob");
    return t;
}

}  // namespace

void AttentionCache::spill(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot write " + (dir / "manifest.txt").string());
    std::size_t n = 0;
    for (const auto& [key, bundle] : entries_) {
        const auto& [layer, t] = key;
        if (layer.find_first_of(" \t\n") != std::string::npos) {
            throw IoError("layer id '" + layer + "' cannot be spilled (contains whitespace)");
        }
        const std::string file = "entry_" + std::to_string(n++) + ".bin";
        const auto& s = bundle.v.shape();
        manifest << layer << ' ' << t << " f64 " << s[0] << ' ' << s[1] << ' ' << s[2] << ' ' << file
                 << '\n';
        std::ofstream blob(dir / file, std::ios::binary);
        if (!blob) throw IoError("cannot write " + (dir / file).string());
        if (bundle.has_qk()) {
            write_blob(blob, bundle.q);
            write_blob(blob, bundle.k);
        }
        write_blob(blob, bundle.v);
    }
}

AttentionCache AttentionCache::load(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw IoError("cannot read " + (dir / "manifest.txt").string());
    AttentionCache cache(CacheMode::record);
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string layer, dtype, file;
        int t = 0;
        std::array<int, 3> shape{};
        if (!(ls >> layer >> t >> dtype >> shape[0] >> shape[1] >> shape[2] >> file)) {
            throw IoError("malformed cache manifest line: '" + line + "'");
        }
        if (dtype != "f64") throw IoError("unsupported cache dtype '" + dtype + "'");
        const auto path = dir / file;
        const auto per_tensor = static_cast<std::uintmax_t>(shape[0]) * shape[1] * shape[2] * sizeof(double);
        const auto bytes = std::filesystem::file_size(path);
        std::ifstream blob(path, std::ios::binary);
        FeatureBundle bundle;
        if (bytes == 3 * per_tensor) {
            bundle.q = read_blob(blob, shape);
            bundle.k = read_blob(blob, shape);
        } else if (bytes != per_tensor) {
            throw IoError("cache blob " + path.string() + " has unexpected size");
        }
        bundle.v = read_blob(blob, shape);
        cache.record(layer, t, std::move(bundle));
    }
    cache.set_mode(CacheMode::replay);
    return cache;
}

}  // namespace relight
