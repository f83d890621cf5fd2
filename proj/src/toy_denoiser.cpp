// SPDX-License-Identifier: Apache-2.0
#include "relight/toy_denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace relight {

namespace {

/// Row-major dense matrix, rows x cols.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

double spectral_norm(const Matrix& m) {
    // power iteration on M^T M from a fixed start vector
    std::vector<double> x(static_cast<std::size_t>(m.cols), 1.0);
    std::vector<double> y(static_cast<std::size_t>(m.rows));
    double sigma = 0.0;
    for (int it = 0; it < 60; ++it) {
        for (int r = 0; r < m.rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < m.cols; ++c) s += m(r, c) * x[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = s;
        }
        double norm = 0.0;
        for (int c = 0; c < m.cols; ++c) {
            double s = 0.0;
            for (int r = 0; r < m.rows; ++r) s += m(r, c) * y[static_cast<std::size_t>(r)];
            x[static_cast<std::size_t>(c)] = s;
            norm += s * s;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (auto& v : x) v /= norm;
        sigma = std::sqrt(norm);
    }
    return sigma;
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double target_norm) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m{rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols)};
    for (auto& v : m.a) v = normal(rng);
    const double s = spectral_norm(m);
    for (auto& v : m.a) v *= target_norm / s;
    return m;
}

/// out[n] = M * in[n] for each of `tokens` row vectors.
std::vector<double> apply(const Matrix& m, const std::vector<double>& in, int tokens) {
    std::vector<double> out(static_cast<std::size_t>(tokens) * m.rows, 0.0);
    for (int n = 0; n < tokens; ++n) {
        const double* x = in.data() + static_cast<std::size_t>(n) * m.cols;
        double* y = out.data() + static_cast<std::size_t>(n) * m.rows;
        for (int r = 0; r < m.rows; ++r) {
            const double* row = m.a.data() + static_cast<std::size_t>(r) * m.cols;
            double s = 0.0;
            for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
            y[r] = s;
        }
    }
    return out;
}

/// tokens x (heads*head_dim) -> heads x tokens x head_dim
Tensor3 split_heads(const std::vector<double>& x, int tokens, int heads, int head_dim) {
    Tensor3 out(heads, tokens, head_dim);
    for (int n = 0; n < tokens; ++n)
        for (int h = 0; h < heads; ++h)
            for (int d = 0; d < head_dim; ++d)
                out(h, n, d) = x[static_cast<std::size_t>(n) * heads * head_dim + h * head_dim + d];
    return out;
}

/// softmax(q k^T / sqrt(d)) v, merged back to tokens x (heads*head_dim).
std::vector<double> attend(const Tensor3& q, const Tensor3& k, const Tensor3& v) {
    const int heads = q.dim(0), tokens = q.dim(1), hd = q.dim(2);
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    std::vector<double> out(static_cast<std::size_t>(tokens) * heads * hd, 0.0);
    std::vector<double> score(static_cast<std::size_t>(tokens));
    for (int h = 0; h < heads; ++h) {
        for (int i = 0; i < tokens; ++i) {
            double mx = -INFINITY;
            for (int j = 0; j < tokens; ++j) {
                double s = 0.0;
                for (int d = 0; d < hd; ++d) s += q(h, i, d) * k(h, j, d);
                score[static_cast<std::size_t>(j)] = s * scale;
                mx = std::max(mx, s * scale);
            }
            double denom = 0.0;
            for (auto& s : score) {
                s = std::exp(s - mx);
                denom += s;
            }
            double* y = out.data() + static_cast<std::size_t>(i) * heads * hd + h * hd;
            for (int j = 0; j < tokens; ++j) {
                const double w = score[static_cast<std::size_t>(j)] / denom;
                for (int d = 0; d < hd; ++d) y[d] += w * v(h, j, d);
            }
        }
    }
    return out;
}

void require_bundle_shape(const Tensor3& cached, const Tensor3& live, const std::string& layer) {
    if (!cached.same_shape(live)) {
        throw ContractError("cached features for layer '" + layer + "' have shape " + shape_string(cached) +
                            ", layer expects " + shape_string(live));
    }
}

}  // namespace

struct ToyDenoiser::Weights {
    Matrix embed;      // d x token_dim
    Matrix time_proj;  // d x d
    struct Residual {
        Matrix w1;  // hidden x d
        Matrix w2;  // d x hidden
    };
    struct Attention {
        Matrix wq, wk, wv, wo;  // d x d
    };
    std::vector<Residual> residual;    // indexed by catalog position
    std::vector<Attention> attention;  // indexed by catalog position
    Matrix out;                        // token_dim x d
};

ToyDenoiser::ToyDenoiser(const Options& opts) : opts_(opts), w_(std::make_unique<Weights>()) {
    if (opts_.latent_channels < 1) throw ConfigError("toy backend needs at least one latent channel");
    if (opts_.spatial < kPatch || opts_.spatial % kPatch != 0) {
        throw ConfigError("toy backend spatial size must be a positive multiple of " + std::to_string(kPatch));
    }
    if (!(opts_.head_amplitude > 0.0)) throw ConfigError("toy backend head amplitude must be positive");
    if (opts_.d_model % opts_.heads != 0 || opts_.d_model % 4 != 0) {
        throw ConfigError("toy backend d_model must be divisible by heads and by 4");
    }
    catalog_ = {
        {"down.res0", FeatureKind::residual, BlockPosition::down},
        {"mid.attn0", FeatureKind::self_attention, BlockPosition::mid},
        {"up.res0", FeatureKind::residual, BlockPosition::up},
        {"up.attn0", FeatureKind::self_attention, BlockPosition::up},
        {"up.attn1", FeatureKind::self_attention, BlockPosition::up},
    };

    std::mt19937_64 rng(opts_.seed);
    const int d = opts_.d_model;
    const int token_dim = opts_.latent_channels * kPatch * kPatch;
    w_->embed = random_matrix(rng, d, token_dim, opts_.embed_norm);
    w_->time_proj = random_matrix(rng, d, d, 1.0);
    w_->residual.resize(catalog_.size());
    w_->attention.resize(catalog_.size());
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
        if (catalog_[i].kind == FeatureKind::residual) {
            w_->residual[i].w1 = random_matrix(rng, 2 * d, d, 1.0);
            w_->residual[i].w2 = random_matrix(rng, d, 2 * d, 0.5);
        } else {
            auto& a = w_->attention[i];
            a.wq = random_matrix(rng, d, d, opts_.qk_norm);
            a.wk = random_matrix(rng, d, d, opts_.qk_norm);
            a.wv = random_matrix(rng, d, d, 1.0);
            a.wo = random_matrix(rng, d, d, 0.5);
        }
    }
    w_->out = random_matrix(rng, token_dim, d, 1.0);
}

ToyDenoiser::~ToyDenoiser() = default;

double ToyDenoiser::prior_std(int) const { return opts_.prior_std; }

Tensor3 ToyDenoiser::predict(const Tensor3& z, const StepContext& ctx, AttentionCache& cache,
                             const TapConfig& tap) const {
    const int C = opts_.latent_channels;
    if (z.dim(0) != C) {
        throw ContractError("toy backend expects " + std::to_string(C) + " latent channels, got " +
                            std::to_string(z.dim(0)));
    }
    if (z.dim(1) % kPatch != 0 || z.dim(2) % kPatch != 0 || z.dim(1) == 0 || z.dim(2) == 0) {
        throw ContractError("latent " + shape_string(z) + " is not divisible by the toy patch size");
    }
    if (!(ctx.alpha_bar > 0.0 && ctx.alpha_bar <= 1.0)) throw ContractError("alpha_bar outside (0, 1]");
    const auto tapped = tapped_layers(tap);
    auto is_tapped = [&](const LayerInfo& l) {
        return cache.mode() != CacheMode::off &&
               std::any_of(tapped.begin(), tapped.end(), [&](const LayerInfo& t) { return t.id == l.id; });
    };

    const double ab = ctx.alpha_bar;
    std::vector<double> c_in(static_cast<std::size_t>(C)), k_prior(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
        const double s = prior_std(c);
        const double var = ab * s * s + (1.0 - ab);
        c_in[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(var);
        k_prior[static_cast<std::size_t>(c)] = std::sqrt(1.0 - ab) / var;
    }

    const int gh = z.dim(1) / kPatch, gw = z.dim(2) / kPatch;
    const int tokens = gh * gw;
    const int token_dim = C * kPatch * kPatch;
    const int d = opts_.d_model;
    const int heads = opts_.heads;
    const int hd = d / heads;

    std::vector<double> patches(static_cast<std::size_t>(tokens) * token_dim);
    for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px)
            for (int c = 0; c < C; ++c)
                for (int dy = 0; dy < kPatch; ++dy)
                    for (int dx = 0; dx < kPatch; ++dx)
                        patches[static_cast<std::size_t>(py * gw + px) * token_dim +
                                (c * kPatch + dy) * kPatch + dx] =
                            z(c, py * kPatch + dy, px * kPatch + dx) * c_in[static_cast<std::size_t>(c)];

    auto h = apply(w_->embed, patches, tokens);

    // timestep embedding, shared by all tokens
    std::vector<double> t_sin(static_cast<std::size_t>(d));
    for (int j = 0; j < d / 2; ++j) {
        const double freq = std::pow(10000.0, -2.0 * j / d);
        t_sin[static_cast<std::size_t>(2 * j)] = std::sin(ctx.model_timestep * freq);
        t_sin[static_cast<std::size_t>(2 * j + 1)] = std::cos(ctx.model_timestep * freq);
    }
    const auto t_emb = apply(w_->time_proj, t_sin, 1);
    const double base_freq = std::numbers::pi / (opts_.spatial / kPatch);
    for (int py = 0; py < gh; ++py) {
        for (int px = 0; px < gw; ++px) {
            double* x = h.data() + static_cast<std::size_t>(py * gw + px) * d;
            for (int j = 0; j < d / 4; ++j) {
                const double f = base_freq * std::pow(2.0, j % 4);
                x[4 * j + 0] += 0.5 * std::sin(py * f);
                x[4 * j + 1] += 0.5 * std::cos(py * f);
                x[4 * j + 2] += 0.5 * std::sin(px * f);
                x[4 * j + 3] += 0.5 * std::cos(px * f);
            }
            for (int i = 0; i < d; ++i) x[i] += t_emb[static_cast<std::size_t>(i)];
        }
    }

    std::vector<double> head_input(h.size(), 0.0);
    for (std::size_t li = 0; li < catalog_.size(); ++li) {
        const auto& layer = catalog_[li];
        const bool tap_here = is_tapped(layer);
        if (layer.kind == FeatureKind::residual) {
            const auto& rw = w_->residual[li];
            auto hidden = apply(rw.w1, h, tokens);
            for (auto& v : hidden) v = std::tanh(v);
            auto branch = apply(rw.w2, hidden, tokens);
            if (tap_here) {
                Tensor3 live(1, tokens, d);
                std::copy(branch.begin(), branch.end(), live.values().begin());
                if (cache.mode() == CacheMode::record) {
                    cache.record(layer.id, ctx.step, FeatureBundle{{}, {}, std::move(live)});
                } else {
                    const auto& cached = cache.fetch(layer.id, ctx.step);
                    require_bundle_shape(cached.v, live, layer.id);
                    std::copy(cached.v.values().begin(), cached.v.values().end(), branch.begin());
                }
            }
            for (std::size_t i = 0; i < h.size(); ++i) h[i] += branch[i];
        } else {
            const auto& aw = w_->attention[li];
            auto q = split_heads(apply(aw.wq, h, tokens), tokens, heads, hd);
            auto k = split_heads(apply(aw.wk, h, tokens), tokens, heads, hd);
            auto v = split_heads(apply(aw.wv, h, tokens), tokens, heads, hd);
            if (tap_here) {
                if (cache.mode() == CacheMode::record) {
                    cache.record(layer.id, ctx.step, FeatureBundle{q, k, v});
                } else {
                    const auto& cached = cache.fetch(layer.id, ctx.step);
                    if (!cached.has_qk()) {
                        throw ContractError("cached features for layer '" + layer.id + "' lack q/k");
                    }
                    require_bundle_shape(cached.k, k, layer.id);
                    require_bundle_shape(cached.v, v, layer.id);
                    if (tap.target == InjectionTarget::qkv) {
                        require_bundle_shape(cached.q, q, layer.id);
                        q = cached.q;
                    }
                    k = cached.k;
                    v = cached.v;
                }
            }
            const auto mixed = apply(aw.wo, attend(q, k, v), tokens);
            for (std::size_t i = 0; i < h.size(); ++i) h[i] += mixed[i];
            if (layer.position == BlockPosition::up) {
                for (std::size_t i = 0; i < h.size(); ++i) head_input[i] += mixed[i];
            }
        }
    }

    const auto proj = apply(w_->out, head_input, tokens);
    const double head_rate = opts_.head_slope / opts_.head_amplitude;
    Tensor3 eps(C, z.dim(1), z.dim(2));
    for (int py = 0; py < gh; ++py)
        for (int px = 0; px < gw; ++px)
            for (int c = 0; c < C; ++c)
                for (int dy = 0; dy < kPatch; ++dy)
                    for (int dx = 0; dx < kPatch; ++dx) {
                        const int y = py * kPatch + dy, x = px * kPatch + dx;
                        const double nn = proj[static_cast<std::size_t>(py * gw + px) * token_dim +
                                               (c * kPatch + dy) * kPatch + dx];
                        eps(c, y, x) = k_prior[static_cast<std::size_t>(c)] * z(c, y, x) +
                                      opts_.head_amplitude * std::sin(head_rate * nn);
                    }
    return eps;
}

std::shared_ptr<const Denoiser> build_toy_backend(std::uint64_t seed, int latent_channels, int spatial) {
    ToyDenoiser::Options opts;
    opts.seed = seed;
    opts.latent_channels = latent_channels;
    opts.spatial = spatial;
    return std::make_shared<ToyDenoiser>(opts);
}

}  // namespace relight
