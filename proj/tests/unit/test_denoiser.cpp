// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "relight/linear_denoiser.hpp"
#include "relight/toy_denoiser.hpp"
#include "toy_corpus.hpp"

using namespace relight;

namespace {

Tensor3 random_latent(std::uint64_t seed, int side = 8) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor3 z(12, side, side);
    for (double& v : z.values()) v = n(rng);
    return z;
}

FeatureBundle bundle(double fill) { return {Tensor3(1, 2, 2, fill), Tensor3(1, 2, 2, fill), Tensor3(1, 2, 2, fill)}; }

}  // namespace

TEST_CASE("cache modes") {
    AttentionCache c(CacheMode::record);
    c.record("up.attn0", 3, bundle(1.0));
    CHECK(c.size() == 1);
    CHECK_THROWS_AS(c.record("up.attn0", 3, bundle(2.0)), ContractError);
    c.set_mode(CacheMode::replay);
    CHECK_THROWS_AS(c.record("up.attn0", 4, bundle(2.0)), ContractError);
    CHECK(c.fetch("up.attn0", 3).v(0, 1, 1) == 1.0);
    try {
        c.fetch("up.attn1", 7);
        FAIL("expected a cache miss");
    } catch (const CacheMissError& e) {
        CHECK(e.layer() == "up.attn1");
        CHECK(e.timestep() == 7);
        CHECK(std::string(e.what()).find("t=7") != std::string::npos);
    }
}

TEST_CASE("cache spill and load") {
    AttentionCache c(CacheMode::record);
    c.record("up.attn0", 1, bundle(0.25));
    c.record("up.res0", 2, FeatureBundle{{}, {}, Tensor3(1, 3, 4, -1.5)});
    const auto dir = testing::scratch_dir("cache-spill");
    c.spill(dir);
    const auto back = AttentionCache::load(dir);
    CHECK(back.mode() == CacheMode::replay);
    CHECK(back == c);
    CHECK_FALSE(back.fetch("up.res0", 2).has_qk());
}

TEST_CASE("toy backend catalog and taps") {
    const ToyDenoiser toy({});
    REQUIRE(toy.layer_catalog().size() == 5);
    TapConfig tap;
    auto layers = toy.tapped_layers(tap);
    REQUIRE(layers.size() == 2);
    CHECK(layers[0].id == "up.attn0");
    CHECK(layers[1].id == "up.attn1");

    tap.feature_kind = FeatureKind::residual;
    layers = toy.tapped_layers(tap);
    REQUIRE(layers.size() == 1);
    CHECK(layers[0].id == "up.res0");

    tap = TapConfig{};
    tap.block_scope = {BlockPosition::mid, BlockPosition::up};
    CHECK(toy.tapped_layers(tap).size() == 3);

    tap.layer_filter = std::set<std::string>{"up.attn9"};
    CHECK_THROWS_AS(toy.tapped_layers(tap), ConfigError);
}

TEST_CASE("toy backend is deterministic and seed dependent") {
    const ToyDenoiser a({});
    const ToyDenoiser b({});
    ToyDenoiser::Options o;
    o.seed = 5;
    const ToyDenoiser c(o);
    const auto z = random_latent(1);
    const StepContext ctx{10, 10, 0.3};
    AttentionCache off;
    const TapConfig tap;
    CHECK(a.predict(z, ctx, off, tap) == b.predict(z, ctx, off, tap));
    CHECK_FALSE(a.predict(z, ctx, off, tap) == c.predict(z, ctx, off, tap));
}

TEST_CASE("replaying features recorded at the same input reproduces the prediction") {
    const ToyDenoiser toy({});
    const auto z = random_latent(2);
    const StepContext ctx{4, 4, 0.7};
    for (auto kind : {FeatureKind::self_attention, FeatureKind::residual}) {
        TapConfig tap;
        tap.feature_kind = kind;
        AttentionCache cache(CacheMode::record);
        const auto recorded = toy.predict(z, ctx, cache, tap);
        CHECK(cache.size() == toy.tapped_layers(tap).size());
        cache.set_mode(CacheMode::replay);
        CHECK(toy.predict(z, ctx, cache, tap) == recorded);
    }
}

TEST_CASE("replay changes the prediction at a different input") {
    const ToyDenoiser toy({});
    const auto z = random_latent(3);
    const auto other = random_latent(4);
    const StepContext ctx{4, 4, 0.7};
    const TapConfig tap;
    AttentionCache cache(CacheMode::record);
    toy.predict(z, ctx, cache, tap);
    cache.set_mode(CacheMode::replay);
    AttentionCache off;
    CHECK_FALSE(toy.predict(other, ctx, cache, tap) == toy.predict(other, ctx, off, tap));

    TapConfig kv = tap;
    kv.target = InjectionTarget::kv;
    CHECK_FALSE(toy.predict(other, ctx, cache, kv) == toy.predict(other, ctx, cache, tap));

    AttentionCache wrong(CacheMode::replay);
    CHECK_THROWS_AS(toy.predict(other, StepContext{5, 5, 0.6}, wrong, tap), CacheMissError);
}

TEST_CASE("replayed shapes must match") {
    const ToyDenoiser toy({});
    const StepContext ctx{1, 1, 0.9};
    const TapConfig tap;
    AttentionCache cache(CacheMode::record);
    toy.predict(random_latent(5, 8), ctx, cache, tap);
    cache.set_mode(CacheMode::replay);
    CHECK_THROWS_AS(toy.predict(random_latent(5, 12), ctx, cache, tap), ContractError);
}

TEST_CASE("toy backend input checks") {
    const ToyDenoiser toy({});
    AttentionCache off;
    CHECK_THROWS_AS(toy.predict(Tensor3(4, 8, 8), StepContext{1, 1, 0.9}, off, {}), ContractError);
    CHECK_THROWS_AS(toy.predict(Tensor3(12, 7, 8), StepContext{1, 1, 0.9}, off, {}), ContractError);
    ToyDenoiser::Options o;
    o.d_model = 30;
    CHECK_THROWS_AS(ToyDenoiser{o}, ConfigError);
}

TEST_CASE("linear backend") {
    const LinearDenoiser lin({0.5, 2.0});
    AttentionCache off;
    const Tensor3 z(12, 2, 2, 3.0);
    CHECK(lin.predict(z, StepContext{2, 2, 0.5}, off, {})(0, 0, 0) == 6.0);
    CHECK_THROWS_AS(lin.predict(z, StepContext{3, 3, 0.5}, off, {}), StepRangeError);
    CHECK(lin.tapped_layers({}).empty());
}
