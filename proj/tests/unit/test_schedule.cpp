// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "relight/schedule.hpp"

using namespace relight;

namespace {

Tensor3 random_tensor(std::mt19937_64& rng, int c, int h, int w) {
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor3 t(c, h, w);
    for (double& v : t.values()) v = n(rng);
    return t;
}

double rel_diff(const Tensor3& a, const Tensor3& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
        den += b.values()[i] * b.values()[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("subsampled timestep map") {
    const auto s = build_schedule(ScheduleKind::external_subsampled, 25);
    const std::vector<int> expected = {0,   40,  80,  120, 160, 200, 240, 280, 320, 360, 400, 440, 480,
                                       519, 559, 599, 639, 679, 719, 759, 799, 839, 879, 919, 959, 999};
    REQUIRE(s.timestep_map().size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(s.timestep_map()[i] == expected[i]);

    const auto lin = build_schedule(ScheduleKind::linear_beta, 25);
    for (int t = 0; t <= 25; ++t) CHECK(lin.model_timestep(t) == t);
}

TEST_CASE("linear-beta alpha_bar values") {
    const auto s = build_schedule(ScheduleKind::linear_beta, 25);
    CHECK(s.steps() == 25);
    CHECK(s.alpha_bar(0) == doctest::Approx(0.99990000000000001).epsilon(1e-14));
    CHECK(s.alpha_bar(1) == doctest::Approx(0.97976692404827026).epsilon(1e-12));
    CHECK(s.alpha_bar(25) == doctest::Approx(4.0358297653756761e-05).epsilon(1e-10));
}

TEST_CASE("every kind is strictly decreasing from ~1 to below 0.1") {
    for (auto kind : {ScheduleKind::linear_beta, ScheduleKind::cosine, ScheduleKind::external_subsampled}) {
        for (int T : {1, 10, 25, 50, 999}) {
            const auto s = build_schedule(kind, T);
            CHECK(s.alpha_bar(0) > 0.99);
            CHECK(s.alpha_bar(T) < 0.1);
            for (int t = 1; t <= T; ++t) CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
        }
    }
}

TEST_CASE("schedule construction errors") {
    CHECK_THROWS_AS(build_schedule(ScheduleKind::linear_beta, 0), ConfigError);
    CHECK_THROWS_AS(build_schedule(ScheduleKind::linear_beta, 1000), ConfigError);
    CHECK_THROWS_AS(parse_schedule_kind("karras"), ConfigError);
    CHECK_THROWS_AS(NoiseSchedule(ScheduleKind::linear_beta, {0.999, 0.5, 0.6, 0.05}, {0, 1, 2, 3}), ConfigError);
    CHECK_THROWS_AS(NoiseSchedule(ScheduleKind::linear_beta, {0.999, 0.5}, {0, 1}), ConfigError);
    CHECK(parse_schedule_kind("cosine") == ScheduleKind::cosine);
}

TEST_CASE("scalar sample step matches the hand oracle") {
    const NoiseSchedule s(ScheduleKind::external_subsampled, {0.995, 0.9, 0.5, 0.05}, {0, 1, 2, 3});
    const Tensor3 z(1, 1, 1, 1.0);
    const Tensor3 eps(1, 1, 1, 1.0);
    const auto prev = ddim_sample_step(z, 2, eps, s);
    CHECK(prev(0, 0, 0) == doctest::Approx(0.70918525446619818).epsilon(1e-14));
}

TEST_CASE("invert then sample is the identity for a fixed eps") {
    std::mt19937_64 rng(11);
    const auto s = build_schedule(ScheduleKind::cosine, 25);
    std::uniform_int_distribution<int> pick(0, 24);
    for (int k = 0; k < 200; ++k) {
        const int t = pick(rng);
        const auto z = random_tensor(rng, 3, 4, 4);
        const auto eps = random_tensor(rng, 3, 4, 4);
        const auto back = ddim_sample_step(ddim_invert_step(z, t, eps, s), t + 1, eps, s);
        CHECK(rel_diff(back, z) <= 1e-12);
    }
}

TEST_CASE("step range errors") {
    const auto s = build_schedule(ScheduleKind::linear_beta, 5);
    const Tensor3 z(1, 2, 2);
    CHECK_THROWS_AS(ddim_sample_step(z, 0, z, s), StepRangeError);
    CHECK_THROWS_AS(ddim_invert_step(z, 5, z, s), StepRangeError);
    CHECK_THROWS_AS(ddim_sample_step(z, 1, Tensor3(1, 2, 3), s), ContractError);
}

TEST_CASE("schedule text round trip") {
    const auto s = build_schedule(ScheduleKind::linear_beta, 25);
    std::stringstream ss;
    write_schedule(ss, s);
    const auto r = read_schedule(ss);
    REQUIRE(r.steps() == 25);
    for (int t = 0; t <= 25; ++t) CHECK(r.alpha_bar(t) == s.alpha_bar(t));

    std::stringstream bad("0 0.999\n2 0.05\n");
    CHECK_THROWS(read_schedule(bad));
}
