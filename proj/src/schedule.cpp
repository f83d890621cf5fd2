// SPDX-License-Identifier: Apache-2.0
#include "relight/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace relight {

namespace {

std::vector<double> cumulative_product(const std::vector<double>& betas) {
    std::vector<double> out(betas.size());
    double acc = 1.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        acc *= 1.0 - betas[i];
        out[i] = acc;
    }
    return out;
}

std::vector<double> linear_betas(double start, double end, int n) {
    std::vector<double> betas(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        betas[static_cast<std::size_t>(i)] = start + (end - start) * i / (n - 1);
    }
    return betas;
}

std::vector<double> base_table(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::linear_beta:
            return cumulative_product(linear_betas(1e-4, 2e-2, kBaseTimesteps));
        case ScheduleKind::cosine: {
            constexpr double s = 0.008;
            auto curve = [](double u) {
                const double c = std::cos((u + s) / (1.0 + s) * std::numbers::pi / 2.0);
                return c * c;
            };
            std::vector<double> betas(kBaseTimesteps);
            for (int i = 0; i < kBaseTimesteps; ++i) {
                const double a0 = curve(static_cast<double>(i) / kBaseTimesteps);
                const double a1 = curve(static_cast<double>(i + 1) / kBaseTimesteps);
                betas[static_cast<std::size_t>(i)] = std::min(1.0 - a1 / a0, 0.999);
            }
            return cumulative_product(betas);
        }
        case ScheduleKind::external_subsampled: {
            auto betas = linear_betas(std::sqrt(0.00085), std::sqrt(0.012), kBaseTimesteps);
            for (auto& b : betas) b *= b;
            return cumulative_product(betas);
        }
    }
    throw ConfigError("unknown schedule kind");
}

void check_steps(int steps, std::size_t base) {
    if (steps < 1) throw ConfigError("schedule needs at least one step, got " + std::to_string(steps));
    if (static_cast<std::size_t>(steps) >= base) {
        throw ConfigError("schedule steps " + std::to_string(steps) +
                          " must be below the base table length " + std::to_string(base));
    }
}

NoiseSchedule subsample(ScheduleKind kind, std::span<const double> table, int steps, bool identity_map) {
    check_steps(steps, table.size());
    std::vector<double> alpha_bar;
    std::vector<int> map;
    for (int i = 0; i <= steps; ++i) {
        const int k = subsample_index(i, steps, static_cast<int>(table.size()));
        alpha_bar.push_back(table[static_cast<std::size_t>(k)]);
        map.push_back(identity_map ? i : k);
    }
    return NoiseSchedule(kind, std::move(alpha_bar), std::move(map));
}

}  // namespace

ScheduleKind parse_schedule_kind(std::string_view name) {
    if (name == "linear-beta") return ScheduleKind::linear_beta;
    if (name == "cosine") return ScheduleKind::cosine;
    if (name == "external-subsampled") return ScheduleKind::external_subsampled;
    throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::linear_beta: return "linear-beta";
        case ScheduleKind::cosine: return "cosine";
        case ScheduleKind::external_subsampled: return "external-subsampled";
    }
    return "?";
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> alpha_bar, std::vector<int> timestep_map)
    : kind_(kind), alpha_bar_(std::move(alpha_bar)), timestep_map_(std::move(timestep_map)) {
    if (alpha_bar_.size() < 2) throw ConfigError("schedule needs at least two alpha_bar entries");
    if (timestep_map_.size() != alpha_bar_.size()) throw ConfigError("timestep_map length mismatch");
    for (std::size_t i = 0; i < alpha_bar_.size(); ++i) {
        const double a = alpha_bar_[i];
        if (!std::isfinite(a) || a <= 0.0 || a > 1.0) {
            throw ConfigError("alpha_bar[" + std::to_string(i) + "] outside (0, 1]");
        }
        if (i > 0 && !(a < alpha_bar_[i - 1])) {
            throw ConfigError("alpha_bar must be strictly decreasing (index " + std::to_string(i) + ")");
        }
    }
    if (!(alpha_bar_.front() > 0.99)) throw ConfigError("alpha_bar[0] must exceed 0.99");
    if (!(alpha_bar_.back() < 0.1)) throw ConfigError("alpha_bar[T] must be below 0.1");
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > steps()) throw StepRangeError("timestep " + std::to_string(t) + " outside schedule");
    return alpha_bar_[static_cast<std::size_t>(t)];
}

int NoiseSchedule::model_timestep(int t) const {
    if (t < 0 || t > steps()) throw StepRangeError("timestep " + std::to_string(t) + " outside schedule");
    return timestep_map_[static_cast<std::size_t>(t)];
}

int subsample_index(int i, int steps, int base) {
    const double target = static_cast<double>(i) * (base - 1) / steps;
    return static_cast<int>(std::floor(target + 0.5));
}

NoiseSchedule build_schedule(ScheduleKind kind, int steps) {
    const auto table = base_table(kind);
    return subsample(kind, table, steps, kind != ScheduleKind::external_subsampled);
}

NoiseSchedule build_schedule_from_table(std::span<const double> trained_alpha_bar, int steps) {
    return subsample(ScheduleKind::external_subsampled, trained_alpha_bar, steps, false);
}

double ddim_eps_coefficient(double from, double to) {
    return (std::sqrt(1.0 / to - 1.0) - std::sqrt(1.0 / from - 1.0)) * std::sqrt(to);
}

namespace {

Tensor3 ddim_move(const Tensor3& z, const Tensor3& eps, double from, double to) {
    require_same_shape(z, eps, "ddim step");
    const double scale = std::sqrt(to / from);
    const double coef = ddim_eps_coefficient(from, to);
    Tensor3 out(z.dim(0), z.dim(1), z.dim(2));
    auto zv = z.values();
    auto ev = eps.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = scale * zv[i] + coef * ev[i];
    return out;
}

}  // namespace

Tensor3 ddim_sample_step(const Tensor3& z, int t, const Tensor3& eps, const NoiseSchedule& sched) {
    if (t < 1 || t > sched.steps()) {
        throw StepRangeError("ddim_sample_step: cannot step below t=" + std::to_string(t));
    }
    return ddim_move(z, eps, sched.alpha_bar(t), sched.alpha_bar(t - 1));
}

Tensor3 ddim_invert_step(const Tensor3& z, int t, const Tensor3& eps, const NoiseSchedule& sched) {
    if (t < 0 || t >= sched.steps()) {
        throw StepRangeError("ddim_invert_step: cannot step above t=" + std::to_string(t));
    }
    return ddim_move(z, eps, sched.alpha_bar(t), sched.alpha_bar(t + 1));
}

void write_schedule(std::ostream& os, const NoiseSchedule& sched) {
    char buf[64];
    for (int t = 0; t <= sched.steps(); ++t) {
        std::snprintf(buf, sizeof buf, "%d %.17g\n", t, sched.alpha_bar(t));
        os << buf;
    }
}

NoiseSchedule read_schedule(std::istream& is) {
    std::vector<double> alpha_bar;
    std::string line;
    int expected = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int t = -1;
        double a = 0.0;
        if (!(ls >> t >> a)) throw IoError("malformed schedule line: '" + line + "'");
        if (t != expected) throw IoError("schedule lines must list t = 0, 1, 2, ... in order");
        alpha_bar.push_back(a);
        ++expected;
    }
    std::vector<int> map(alpha_bar.size());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<int>(i);
    return NoiseSchedule(ScheduleKind::external_subsampled, std::move(alpha_bar), std::move(map));
}

}  // namespace relight
