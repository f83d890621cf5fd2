// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relight/tensor.hpp"

namespace relight {

enum class ScheduleKind { linear_beta, cosine, external_subsampled };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind);

/// Number of timesteps of the base (training-time) schedules we subsample from.
inline constexpr int kBaseTimesteps = 1000;

/// Cumulative signal rates alpha_bar[0..T] driving deterministic DDIM.
///
/// alpha_bar is strictly decreasing, alpha_bar[0] is near 1 and alpha_bar[T]
/// below 0.1. timestep_map[i] is the model timestep that pipeline step i
/// corresponds to (the identity for backends that take pipeline steps).
/// Immutable after construction.
class NoiseSchedule {
public:
    NoiseSchedule(ScheduleKind kind, std::vector<double> alpha_bar, std::vector<int> timestep_map);

    ScheduleKind kind() const { return kind_; }
    int steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
    double alpha_bar(int t) const;
    int model_timestep(int t) const;
    std::span<const double> alpha_bars() const { return alpha_bar_; }
    std::span<const int> timestep_map() const { return timestep_map_; }

private:
    ScheduleKind kind_;
    std::vector<double> alpha_bar_;
    std::vector<int> timestep_map_;
};

/// Builds a T-step schedule by subsampling a 1000-step base schedule at
/// evenly spaced indices round(i * 999 / T).
///
/// linear-beta: beta linear in [1e-4, 2e-2]. cosine: the squared-cosine
/// alpha_bar curve with offset 0.008, betas clipped at 0.999.
/// external-subsampled: the scaled-linear table latent-diffusion checkpoints
/// ship with (beta from 0.00085 to 0.012 in sqrt space); its timestep_map
/// records the subsampled model timesteps. The first two kinds report an
/// identity timestep_map.
NoiseSchedule build_schedule(ScheduleKind kind, int steps);

/// external-subsampled over a caller-provided trained alpha_bar table.
NoiseSchedule build_schedule_from_table(std::span<const double> trained_alpha_bar, int steps);

/// Base-table index chosen for pipeline step i of a T-step schedule.
int subsample_index(int i, int steps, int base = kBaseTimesteps);

/// z_{t-1} from z_t (eta = 0). Throws StepRangeError at t = 0.
Tensor3 ddim_sample_step(const Tensor3& z, int t, const Tensor3& eps, const NoiseSchedule& sched);

/// z_{t+1} from z_t: the exact algebraic inverse of ddim_sample_step for a
/// fixed eps. Throws StepRangeError at t = T.
Tensor3 ddim_invert_step(const Tensor3& z, int t, const Tensor3& eps, const NoiseSchedule& sched);

/// Coefficient multiplying eps in the step from alpha_bar `from` to `to`:
/// (sqrt(1/to - 1) - sqrt(1/from - 1)) * sqrt(to). Both step directions use it.
double ddim_eps_coefficient(double from, double to);

/// Plain-text table, one `t alpha_bar` line per step with 17 significant digits.
void write_schedule(std::ostream& os, const NoiseSchedule& sched);
NoiseSchedule read_schedule(std::istream& is);

}  // namespace relight
