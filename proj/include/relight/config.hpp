// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "relight/pipeline.hpp"
#include "relight/schedule.hpp"

namespace relight {

/// Everything a run needs beyond the images: pipeline knobs plus the
/// backend, schedule and worker settings.
struct RunConfig {
    PipelineConfig pipeline;
    ScheduleKind schedule = ScheduleKind::linear_beta;
    std::string backend = "toy";
    std::uint64_t backend_seed = 0;
    int workers = 0;  ///< 0: hardware concurrency
};

/// Parses flat `key = value` text. Blank lines and lines starting with '#'
/// are ignored; unknown keys and malformed values raise ConfigError naming
/// the line. Keys:
///
///   intensity_threshold, steps, seed, adain (true|false),
///   adain_channels (all | none | comma list), injection (true|false),
///   tap.feature_kind (self-attention|residual), tap.blocks (comma list of
///   down|mid|up), tap.layers (comma list | all), tap.target (qkv|kv),
///   feature_source (inversion|sampling), feature_input (preprocessed|raw|custom),
///   feature_threshold, decoder (standard|high-fidelity),
///   schedule (linear-beta|cosine|external-subsampled), backend (toy|external),
///   backend_seed, workers
RunConfig parse_config(std::istream& is, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Inverse of parse_config; parse_config(write_config(c)) == c.
void write_config(std::ostream& os, const RunConfig& cfg);

}  // namespace relight
