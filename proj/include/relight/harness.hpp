// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "relight/codec.hpp"
#include "relight/config.hpp"
#include "relight/dataset.hpp"
#include "relight/denoiser.hpp"
#include "relight/report.hpp"
#include "relight/schedule.hpp"

namespace relight {

/// Codec, backend and schedule built from a RunConfig.
struct Runtime {
    std::shared_ptr<const LatentCodec> codec;
    std::shared_ptr<const Denoiser> backend;
    std::shared_ptr<const NoiseSchedule> sched;

    Engine engine() const { return Engine{*codec, *backend, *sched}; }
};

/// Toy codec and backend; `external` raises ConfigError (no external
/// backend is linked into this build).
Runtime make_runtime(const RunConfig& cfg);

/// final, no-sa, res, sa-sampling, sd-decoder, avg-input, avg-60.
const std::vector<std::string>& variant_names();

/// Applies the overrides of a named variant. Throws ConfigError for unknown names.
PipelineConfig apply_variant(PipelineConfig cfg, const std::string& variant);

/// Replaces every character outside [A-Za-z0-9._-] with '_' and leading dots too.
std::string sanitize_id(const std::string& id);

using Logger = std::function<void(const std::string&)>;

/// Writes to stderr.
Logger stderr_logger();

struct EvalOutcome {
    MetricReport report;
    std::size_t degenerate = 0;  ///< failures caused by DegenerateInputError
    std::size_t failed = 0;      ///< all failures, degenerate included

    /// 0 on success, 2 if every failure was a degenerate input, 1 otherwise.
    int exit_code() const;
};

/// Enhances every record (per-image seed = cfg seed + record index) and
/// writes `<out>/images/<id>.png` and `<out>/report.csv`; paired manifests
/// also get psnr and ssim against ground truth. Per-image failures are
/// logged, listed in `<out>/failures.csv` and do not stop the run.
EvalOutcome run_eval(const DatasetManifest& manifest, const RunConfig& cfg, const std::string& variant,
                     const std::filesystem::path& out, const Logger& log = stderr_logger());

struct AwbScores {
    double delta_e76 = 0.0;
    double angular_mae_deg = 0.0;
    std::size_t mae_excluded = 0;
    double mse = 0.0;
    double mask_coverage = 1.0;
};

/// Delta E 76 (unit-scale sRGB into Lab), angular error and 0-255 MSE over kept pixels.
AwbScores awb_scores(const ImageBuffer& result, const ImageBuffer& gt, const Mask& mask);

/// AWB protocol: enhance each input, score against ground truth with the
/// record's mask. Same outputs and failure handling as run_eval.
EvalOutcome run_awb_eval(const DatasetManifest& manifest, const RunConfig& cfg, const std::filesystem::path& out,
                         const Logger& log = stderr_logger());

struct AblationRow {
    std::string variant;
    EvalOutcome outcome;
};

/// One paired evaluation per variant under `<out>/<variant>/`, plus
/// `<out>/ablation.csv` with columns variant,psnr,ssim,lpips (lpips is
/// always `out-of-scope`).
std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, const RunConfig& cfg,
                                      const std::vector<std::string>& variants, const std::filesystem::path& out,
                                      const Logger& log = stderr_logger());

struct ChannelAlignmentResult {
    std::vector<std::string> modes;
    /// hist[mode][rgb][bin]: output pixel counts summed over the corpus.
    std::vector<std::array<std::array<std::size_t, 256>, 3>> hist;
    /// means[mode][rgb]: mean output value over the corpus.
    std::vector<std::array<double, 3>> means;
    std::size_t pixels = 0;

    /// Largest difference between two channel means of `mode`.
    double max_gap(const std::string& mode) const;
};

/// Modes for a backend with `channels` latent channels: ch0..ch{C-1}, full, none.
std::vector<std::string> alignment_modes(int channels);

/// AdaIN channel selection for a mode. Throws ConfigError for ch{k} with k >= channels.
std::optional<std::vector<int>> alignment_channels(const std::string& mode, int channels);

/// Runs the pipeline once per mode with AdaIN limited to the mode's channels
/// and accumulates quantized output histograms. Writes `histograms.csv`
/// (mode,channel,bin,count) and `channel_means.csv` when `out` is non-empty.
ChannelAlignmentResult run_channel_alignment(const DatasetManifest& manifest, const RunConfig& cfg,
                                             const std::vector<std::string>& modes,
                                             const std::filesystem::path& out, const Logger& log = stderr_logger());

/// In-memory variant used by the acceptance suite.
ChannelAlignmentResult channel_alignment(const std::vector<ImageBuffer>& images, const RunConfig& cfg,
                                         const std::vector<std::string>& modes);

}  // namespace relight
