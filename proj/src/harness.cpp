// SPDX-License-Identifier: Apache-2.0
#include "relight/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "relight/metrics.hpp"
#include "relight/pipeline.hpp"
#include "relight/toy_denoiser.hpp"

namespace relight {

namespace fs = std::filesystem;

namespace {

constexpr int kToySpatial = 16;

int worker_count(int requested, std::size_t jobs) {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

/// Runs fn(i) for i in [0, n) on a bounded pool; exceptions must be handled inside fn.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const int w = worker_count(workers, n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int k = 0; k < w; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

struct ImageResult {
    bool ok = false;
    bool degenerate = false;
    std::string error;
    std::vector<std::pair<std::string, double>> metrics;
};

std::vector<std::string> output_ids(const DatasetManifest& m) {
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& r : m.records) {
        auto id = sanitize_id(r.id);
        if (!seen.insert(id).second) throw DatasetError("record ids collide after sanitizing: '" + id + "'");
        ids.push_back(std::move(id));
    }
    return ids;
}

void write_failures(const fs::path& path, const MetricReport& report) {
    if (report.failures().empty()) {
        fs::remove(path);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << "image,error\n";
    for (const auto& f : report.failures()) {
        std::string msg = f.message;
        std::replace_if(msg.begin(), msg.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ' ');
        os << f.image << ',' << msg << '\n';
    }
}

/// Shared driver for paired, unpaired and AWB runs.
EvalOutcome evaluate(const DatasetManifest& manifest, const RunConfig& cfg, const PipelineConfig& pcfg,
                     const fs::path& out, const Logger& log, bool awb) {
    if (manifest.records.empty()) throw DatasetError("manifest has no records");
    const auto ids = output_ids(manifest);
    const Runtime rt = make_runtime(cfg);
    const Engine engine = rt.engine();
    const fs::path image_dir = out / "images";
    fs::create_directories(image_dir);
    {
        std::ofstream os(out / "config.txt", std::ios::binary);
        RunConfig effective = cfg;
        effective.pipeline = pcfg;
        write_config(os, effective);
    }

    std::vector<ImageResult> results(manifest.records.size());
    std::mutex log_mutex;
    parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
        const auto& rec = manifest.records[i];
        auto& res = results[i];
        try {
            PipelineConfig per_image = pcfg;
            per_image.seed = pcfg.seed + i;
            if (awb) {
                const auto sample = load_awb_record(rec);
                const auto output = quantize(enhance(sample.input, per_image, engine));
                save_png(image_dir / (ids[i] + ".png"), output);
                const auto s = awb_scores(output, sample.gt, sample.mask);
                res.metrics = {{"delta_e76", s.delta_e76},
                               {"angular_mae_deg", s.angular_mae_deg},
                               {"mae_excluded_px", static_cast<double>(s.mae_excluded)},
                               {"mse", s.mse},
                               {"mask_coverage", s.mask_coverage}};
                std::lock_guard lock(log_mutex);
                log(rec.id + ": mask coverage " + format_value(s.mask_coverage) +
                    (sample.explicit_mask ? " (mask file)" : " (black-box detection)"));
            } else {
                const auto input = load_image(rec.input);
                const auto output = quantize(enhance(input, per_image, engine));
                save_png(image_dir / (ids[i] + ".png"), output);
                if (rec.gt) {
                    const auto gt = load_image(*rec.gt);
                    res.metrics = {{"psnr", psnr(output, gt)}, {"ssim", ssim(output, gt)}};
                }
            }
            res.ok = true;
        } catch (const DegenerateInputError& e) {
            res.degenerate = true;
            res.error = e.what();
        } catch (const std::exception& e) {
            res.error = e.what();
        }
        if (!res.ok) {
            std::lock_guard lock(log_mutex);
            log(rec.id + ": " + res.error);
        }
    });

    EvalOutcome outcome;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        if (!res.ok) {
            outcome.report.add_failure(ids[i], res.error);
            ++outcome.failed;
            if (res.degenerate) ++outcome.degenerate;
            continue;
        }
        for (const auto& [name, value] : res.metrics) outcome.report.add(ids[i], name, value);
    }
    outcome.report.write_csv(out / "report.csv");
    write_failures(out / "failures.csv", outcome.report);
    return outcome;
}

void accumulate(ChannelAlignmentResult& r, std::size_t mode, const ImageBuffer& img) {
    const auto v = img.values();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const double x = v[3 * i + c];
            ++r.hist[mode][c][static_cast<std::size_t>(x)];
            r.means[mode][c] += x;
        }
    }
}

}  // namespace

Runtime make_runtime(const RunConfig& cfg) {
    if (cfg.backend == "external") {
        throw ConfigError("the external backend is not linked into this build; use --backend toy");
    }
    if (cfg.backend != "toy") throw ConfigError("unknown backend '" + cfg.backend + "'");
    cfg.pipeline.validate();
    Runtime rt;
    rt.codec = std::make_shared<ToyCodec>();
    rt.backend = build_toy_backend(cfg.backend_seed, rt.codec->latent_channels(), kToySpatial);
    rt.sched = std::make_shared<NoiseSchedule>(build_schedule(cfg.schedule, cfg.pipeline.steps));
    return rt;
}

const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names = {"final",      "no-sa",     "res",   "sa-sampling",
                                                   "sd-decoder", "avg-input", "avg-60"};
    return names;
}

PipelineConfig apply_variant(PipelineConfig cfg, const std::string& variant) {
    if (variant == "final") {
    } else if (variant == "no-sa") {
        cfg.injection = false;
    } else if (variant == "res") {
        cfg.tap.feature_kind = FeatureKind::residual;
    } else if (variant == "sa-sampling") {
        cfg.feature_source = FeatureSource::sampling;
    } else if (variant == "sd-decoder") {
        cfg.decoder = DecoderVariant::standard;
    } else if (variant == "avg-input") {
        cfg.feature_input = FeatureInput::raw;
    } else if (variant == "avg-60") {
        cfg.feature_input = FeatureInput::custom;
        cfg.feature_threshold = 60.0;
    } else {
        std::string known;
        for (const auto& n : variant_names()) known += (known.empty() ? "" : "|") + n;
        throw ConfigError("unknown variant '" + variant + "' (" + known + ")");
    }
    return cfg;
}

std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '_' || c == '-';
        if (!ok) c = '_';
    }
    for (char& c : out) {
        if (c != '.') break;
        c = '_';
    }
    return out.empty() ? std::string("_") : out;
}

Logger stderr_logger() {
    return [](const std::string& msg) { std::cerr << "relight: " << msg << '\n'; };
}

int EvalOutcome::exit_code() const {
    if (failed == 0) return 0;
    return degenerate == failed ? 2 : 1;
}

EvalOutcome run_eval(const DatasetManifest& manifest, const RunConfig& cfg, const std::string& variant,
                     const fs::path& out, const Logger& log) {
    const auto pcfg = apply_variant(cfg.pipeline, variant);
    return evaluate(manifest, cfg, pcfg, out, log, false);
}

AwbScores awb_scores(const ImageBuffer& result, const ImageBuffer& gt, const Mask& mask) {
    AwbScores s;
    s.delta_e76 = delta_e76(result, gt, &mask);
    const auto ang = angular_mae(result, gt, &mask);
    s.angular_mae_deg = ang.degrees;
    s.mae_excluded = ang.excluded;
    s.mse = mse(result, gt, &mask);
    s.mask_coverage = mask.coverage();
    return s;
}

EvalOutcome run_awb_eval(const DatasetManifest& manifest, const RunConfig& cfg, const fs::path& out,
                         const Logger& log) {
    for (const auto& r : manifest.records) {
        if (!r.gt) throw DatasetError("AWB evaluation needs ground truth for '" + r.id + "'");
    }
    return evaluate(manifest, cfg, cfg.pipeline, out, log, true);
}

std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, const RunConfig& cfg,
                                      const std::vector<std::string>& variants, const fs::path& out,
                                      const Logger& log) {
    if (variants.empty()) throw ConfigError("ablation needs at least one variant");
    for (const auto& v : variants) apply_variant(cfg.pipeline, v);
    if (manifest.kind == DatasetKind::unpaired) throw DatasetError("ablation needs a paired manifest");
    std::vector<AblationRow> rows;
    for (const auto& v : variants) {
        log("ablation variant " + v);
        rows.push_back({v, run_eval(manifest, cfg, v, out / v, log)});
    }
    std::ofstream os(out / "ablation.csv", std::ios::binary);
    if (!os) throw IoError("cannot write " + (out / "ablation.csv").string());
    os << "variant,psnr,ssim,lpips\n";
    for (const auto& r : rows) {
        const auto& rep = r.outcome.report;
        const auto cell = [&](const char* m) { return rep.empty() ? std::string() : format_value(rep.mean(m)); };
        os << r.variant << ',' << cell("psnr") << ',' << cell("ssim") << ",out-of-scope\n";
    }
    return rows;
}

double ChannelAlignmentResult::max_gap(const std::string& mode) const {
    const auto it = std::find(modes.begin(), modes.end(), mode);
    if (it == modes.end()) throw ContractError("no channel-alignment mode '" + mode + "'");
    const auto& m = means[static_cast<std::size_t>(it - modes.begin())];
    return std::max({std::abs(m[0] - m[1]), std::abs(m[0] - m[2]), std::abs(m[1] - m[2])});
}

std::vector<std::string> alignment_modes(int channels) {
    std::vector<std::string> modes;
    for (int c = 0; c < channels; ++c) modes.push_back("ch" + std::to_string(c));
    modes.emplace_back("full");
    modes.emplace_back("none");
    return modes;
}

std::optional<std::vector<int>> alignment_channels(const std::string& mode, int channels) {
    if (mode == "full") return std::nullopt;
    if (mode == "none") return std::vector<int>{};
    if (mode.size() > 2 && mode.compare(0, 2, "ch") == 0 &&
        std::all_of(mode.begin() + 2, mode.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const int c = std::stoi(mode.substr(2));
        if (c >= channels) {
            throw ConfigError("latent channel " + std::to_string(c) + " out of range; backend has " +
                              std::to_string(channels));
        }
        return std::vector<int>{c};
    }
    throw ConfigError("unknown alignment mode '" + mode + "' (chN|full|none)");
}

ChannelAlignmentResult channel_alignment(const std::vector<ImageBuffer>& images, const RunConfig& cfg,
                                         const std::vector<std::string>& modes) {
    if (images.empty()) throw DatasetError("channel alignment needs at least one image");
    const Runtime rt = make_runtime(cfg);
    const Engine engine = rt.engine();
    const int channels = rt.backend->latent_channels();
    std::vector<std::optional<std::vector<int>>> selections;
    for (const auto& m : modes) selections.push_back(alignment_channels(m, channels));

    ChannelAlignmentResult r;
    r.modes = modes;
    r.hist.assign(modes.size(), {});
    r.means.assign(modes.size(), {0.0, 0.0, 0.0});
    std::vector<ImageBuffer> outputs(modes.size() * images.size());
    std::vector<std::string> errors(outputs.size());
    parallel_for(outputs.size(), cfg.workers, [&](std::size_t job) {
        const std::size_t mode = job / images.size();
        const std::size_t img = job % images.size();
        PipelineConfig p = cfg.pipeline;
        p.adain_enabled = true;
        p.adain_channels = selections[mode];
        p.seed = cfg.pipeline.seed + img;
        try {
            outputs[job] = quantize(enhance(images[img], p, engine));
        } catch (const std::exception& e) {
            errors[job] = e.what();
        }
    });
    for (std::size_t job = 0; job < outputs.size(); ++job) {
        if (!errors[job].empty()) throw Error("channel alignment, image " + std::to_string(job % images.size()) + ": " + errors[job]);
        accumulate(r, job / images.size(), outputs[job]);
    }
    for (const auto& img : images) r.pixels += img.pixel_count();
    for (auto& m : r.means)
        for (double& v : m) v /= static_cast<double>(r.pixels);
    return r;
}

ChannelAlignmentResult run_channel_alignment(const DatasetManifest& manifest, const RunConfig& cfg,
                                             const std::vector<std::string>& modes, const fs::path& out,
                                             const Logger& log) {
    std::vector<ImageBuffer> images;
    for (const auto& rec : manifest.records) images.push_back(load_image(rec.input));
    log("channel alignment over " + std::to_string(images.size()) + " image(s), " + std::to_string(modes.size()) +
        " mode(s)");
    auto r = channel_alignment(images, cfg, modes);
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream hist(out / "histograms.csv", std::ios::binary);
        if (!hist) throw IoError("cannot write " + (out / "histograms.csv").string());
        hist << "mode,channel,bin,count\n";
        static constexpr const char* kRgb[3] = {"r", "g", "b"};
        for (std::size_t m = 0; m < r.modes.size(); ++m)
            for (int c = 0; c < 3; ++c)
                for (int b = 0; b < 256; ++b) hist << r.modes[m] << ',' << kRgb[c] << ',' << b << ',' << r.hist[m][c][b] << '\n';
        std::ofstream means(out / "channel_means.csv", std::ios::binary);
        if (!means) throw IoError("cannot write " + (out / "channel_means.csv").string());
        means << "mode,mean_r,mean_g,mean_b,max_gap\n";
        for (std::size_t m = 0; m < r.modes.size(); ++m) {
            means << r.modes[m] << ',' << format_value(r.means[m][0]) << ',' << format_value(r.means[m][1]) << ','
                  << format_value(r.means[m][2]) << ',' << format_value(r.max_gap(r.modes[m])) << '\n';
        }
    }
    return r;
}

}  // namespace relight
