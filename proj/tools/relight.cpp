// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "relight/config.hpp"
#include "relight/dataset.hpp"
#include "relight/harness.hpp"
#include "relight/pipeline.hpp"

using namespace relight;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string backend;
    int workers = -1;

    void add_to(CLI::App* app) {
        app->add_option("--config", config, "flat key = value config file");
        app->add_option("--seed", seed, "base seed for the standard-normal reference latent");
        app->add_option("--backend", backend, "toy | external")->check(CLI::IsMember({"toy", "external"}));
        app->add_option("--workers", workers, "parallel images (0: all cores)")->check(CLI::NonNegativeNumber);
    }

    RunConfig resolve() const {
        RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
        if (seed) cfg.pipeline.seed = *seed;
        if (!backend.empty()) cfg.backend = backend;
        if (workers >= 0) cfg.workers = workers;
        return cfg;
    }
};

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int report_outcome(const EvalOutcome& o, const fs::path& out) {
    std::cout << "wrote " << (out / "report.csv").string();
    if (o.failed) std::cout << " (" << o.failed << " failure(s), see failures.csv)";
    std::cout << '\n';
    for (const auto& [metric, value] : o.report.aggregates()) std::cout << "  mean " << metric << " = " << value << '\n';
    return o.exit_code();
}

int cmd_enhance(const std::string& input, const std::string& output, const RunConfig& cfg, const std::string& variant) {
    const auto pcfg = apply_variant(cfg.pipeline, variant);
    const Runtime rt = make_runtime(cfg);
    const Engine engine = rt.engine();
    std::vector<fs::path> files;
    if (fs::is_directory(input)) {
        files = list_images(input);
        if (files.empty()) throw DatasetError("no images in " + input);
    } else {
        files.push_back(input);
    }
    fs::create_directories(output);
    int degenerate = 0;
    int other = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& f = files[i];
        PipelineConfig per_image = pcfg;
        per_image.seed = pcfg.seed + i;
        try {
            const auto out = quantize(enhance(load_image(f), per_image, engine));
            const auto dst = fs::path(output) / (sanitize_id(f.stem().string()) + ".png");
            save_png(dst, out);
            std::cout << f.string() << " -> " << dst.string() << '\n';
        } catch (const DegenerateInputError& e) {
            ++degenerate;
            std::cerr << "relight: " << f.string() << ": " << e.what() << '\n';
        } catch (const std::exception& e) {
            ++other;
            std::cerr << "relight: " << f.string() << ": " << e.what() << '\n';
        }
    }
    if (other) return 1;
    return degenerate ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot enhancement by diffusion inversion, AdaIN renormalization and attention replay"};
    app.require_subcommand(1);

    Common common;
    std::string input, output, manifest, out, variant = "final", variants, modes;

    auto* enh = app.add_subcommand("enhance", "enhance one image or every image in a directory");
    enh->add_option("--input", input, "image file or directory")->required();
    enh->add_option("--output", output, "output directory")->required();
    enh->add_option("--variant", variant, "final|no-sa|res|sa-sampling|sd-decoder|avg-input|avg-60");
    common.add_to(enh);

    auto* ev = app.add_subcommand("evaluate", "enhance a manifest and score paired records");
    ev->add_option("--manifest", manifest, "manifest CSV (id,input,gt,mask)")->required();
    ev->add_option("--out", out, "output directory")->required();
    ev->add_option("--variant", variant, "pipeline variant");
    common.add_to(ev);

    auto* awb = app.add_subcommand("awb-eval", "white-balance metrics (delta E 76, angular error, MSE) with masks");
    awb->add_option("--manifest", manifest)->required();
    awb->add_option("--out", out)->required();
    common.add_to(awb);

    auto* abl = app.add_subcommand("ablate", "run the variant matrix and write ablation.csv");
    abl->add_option("--manifest", manifest)->required();
    abl->add_option("--out", out)->required();
    abl->add_option("--variants", variants, "comma list (default: all)");
    common.add_to(abl);

    auto* align = app.add_subcommand("channel-align", "per-channel AdaIN histograms");
    align->add_option("--manifest", manifest)->required();
    align->add_option("--out", out)->required();
    align->add_option("--modes", modes, "comma list of chN|full|none (default: every channel, full, none)");
    common.add_to(align);

    std::string kind = "paired", gt_dir, mask_dir;
    std::optional<std::size_t> first_n;
    bool allow_unmatched = false;
    auto* man = app.add_subcommand("manifest", "scan dataset directories into a manifest CSV");
    man->add_option("--kind", kind, "paired|unpaired|awb")->check(CLI::IsMember({"paired", "unpaired", "awb"}));
    man->add_option("--input", input, "input image directory")->required();
    man->add_option("--gt", gt_dir, "ground-truth directory (paired, awb)");
    man->add_option("--mask", mask_dir, "mask directory (awb, optional; white = excluded)");
    man->add_option("--first", first_n, "keep the first N records in filename order");
    man->add_flag("--allow-unmatched", allow_unmatched, "skip files without a counterpart");
    man->add_option("--out", out, "manifest path (default: stdout)");

    std::string sched_kind = "linear-beta";
    int steps = 25;
    auto* sch = app.add_subcommand("schedule", "print an alpha_bar table");
    sch->add_option("--kind", sched_kind, "linear-beta|cosine|external-subsampled");
    sch->add_option("--steps", steps);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*enh) return cmd_enhance(input, output, common.resolve(), variant);
        if (*ev) return report_outcome(run_eval(read_manifest(manifest), common.resolve(), variant, out), out);
        if (*awb) return report_outcome(run_awb_eval(read_manifest(manifest), common.resolve(), out), out);
        if (*abl) {
            const auto list = variants.empty() ? variant_names() : split(variants);
            const auto rows = run_ablation(read_manifest(manifest), common.resolve(), list, out);
            std::cout << "wrote " << (fs::path(out) / "ablation.csv").string() << '\n';
            int code = 0;
            for (const auto& r : rows) code = std::max(code, r.outcome.exit_code() == 0 ? 0 : 1);
            return code;
        }
        if (*align) {
            const auto cfg = common.resolve();
            const auto channels = make_runtime(cfg).backend->latent_channels();
            const auto list = modes.empty() ? alignment_modes(channels) : split(modes);
            const auto r = run_channel_alignment(read_manifest(manifest), cfg, list, out);
            std::cout << "mode      mean_r   mean_g   mean_b   max_gap\n";
            for (std::size_t m = 0; m < r.modes.size(); ++m) {
                char line[128];
                std::snprintf(line, sizeof line, "%-8s %8.3f %8.3f %8.3f %8.3f\n", r.modes[m].c_str(), r.means[m][0],
                              r.means[m][1], r.means[m][2], r.max_gap(r.modes[m]));
                std::cout << line;
            }
            return 0;
        }
        if (*man) {
            DatasetManifest m;
            if (kind == "unpaired") {
                m = scan_unpaired(input);
            } else {
                if (gt_dir.empty()) throw ConfigError("--gt is required for --kind " + kind);
                m = kind == "awb" ? scan_awb(input, gt_dir, mask_dir.empty() ? std::nullopt : std::optional<fs::path>(mask_dir),
                                             allow_unmatched)
                                  : scan_paired(input, gt_dir, allow_unmatched);
            }
            std::cerr << "relight: " << m.size() << " record(s), ordered by " << DatasetManifest::kOrdering << '\n';
            if (first_n) m = select_first_n(m, *first_n);
            if (out.empty()) {
                write_manifest(std::cout, m);
            } else {
                write_manifest(fs::path(out), m);
            }
            return 0;
        }
        if (*sch) {
            write_schedule(std::cout, build_schedule(parse_schedule_kind(sched_kind), steps));
            return 0;
        }
    } catch (const DegenerateInputError& e) {
        std::cerr << "relight: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "relight: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
