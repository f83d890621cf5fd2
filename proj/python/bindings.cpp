// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "relight/config.hpp"
#include "relight/dataset.hpp"
#include "relight/harness.hpp"
#include "relight/metrics.hpp"

namespace py = pybind11;
using namespace relight;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageBuffer to_image(const Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw ContractError("expected an H x W x 3 RGB array");
    ImageBuffer img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.values().begin());
    return img;
}

Array to_array(const ImageBuffer& img) {
    Array a({py::ssize_t(img.height()), py::ssize_t(img.width()), py::ssize_t(3)});
    std::copy(img.values().begin(), img.values().end(), a.mutable_data());
    return a;
}

RunConfig config_from(const std::optional<std::string>& text) {
    if (!text) return {};
    std::istringstream is(*text);
    return parse_config(is);
}

std::unique_ptr<Mask> mask_from(const std::optional<py::array_t<bool>>& keep, const ImageBuffer& img) {
    if (!keep) return nullptr;
    if (keep->ndim() != 2 || keep->shape(0) != img.height() || keep->shape(1) != img.width())
        throw ContractError("mask must be H x W");
    auto m = std::make_unique<Mask>(Mask::all(img.width(), img.height()));
    auto r = keep->unchecked<2>();
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) m->keep[static_cast<std::size_t>(y) * img.width() + x] = r(y, x);
    return m;
}

py::dict outcome_dict(const EvalOutcome& o) {
    py::dict d;
    d["means"] = o.report.aggregates();
    d["failed"] = o.failed;
    d["degenerate"] = o.degenerate;
    d["exit_code"] = o.exit_code();
    return d;
}

}  // namespace

PYBIND11_MODULE(_relight, m) {
    m.doc() = "Zero-shot low-light enhancement core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
    py::register_exception<DatasetError>(m, "DatasetError", PyExc_OSError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

    m.def(
        "enhance",
        [](const Array& image, std::optional<std::string> config, std::optional<std::uint64_t> seed,
           const std::string& variant) {
            auto cfg = config_from(config);
            if (seed) cfg.pipeline.seed = *seed;
            const auto pcfg = apply_variant(cfg.pipeline, variant);
            const auto img = to_image(image);
            py::gil_scoped_release nogil;
            const Runtime rt = make_runtime(cfg);
            auto out = enhance(img, pcfg, rt.engine());
            py::gil_scoped_acquire gil;
            return to_array(out);
        },
        py::arg("image"), py::arg("config") = py::none(), py::arg("seed") = py::none(), py::arg("variant") = "final",
        "Enhance an H x W x 3 RGB array on the 0-255 scale. `config` is key = value text.");

    m.def("variant_names", &variant_names);
    m.def(
        "alpha_bar",
        [](const std::string& kind, int steps) {
            const auto s = build_schedule(parse_schedule_kind(kind), steps);
            std::vector<double> out;
            for (int t = 0; t <= steps; ++t) out.push_back(s.alpha_bar(t));
            return out;
        },
        py::arg("kind"), py::arg("steps"));

    m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); });
    m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); });
    m.def(
        "delta_e76",
        [](const Array& a, const Array& b, std::optional<py::array_t<bool>> keep) {
            const auto ia = to_image(a);
            const auto mask = mask_from(keep, ia);
            return delta_e76(ia, to_image(b), mask.get());
        },
        py::arg("a"), py::arg("b"), py::arg("keep") = py::none());
    m.def(
        "angular_mae",
        [](const Array& a, const Array& b, std::optional<py::array_t<bool>> keep) {
            const auto ia = to_image(a);
            const auto mask = mask_from(keep, ia);
            const auto e = angular_mae(ia, to_image(b), mask.get());
            return py::make_tuple(e.degrees, e.excluded);
        },
        py::arg("a"), py::arg("b"), py::arg("keep") = py::none(), "Returns (degrees, excluded pixel count).");
    m.def("srgb_to_lab", [](double r, double g, double b) {
        const auto lab = srgb_to_lab(r, g, b);
        return py::make_tuple(lab[0], lab[1], lab[2]);
    });

    m.def(
        "scan_paired",
        [](const std::filesystem::path& in, const std::filesystem::path& gt, bool allow_unmatched) {
            std::vector<std::string> ids;
            for (const auto& r : scan_paired(in, gt, allow_unmatched).records) ids.push_back(r.id);
            return ids;
        },
        py::arg("input"), py::arg("gt"), py::arg("allow_unmatched") = false, "Record ids in evaluation order.");
    m.def(
        "evaluate",
        [](const std::filesystem::path& manifest, const std::filesystem::path& out, std::optional<std::string> config,
           const std::string& variant) {
            const auto man = read_manifest(manifest);
            const auto cfg = config_from(config);
            py::gil_scoped_release nogil;
            auto o = run_eval(man, cfg, variant, out, [](const std::string&) {});
            py::gil_scoped_acquire gil;
            return outcome_dict(o);
        },
        py::arg("manifest"), py::arg("out"), py::arg("config") = py::none(), py::arg("variant") = "final");
}
