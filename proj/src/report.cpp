// SPDX-License-Identifier: Apache-2.0
#include "relight/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "relight/errors.hpp"

namespace relight {

namespace {

int metric_rank(const std::string& m) {
    const auto& order = metric_order();
    const auto it = std::find(order.begin(), order.end(), m);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

std::vector<std::string> sorted_metrics(const std::map<std::string, double>& m) {
    std::vector<std::string> names;
    for (const auto& [k, v] : m) names.push_back(k);
    std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        const int ra = metric_rank(a);
        const int rb = metric_rank(b);
        return ra != rb ? ra < rb : a < b;
    });
    return names;
}

void check_field(const std::string& s) {
    if (s.find_first_of(",\n\r\"") != std::string::npos) throw ContractError("report field needs quoting: " + s);
}

}  // namespace

const std::vector<std::string>& metric_order() {
    static const std::vector<std::string> order = {"psnr", "ssim", "delta_e76", "angular_mae_deg",
                                                   "mse", "mae_excluded_px", "mask_coverage"};
    return order;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void MetricReport::add(const std::string& image, const std::string& metric, double value) {
    check_field(image);
    check_field(metric);
    if (image == kMeanRow) throw ContractError("image id '__mean__' is reserved");
    if (!std::isfinite(value)) throw ContractError("non-finite " + metric + " for " + image);
    if (!values_.contains(image)) images_.push_back(image);
    values_[image][metric] = value;
}

void MetricReport::add_failure(const std::string& image, const std::string& message) {
    failures_.push_back({image, message});
}

std::vector<MetricRow> MetricReport::rows() const {
    std::vector<MetricRow> out;
    for (const auto& img : images_) {
        const auto& m = values_.at(img);
        for (const auto& name : sorted_metrics(m)) out.push_back({img, name, m.at(name)});
    }
    return out;
}

std::map<std::string, double> MetricReport::aggregates() const {
    std::map<std::string, double> sum;
    std::map<std::string, int> count;
    for (const auto& img : images_) {
        for (const auto& [k, v] : values_.at(img)) {
            sum[k] += v;
            ++count[k];
        }
    }
    for (auto& [k, v] : sum) v /= count[k];
    return sum;
}

double MetricReport::mean(const std::string& metric) const {
    const auto agg = aggregates();
    const auto it = agg.find(metric);
    if (it == agg.end()) throw ContractError("report has no metric '" + metric + "'");
    return it->second;
}

void MetricReport::write_csv(std::ostream& os) const {
    os << "image,metric,value\n";
    for (const auto& r : rows()) os << r.image << ',' << r.metric << ',' << format_value(r.value) << '\n';
    const auto agg = aggregates();
    for (const auto& name : sorted_metrics(agg)) os << kMeanRow << ',' << name << ',' << format_value(agg.at(name)) << '\n';
}

void MetricReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    write_csv(os);
}

MetricReport MetricReport::read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "image,metric,value") throw IoError(path.string() + ": bad header");
    MetricReport rep;
    std::map<std::string, double> means;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string img, metric, value;
        if (!std::getline(ss, img, ',') || !std::getline(ss, metric, ',') || !std::getline(ss, value)) {
            throw IoError(path.string() + ": malformed row '" + line + "'");
        }
        double v = 0.0;
        try {
            v = std::stod(value);
        } catch (const std::exception&) {
            throw IoError(path.string() + ": bad value '" + value + "'");
        }
        if (img == kMeanRow) {
            means[metric] = v;
        } else {
            rep.add(img, metric, v);
        }
    }
    const auto agg = rep.aggregates();
    if (agg.size() != means.size()) throw IoError(path.string() + ": aggregate rows do not match metrics");
    for (const auto& [k, v] : agg) {
        const auto it = means.find(k);
        if (it == means.end() || std::abs(it->second - v) > 1e-9 * std::max(1.0, std::abs(v))) {
            throw IoError(path.string() + ": aggregate for '" + k + "' disagrees with per-image rows");
        }
    }
    return rep;
}

}  // namespace relight
