// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace relight {

/// Image id used for aggregate rows in report CSVs.
inline constexpr const char* kMeanRow = "__mean__";

/// Row order within one image; metrics not listed sort after these, by name.
const std::vector<std::string>& metric_order();

struct MetricRow {
    std::string image;
    std::string metric;
    double value = 0.0;
};

struct Failure {
    std::string image;
    std::string message;
};

/// Per-image scores of one evaluation run plus their means.
class MetricReport {
public:
    void add(const std::string& image, const std::string& metric, double value);
    void add_failure(const std::string& image, const std::string& message);

    /// Rows in insertion order of images, metric_order() within an image.
    std::vector<MetricRow> rows() const;
    const std::vector<Failure>& failures() const { return failures_; }
    std::vector<std::string> images() const { return images_; }

    /// Mean of each metric over the images that report it.
    std::map<std::string, double> aggregates() const;
    double mean(const std::string& metric) const;
    bool empty() const { return images_.empty(); }

    /// `image,metric,value` header, per-image rows, then __mean__ rows.
    void write_csv(std::ostream& os) const;
    void write_csv(const std::filesystem::path& path) const;

    /// Reads a CSV written by write_csv(), checking the __mean__ rows
    /// against the per-image rows (to 1e-9). Throws IoError otherwise.
    static MetricReport read_csv(const std::filesystem::path& path);

private:
    std::vector<std::string> images_;
    std::map<std::string, std::map<std::string, double>> values_;
    std::vector<Failure> failures_;
};

/// "%.17g" for round-trippable CSV values.
std::string format_value(double v);

}  // namespace relight
