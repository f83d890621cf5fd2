// SPDX-License-Identifier: Apache-2.0
#include "relight/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace relight {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// First run of ASCII digits without leading zeros ("0" stays "0"); nullopt if none.
std::optional<std::string> first_number(const std::string& s) {
    const auto b = std::find_if(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (b == s.end()) return std::nullopt;
    const auto e = std::find_if(b, s.end(), [](char c) { return !std::isdigit(static_cast<unsigned char>(c)); });
    std::string digits(b, e);
    const auto nz = digits.find_first_not_of('0');
    return nz == std::string::npos ? std::string("0") : digits.substr(nz);
}

std::map<std::string, fs::path> by_stem(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    for (const auto& p : list_images(dir)) {
        const auto stem = p.stem().string();
        if (!out.emplace(stem, p).second) {
            throw DatasetError("two images share the stem '" + stem + "' in " + dir.string());
        }
    }
    return out;
}

void require_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DatasetError("not a directory: " + dir.string());
}

void sort_records(std::vector<DatasetRecord>& records) {
    std::sort(records.begin(), records.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
        return filename_less(a.input.filename().string(), b.input.filename().string());
    });
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string_view to_string(DatasetKind k) {
    switch (k) {
    case DatasetKind::paired: return "paired";
    case DatasetKind::unpaired: return "unpaired";
    case DatasetKind::awb: return "awb";
    }
    return "?";
}

bool is_image_file(const fs::path& p) {
    const auto ext = lower(p.extension().string());
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

bool filename_less(const std::string& a, const std::string& b) {
    const auto na = first_number(a);
    const auto nb = first_number(b);
    if (na.has_value() != nb.has_value()) return na.has_value();
    if (na && *na != *nb) {
        if (na->size() != nb->size()) return na->size() < nb->size();
        return *na < *nb;
    }
    const auto la = lower(a);
    const auto lb = lower(b);
    if (la != lb) return la < lb;
    return a < b;
}

std::vector<fs::path> list_images(const fs::path& dir) {
    require_dir(dir);
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return filename_less(a.filename().string(), b.filename().string()); });
    return out;
}

DatasetManifest scan_paired(const fs::path& input_dir, const fs::path& gt_dir, bool allow_unmatched) {
    const auto inputs = by_stem(input_dir);
    const auto gts = by_stem(gt_dir);
    DatasetManifest m{DatasetKind::paired, {}};
    std::vector<std::string> orphans;
    for (const auto& [stem, path] : inputs) {
        const auto it = gts.find(stem);
        if (it == gts.end()) {
            orphans.push_back(path.string());
        } else {
            m.records.push_back({stem, path, it->second, std::nullopt});
        }
    }
    for (const auto& [stem, path] : gts) {
        if (!inputs.contains(stem)) orphans.push_back(path.string());
    }
    std::sort(orphans.begin(), orphans.end());
    auto orphan_list = [&] {
        std::string s;
        for (const auto& o : orphans) s += "\n  " + o;
        return s;
    };
    if (m.records.empty()) {
        throw DatasetError("no input/ground-truth pairs between " + input_dir.string() + " and " + gt_dir.string() +
                           (orphans.empty() ? std::string() : "; unmatched:" + orphan_list()));
    }
    if (!orphans.empty() && !allow_unmatched) {
        throw DatasetError(std::to_string(orphans.size()) + " unmatched file(s) (pass --allow-unmatched to skip):" +
                           orphan_list());
    }
    sort_records(m.records);
    return m;
}

DatasetManifest scan_unpaired(const fs::path& dir) {
    DatasetManifest m{DatasetKind::unpaired, {}};
    for (const auto& [stem, path] : by_stem(dir)) m.records.push_back({stem, path, std::nullopt, std::nullopt});
    if (m.records.empty()) throw DatasetError("no images in " + dir.string());
    sort_records(m.records);
    return m;
}

DatasetManifest scan_awb(const fs::path& input_dir, const fs::path& gt_dir, const std::optional<fs::path>& mask_dir,
                         bool allow_unmatched) {
    auto m = scan_paired(input_dir, gt_dir, allow_unmatched);
    m.kind = DatasetKind::awb;
    if (mask_dir) {
        const auto masks = by_stem(*mask_dir);
        for (auto& r : m.records) {
            const auto it = masks.find(r.id);
            if (it != masks.end()) r.mask = it->second;
        }
    }
    return m;
}

DatasetManifest select_first_n(const DatasetManifest& m, std::size_t n) {
    if (n > m.records.size()) {
        throw DatasetError("cannot select " + std::to_string(n) + " records from a manifest of " +
                           std::to_string(m.records.size()));
    }
    DatasetManifest out = m;
    sort_records(out.records);
    out.records.resize(n);
    return out;
}

void write_manifest(std::ostream& os, const DatasetManifest& m) {
    os << "id,input,gt,mask\n";
    for (const auto& r : m.records) {
        if (r.id.find(',') != std::string::npos) throw DatasetError("comma in record id '" + r.id + "'");
        const auto field = [](const std::optional<fs::path>& p) {
            const auto s = p ? p->generic_string() : std::string();
            if (s.find_first_of(",\n") != std::string::npos) throw DatasetError("path needs quoting: " + s);
            return s;
        };
        os << r.id << ',' << field(r.input) << ',' << field(r.gt) << ',' << field(r.mask) << '\n';
    }
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    write_manifest(os, m);
}

DatasetManifest read_manifest(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DatasetError("cannot read manifest " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "id,input,gt,mask") {
        throw DatasetError(path.string() + ": expected header 'id,input,gt,mask'");
    }
    DatasetManifest m;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4 || f[0].empty() || f[1].empty()) {
            throw DatasetError(path.string() + ":" + std::to_string(line_no) + ": malformed record");
        }
        DatasetRecord r{f[0], fs::path(f[1]), std::nullopt, std::nullopt};
        if (!f[2].empty()) r.gt = fs::path(f[2]);
        if (!f[3].empty()) r.mask = fs::path(f[3]);
        m.records.push_back(std::move(r));
    }
    const auto with_gt = std::count_if(m.records.begin(), m.records.end(), [](const auto& r) { return r.gt.has_value(); });
    const bool any_mask = std::any_of(m.records.begin(), m.records.end(), [](const auto& r) { return r.mask.has_value(); });
    if (m.records.empty()) throw DatasetError(path.string() + ": manifest has no records");
    if (with_gt != 0 && with_gt != static_cast<long>(m.records.size())) {
        throw DatasetError(path.string() + ": some records have ground truth and some do not");
    }
    if (any_mask && with_gt == 0) throw DatasetError(path.string() + ": masks given without ground truth");
    m.kind = any_mask ? DatasetKind::awb : (with_gt ? DatasetKind::paired : DatasetKind::unpaired);
    return m;
}

AwbSample make_awb_sample(ImageBuffer input, ImageBuffer gt, const std::optional<Mask>& explicit_mask) {
    require_same_size(input, gt, "awb record");
    AwbSample s;
    if (explicit_mask) {
        if (explicit_mask->width != input.width() || explicit_mask->height != input.height()) {
            throw DatasetError("mask size does not match the image");
        }
        s.mask = *explicit_mask;
        s.explicit_mask = true;
    } else {
        s.mask = intersect(mask_excluding(input.width(), input.height(), detect_black_box(input)),
                           mask_excluding(gt.width(), gt.height(), detect_black_box(gt)));
    }
    if (1.0 - s.mask.coverage() > kMaxMaskedFraction) {
        throw DatasetError("suspicious mask: " + std::to_string(100.0 * (1.0 - s.mask.coverage())) +
                           "% of pixels excluded");
    }
    s.input = std::move(input);
    s.gt = std::move(gt);
    return s;
}

AwbSample load_awb_record(const DatasetRecord& r) {
    if (!r.gt) throw DatasetError("record '" + r.id + "' has no ground truth");
    std::optional<Mask> explicit_mask;
    if (r.mask) {
        int w = 0;
        int h = 0;
        const auto gray = load_gray(*r.mask, w, h);
        explicit_mask = mask_from_gray(gray, w, h);
    }
    return make_awb_sample(load_image(r.input), load_image(*r.gt), explicit_mask);
}

}  // namespace relight
