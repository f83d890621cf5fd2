// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relight/image.hpp"
#include "relight/metrics.hpp"

namespace relight {

enum class DatasetKind { paired, unpaired, awb };

std::string_view to_string(DatasetKind k);

struct DatasetRecord {
    std::string id;  ///< file stem
    std::filesystem::path input;
    std::optional<std::filesystem::path> gt;
    std::optional<std::filesystem::path> mask;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct DatasetManifest {
    DatasetKind kind = DatasetKind::unpaired;
    std::vector<DatasetRecord> records;

    /// Description of the record order, kept with the manifest.
    static constexpr const char* kOrdering = "first digit run numerically, then lowercase filename";

    std::size_t size() const { return records.size(); }
    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// png, jpg, jpeg or bmp, any letter case.
bool is_image_file(const std::filesystem::path& p);

/// Numeric value of the first digit run (absent sorts last), then the
/// lowercase filename, then the filename itself.
bool filename_less(const std::string& a, const std::string& b);

/// Image files directly inside `dir`, in filename_less order.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Pairs inputs and ground truths by identical stem. Unmatched files on
/// either side raise DatasetError listing them unless `allow_unmatched`;
/// an empty intersection always does.
DatasetManifest scan_paired(const std::filesystem::path& input_dir, const std::filesystem::path& gt_dir,
                            bool allow_unmatched = false);

DatasetManifest scan_unpaired(const std::filesystem::path& dir);

/// Paired scan plus optional per-image masks from `mask_dir`, matched by stem.
DatasetManifest scan_awb(const std::filesystem::path& input_dir, const std::filesystem::path& gt_dir,
                         const std::optional<std::filesystem::path>& mask_dir, bool allow_unmatched = false);

/// The first `n` records in filename_less order of their input file names.
DatasetManifest select_first_n(const DatasetManifest& m, std::size_t n);

/// CSV `id,input,gt,mask`; absent paths are empty fields.
void write_manifest(std::ostream& os, const DatasetManifest& m);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

/// Reads a manifest CSV. Kind: awb if any record has a mask, paired if all
/// have ground truth, unpaired if none do; a mix raises DatasetError.
DatasetManifest read_manifest(const std::filesystem::path& path);

struct AwbSample {
    ImageBuffer input;
    ImageBuffer gt;
    Mask mask;
    bool explicit_mask = false;
};

/// Masks above this fraction of excluded pixels are rejected.
inline constexpr double kMaxMaskedFraction = 0.5;

/// Loads an AWB pair. An explicit mask file (white = excluded) wins;
/// otherwise the black box is detected on input and ground truth and a
/// pixel is excluded if it is black-boxed in either.
AwbSample load_awb_record(const DatasetRecord& r);

/// Same, for images already in memory.
AwbSample make_awb_sample(ImageBuffer input, ImageBuffer gt, const std::optional<Mask>& explicit_mask);

}  // namespace relight
