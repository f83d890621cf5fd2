// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relight/dataset.hpp"
#include "relight/image.hpp"

namespace relight::testing {

inline constexpr int kCorpusSize = 20;
inline constexpr int kCorpusSide = 32;

/// Gradient background plus a coloured disc plus N(0, 4) noise, 32x32,
/// deterministic in `index`. `dark` scales everything by 0.12.
ImageBuffer corpus_image(int index, bool dark);

std::vector<ImageBuffer> corpus(int count, bool dark);

/// ||a - b|| / ||b|| over all values.
double rel_l2(const ImageBuffer& a, const ImageBuffer& b);

/// Fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Writes `count` dark/normal pairs as low/<i>.png and high/<i>.png and
/// returns the scanned paired manifest.
DatasetManifest write_paired_corpus(const std::filesystem::path& root, int count);

std::string read_file(const std::filesystem::path& p);

}  // namespace relight::testing
