// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "relight/dataset.hpp"
#include "toy_corpus.hpp"

using namespace relight;
namespace fs = std::filesystem;

namespace {

void touch_image(const fs::path& p, double value = 100.0) { save_png(p, ImageBuffer(8, 8, value)); }

std::vector<std::string> ids(const DatasetManifest& m) {
    std::vector<std::string> out;
    for (const auto& r : m.records) out.push_back(r.id);
    return out;
}

}  // namespace

TEST_CASE("filename ordering is numeric first, then lexicographic") {
    std::vector<std::string> names = {"imgA.png", "img10.png", "img2.png"};
    std::sort(names.begin(), names.end(), filename_less);
    CHECK(names == std::vector<std::string>{"img2.png", "img10.png", "imgA.png"});

    names = {"b.png", "A.png", "007.png", "7x.png", "100000000000000000000001.png", "99.png"};
    std::sort(names.begin(), names.end(), filename_less);
    CHECK(names == std::vector<std::string>{"007.png", "7x.png", "99.png", "100000000000000000000001.png", "A.png", "b.png"});
}

TEST_CASE("paired scan") {
    const auto root = testing::scratch_dir("paired");
    for (const char* n : {"b.png", "a.png", "10.PNG"}) {
        touch_image(root / "low" / n);
        touch_image(root / "high" / n);
    }
    std::ofstream(root / "low" / "notes.txt") << "x";
    const auto m = scan_paired(root / "low", root / "high");
    CHECK(m.kind == DatasetKind::paired);
    CHECK(ids(m) == std::vector<std::string>{"10", "a", "b"});
    for (const auto& r : m.records) CHECK(r.gt.has_value());

    CHECK(scan_paired(root / "low", root / "high") == m);
    CHECK_THROWS_AS(scan_paired(root / "missing", root / "high"), DatasetError);
}

TEST_CASE("orphans are reported") {
    const auto root = testing::scratch_dir("orphans");
    touch_image(root / "in" / "a.png");
    touch_image(root / "gt" / "b.png");
    try {
        scan_paired(root / "in", root / "gt", true);
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("a.png") != std::string::npos);
        CHECK(msg.find("b.png") != std::string::npos);
    }
    touch_image(root / "in" / "b.png");
    CHECK_THROWS_AS(scan_paired(root / "in", root / "gt"), DatasetError);
    CHECK(scan_paired(root / "in", root / "gt", true).size() == 1);
}

TEST_CASE("select_first_n") {
    DatasetManifest m{DatasetKind::unpaired, {}};
    for (const char* n : {"2.png", "10.png", "1.png"}) m.records.push_back({fs::path(n).stem().string(), n, {}, {}});
    const auto two = select_first_n(m, 2);
    CHECK(ids(two) == std::vector<std::string>{"1", "2"});
    CHECK(select_first_n(two, 2) == two);
    const auto all = select_first_n(m, 3);
    for (std::size_t n = 0; n <= 3; ++n) {
        const auto prefix = select_first_n(m, n);
        CHECK(std::equal(prefix.records.begin(), prefix.records.end(), all.records.begin()));
    }
    CHECK_THROWS_AS(select_first_n(m, 4), DatasetError);
}

TEST_CASE("manifest csv round trip") {
    const auto root = testing::scratch_dir("manifest");
    for (const char* n : {"1.png", "2.png"}) {
        touch_image(root / "in" / n);
        touch_image(root / "gt" / n);
    }
    touch_image(root / "masks" / "2.png", 0.0);
    const auto m = scan_awb(root / "in", root / "gt", root / "masks");
    CHECK_FALSE(m.records[0].mask.has_value());
    CHECK(m.records[1].mask.has_value());
    write_manifest(root / "m.csv", m);
    const auto back = read_manifest(root / "m.csv");
    CHECK(back.kind == DatasetKind::awb);
    CHECK(back.records.size() == 2);
    CHECK(back.records[1].mask->filename() == "2.png");

    std::ostringstream a, b;
    write_manifest(a, scan_awb(root / "in", root / "gt", root / "masks"));
    write_manifest(b, scan_awb(root / "in", root / "gt", root / "masks"));
    CHECK(a.str() == b.str());

    std::ofstream(root / "bad.csv") << "id,input\n";
    CHECK_THROWS_AS(read_manifest(root / "bad.csv"), DatasetError);
}

TEST_CASE("awb records: explicit mask wins, detection otherwise") {
    const auto root = testing::scratch_dir("awb");
    auto img = testing::corpus_image(1, false);
    for (double& v : img.values()) v = std::max(v, 1.0);
    auto boxed = img;
    for (int y = 2; y < 8; ++y)
        for (int x = 2; x < 10; ++x)
            for (int c = 0; c < 3; ++c) boxed.at(x, y, c) = 0.0;
    save_png(root / "in.png", boxed);
    save_png(root / "gt.png", img);

    const auto detected = load_awb_record({"x", root / "in.png", root / "gt.png", std::nullopt});
    CHECK_FALSE(detected.explicit_mask);
    CHECK(detected.mask.kept() == img.pixel_count() - 48);

    cv::Mat mask(32, 32, CV_8UC1, cv::Scalar(0));
    mask(cv::Rect(0, 0, 4, 4)).setTo(255);
    cv::imwrite((root / "mask.png").string(), mask);
    const auto given = load_awb_record({"x", root / "in.png", root / "gt.png", root / "mask.png"});
    CHECK(given.explicit_mask);
    CHECK(given.mask.kept() == img.pixel_count() - 16);
    CHECK_FALSE(given.mask.keeps(0, 0));
    CHECK(given.mask.keeps(5, 5));

    const auto clean = make_awb_sample(img, img, std::nullopt);
    CHECK(clean.mask.coverage() == 1.0);

    cv::Mat big(32, 32, CV_8UC1, cv::Scalar(255));
    cv::imwrite((root / "big.png").string(), big);
    CHECK_THROWS_AS(load_awb_record({"x", root / "in.png", root / "gt.png", root / "big.png"}), DatasetError);
}
