// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "relight/metrics.hpp"
#include "relight/report.hpp"
#include "toy_corpus.hpp"

using namespace relight;

namespace {

ImageBuffer random_image(std::uint64_t seed, int w = 24, int h = 20) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, 255);
    ImageBuffer img(w, h);
    for (double& v : img.values()) v = u(rng);
    return img;
}

ImageBuffer uniform_rgb(int w, int h, double r, double g, double b) {
    ImageBuffer img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.at(x, y, 0) = r;
            img.at(x, y, 1) = g;
            img.at(x, y, 2) = b;
        }
    return img;
}

}  // namespace

TEST_CASE("psnr closed forms") {
    const auto a = random_image(1);
    CHECK(psnr(a, a) == kPsnrCap);
    CHECK(psnr(ImageBuffer(16, 16, 10.0), ImageBuffer(16, 16, 11.0)) == doctest::Approx(48.130803608679102).epsilon(1e-13));
    CHECK(psnr(ImageBuffer(16, 16, 0.0), ImageBuffer(16, 16, 255.0)) == doctest::Approx(0.0));
    const auto b = random_image(2);
    CHECK(psnr(a, b) == psnr(b, a));
    CHECK_THROWS_AS(psnr(a, ImageBuffer(4, 4)), ContractError);
}

TEST_CASE("ssim") {
    const auto a = random_image(3);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    ImageBuffer inv = a;
    for (double& v : inv.values()) v = 255.0 - v;
    const double s = ssim(a, inv);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
    const auto b = random_image(4);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    CHECK_THROWS_AS(ssim(ImageBuffer(10, 30), ImageBuffer(10, 30)), ContractError);
}

TEST_CASE("lab conversions") {
    const auto white = srgb_to_lab(1, 1, 1);
    CHECK(white[0] == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(std::abs(white[1]) <= 0.01);
    CHECK(std::abs(white[2]) <= 0.01);
    CHECK(srgb_to_lab(0, 0, 0) == Lab{0.0, 0.0, 0.0});
    const auto lab = srgb_to_lab(0.5, 0.25, 0.25);
    CHECK(lab[0] == doctest::Approx(35.118347066355497).epsilon(1e-12));
    CHECK(lab[1] == doctest::Approx(27.430128078594407).epsilon(1e-12));
    CHECK(lab[2] == doctest::Approx(12.645733623031386).epsilon(1e-12));
    CHECK_THROWS_AS(srgb_to_lab(1.2, 0, 0), ContractError);
    CHECK_THROWS_AS(srgb_to_lab(std::nan(""), 0, 0), ContractError);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double r = u(rng), g = u(rng), b = u(rng);
        const auto back = lab_to_srgb(srgb_to_lab(r, g, b));
        CHECK(std::abs(back[0] - r) <= 1e-6);
        CHECK(std::abs(back[1] - g) <= 1e-6);
        CHECK(std::abs(back[2] - b) <= 1e-6);
    }
}

TEST_CASE("delta e 76") {
    const std::vector<Lab> a(10, Lab{50, 0, 0});
    const std::vector<Lab> b(10, Lab{50, 3, 4});
    CHECK(delta_e76(a, b) == 5.0);
    const auto x = random_image(6);
    const auto y = random_image(7);
    CHECK(delta_e76(x, x) == 0.0);
    CHECK(delta_e76(x, y) == doctest::Approx(delta_e76(y, x)).epsilon(1e-12));
    Mask none = Mask::all(x.width(), x.height());
    std::fill(none.keep.begin(), none.keep.end(), 0);
    CHECK_THROWS_AS(delta_e76(x, y, &none), ContractError);
}

TEST_CASE("angular error") {
    const auto a = random_image(8);
    ImageBuffer half = a;
    for (double& v : half.values()) v *= 0.5;
    CHECK(angular_mae(a, half).degrees == 0.0);
    CHECK(angular_mae(uniform_rgb(4, 4, 255, 0, 0), uniform_rgb(4, 4, 0, 255, 0)).degrees == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(angular_mae(uniform_rgb(4, 4, 1, 1, 0), uniform_rgb(4, 4, 1, 0, 0)).degrees == doctest::Approx(45.0).epsilon(1e-12));

    auto holes = uniform_rgb(4, 4, 10, 20, 30);
    holes.at(1, 1, 0) = holes.at(1, 1, 1) = holes.at(1, 1, 2) = 0.0;
    const auto r = angular_mae(holes, uniform_rgb(4, 4, 30, 20, 10));
    CHECK(r.excluded == 1);
    CHECK_THROWS_AS(angular_mae(ImageBuffer(4, 4), ImageBuffer(4, 4)), ContractError);
}

TEST_CASE("mse") {
    const auto a = random_image(9);
    CHECK(mse(a, a) == 0.0);
    CHECK(mse(ImageBuffer(8, 8, 20.0), ImageBuffer(8, 8, 30.0)) == 100.0);
    const auto b = random_image(10);
    double brute = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) brute += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
    CHECK(mse(a, b) == doctest::Approx(brute / static_cast<double>(a.values().size())).epsilon(1e-14));
}

TEST_CASE("black box detection") {
    auto img = testing::corpus_image(0, false);
    for (double& v : img.values()) v = std::max(v, 1.0);
    CHECK_FALSE(detect_black_box(img).has_value());
    for (int y = 5; y < 14; ++y)
        for (int x = 3; x < 20; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.0;
    img.at(25, 25, 0) = img.at(25, 25, 1) = img.at(25, 25, 2) = 0.0;
    const auto box = detect_black_box(img);
    REQUIRE(box.has_value());
    CHECK(*box == Rect{3, 5, 20, 14});
    const auto m = mask_excluding(img.width(), img.height(), box);
    CHECK(m.kept() == img.pixel_count() - 17 * 9);

    ImageBuffer tiny(32, 32, 100.0);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            for (int c = 0; c < 3; ++c) tiny.at(x, y, c) = 0.0;
    CHECK_FALSE(detect_black_box(tiny).has_value());
}

TEST_CASE("gray mask convention and intersection") {
    std::vector<unsigned char> gray(16, 0);
    gray[5] = 255;
    const auto m = mask_from_gray(gray, 4, 4);
    CHECK_FALSE(m.keeps(1, 1));
    CHECK(m.kept() == 15);
    auto other = Mask::all(4, 4);
    other.exclude(0, 0);
    CHECK(intersect(m, other).kept() == 14);
}

TEST_CASE("report csv") {
    MetricReport r;
    r.add("b", "ssim", 0.5);
    r.add("b", "psnr", 20.0);
    r.add("a", "psnr", 30.0);
    r.add("a", "ssim", 0.7);
    std::ostringstream os;
    r.write_csv(os);
    CHECK(os.str() ==
          "image,metric,value\n"
          "b,psnr,20\n"
          "b,ssim,0.5\n"
          "a,psnr,30\n"
          "a,ssim,0.69999999999999996\n"
          "__mean__,psnr,25\n"
          "__mean__,ssim,0.59999999999999998\n");
    CHECK_THROWS_AS(r.add("c", "psnr", std::nan("")), ContractError);
    CHECK_THROWS_AS(r.add("__mean__", "psnr", 1.0), ContractError);

    const auto dir = testing::scratch_dir("report");
    r.write_csv(dir / "r.csv");
    const auto back = MetricReport::read_csv(dir / "r.csv");
    CHECK(back.mean("psnr") == 25.0);
    CHECK(back.rows().size() == 4);
}
