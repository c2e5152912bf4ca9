#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "archery/error.hpp"
#include "archery/image.hpp"
#include "archery/scene.hpp"
#include "archery/vision.hpp"
#include "fixtures.hpp"

using namespace archery;
using doctest::Approx;

namespace {

GrayImage target_image(int w, int h, double cx, double cy, double r, double noise_sigma = 0.0,
                       std::uint64_t seed = 0) {
    GrayImage img = render_rings(w, h, {cx, cy}, r, 2.0);
    if (noise_sigma > 0) {
        std::mt19937_64 rng(seed);
        add_gaussian_noise(img, noise_sigma, rng);
    }
    return img;
}

GrayImage darker_of(const GrayImage& a, const GrayImage& b) {
    GrayImage out = a;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) out.at(x, y) = std::min(a.at(x, y), b.at(x, y));
    }
    return out;
}

}  // namespace

TEST_SUITE("vision") {

TEST_CASE("to_grayscale") {
    RgbImage img(3, 1);
    img.at(0, 0) = {255, 255, 255};
    img.at(1, 0) = {0, 0, 0};
    img.at(2, 0) = {255, 0, 0};
    const GrayImage g = to_grayscale(img);
    CHECK(g.at(0, 0) == 255);
    CHECK(g.at(1, 0) == 0);
    CHECK(g.at(2, 0) == 76);
    CHECK_THROWS_AS(to_grayscale(RgbImage{}), InvalidInput);
}

TEST_CASE("gaussian kernel and blur") {
    const auto k = gaussian_kernel(5, 1.0);
    REQUIRE(k.size() == 5);
    const double expect[5] = {0.0544886845, 0.2442013420, 0.4026199469, 0.2442013420, 0.0544886845};
    for (int i = 0; i < 5; ++i) CHECK(k[i] == Approx(expect[i]).epsilon(1e-9));

    const GrayImage flat(20, 15, 128);
    CHECK(gaussian_blur(flat, 5, 1.0) == flat);

    GrayImage dot(9, 9, 0);
    dot.at(4, 4) = 255;
    // Center weight of the 5x5 kernel is 0.4026199^2 = 0.1621028; 255 * that rounds to 41.
    CHECK(gaussian_blur(dot, 5, 1.0).at(4, 4) == 41);

    const GrayImage one(1, 1, 77);
    CHECK(gaussian_blur(one, 5, 1.0) == one);

    CHECK_THROWS_AS(gaussian_blur(flat, 4, 1.0), InvalidConfig);
    CHECK_THROWS_AS(gaussian_blur(flat, 5, 0.0), InvalidConfig);
}

TEST_CASE("blur preserves interior mean") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 10; ++t) {
        const GrayImage img = uniform_noise_image(64, 48, rng);
        const GrayImage out = gaussian_blur(img, 5, 1.0);
        double a = 0, b = 0;
        int n = 0;
        for (int y = 8; y < 40; ++y) {
            for (int x = 8; x < 56; ++x) {
                a += img.at(x, y);
                b += out.at(x, y);
                ++n;
            }
        }
        CHECK(std::abs(a / n - b / n) <= 1.0);
    }
}

TEST_CASE("radial difference vector") {
    const GrayImage flat(50, 50, 90);
    for (const Direction d : kAllDirections) {
        const auto v = radial_difference_vector(flat, 25, 25, d, 20, 40);
        CHECK(v.size() == 20);
        CHECK(std::all_of(v.begin(), v.end(), [](int x) { return x == 0; }));
    }

    GrayImage step(50, 50, 0);
    for (int y = 0; y < 50; ++y) {
        for (int x = 30; x < 50; ++x) step.at(x, y) = 255;
    }
    const auto v = radial_difference_vector(step, 20, 25, Direction::Right, 20, 40);
    for (int i = 0; i < static_cast<int>(v.size()); ++i) CHECK(v[i] == (i == 9 ? 255 : 0));

    GrayImage ramp(50, 50, 0);
    for (int y = 0; y < 50; ++y) {
        for (int x = 0; x < 25; ++x) ramp.at(x, y) = static_cast<std::uint8_t>(10 * x);
    }
    const auto r = radial_difference_vector(ramp, 0, 10, Direction::Right, 20, 40);
    CHECK(std::all_of(r.begin(), r.end(), [](int x) { return x == 0; }));

    // The walk stops at the border.
    CHECK(radial_difference_vector(flat, 45, 25, Direction::Right, 20, 40).size() == 4);
    CHECK(radial_difference_vector(flat, 2, 3, Direction::UpLeft, 20, 40).size() == 2);
}

TEST_CASE("nms_1d fixtures") {
    for (const auto& c : fixtures::nms_cases()) {
        CAPTURE(c.name);
        CHECK(nms_1d(c.v, c.window_fraction) == c.expected);
    }
}

TEST_CASE("nms_1d output is increasing and nonzero") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> val(0, 255), len(1, 200);
    std::bernoulli_distribution zero(0.6);
    for (int t = 0; t < 300; ++t) {
        std::vector<int> v(len(rng));
        for (auto& x : v) x = zero(rng) ? 0 : val(rng);
        const auto idx = nms_1d(v, 0.1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            CHECK(v[idx[i]] > 0);
            if (i) CHECK(idx[i] > idx[i - 1]);
        }
    }
}

TEST_CASE("validate_concentric fixtures") {
    for (const auto& c : fixtures::validate_cases()) {
        CAPTURE(c.name);
        DetectorConfig cfg;
        cfg.min_positive_directions = c.min_positive;
        const auto ev = validate_concentric(fixtures::rays(c.maxima), cfg);
        REQUIRE(ev.has_value() == c.positive.has_value());
        if (ev) {
            CHECK(ev->positive_directions == *c.positive);
            CHECK(ev->r_avg == Approx(c.r_avg).epsilon(1e-12));
        }
    }
}

TEST_CASE("hough finds a single circle") {
    const GrayImage img = render_rings(200, 200, {100, 100}, 20, 2.0, {}, 1);
    const auto c = hough_circles(gaussian_blur(img, 5, 1.0), DetectorConfig{});
    REQUIRE_FALSE(c.empty());
    CHECK(std::abs(c[0].cx - 100) <= 2);
    CHECK(std::abs(c[0].cy - 100) <= 2);
    CHECK(std::abs(c[0].radius - 20) <= 2);
}

TEST_CASE("hough finds two disjoint circles") {
    const GrayImage a = render_rings(240, 160, {60, 80}, 15, 2.0, {}, 1);
    const GrayImage b = render_rings(240, 160, {170, 80}, 25, 2.0, {}, 1);
    const auto c = hough_circles(gaussian_blur(darker_of(a, b), 5, 1.0), DetectorConfig{});
    auto near = [&](int x, int y, int r) {
        return std::any_of(c.begin(), c.end(), [&](const CircleCandidate& k) {
            return std::abs(k.cx - x) <= 2 && std::abs(k.cy - y) <= 2 && std::abs(k.radius - r) <= 2;
        });
    };
    CHECK(near(60, 80, 15));
    CHECK(near(170, 80, 25));
}

TEST_CASE("hough edge cases") {
    CHECK(hough_circles(GrayImage(100, 100, 200), DetectorConfig{}).empty());
    CHECK_THROWS_AS(hough_circles(GrayImage(60, 100, 200), DetectorConfig{}), InvalidInput);
}

TEST_CASE("detect_target on rendered targets") {
    const auto det = detect_target(target_image(640, 480, 320, 240, 20), DetectorConfig{});
    REQUIRE(det);
    CHECK(std::abs(det->cx - 320) <= 3);
    CHECK(std::abs(det->cy - 240) <= 3);
    CHECK(det->positive_directions >= 5);
    CHECK(det->r_avg > 0);

    // At r_avg = 15 the default 120-sample rays have a +-12 NMS window, wider
    // than the gap between one ring's trailing edge and the next ring's
    // leading edge, so only the first ring survives. Shorter rays fix it.
    const GrayImage small = target_image(640, 480, 320, 240, 15);
    CHECK_FALSE(detect_target(small, DetectorConfig{}));
    DetectorConfig short_rays;
    short_rays.diff_vector_length = 60;
    const auto det15 = detect_target(small, short_rays);
    REQUIRE(det15);
    CHECK(std::abs(det15->cx - 320) <= 3);
    CHECK(std::abs(det15->cy - 240) <= 3);

    CHECK_FALSE(detect_target(render_rings(300, 300, {150, 150}, 20, 2.0, {}, 1), DetectorConfig{}));
    std::mt19937_64 rng(99);
    CHECK_FALSE(detect_target(uniform_noise_image(200, 200, rng), DetectorConfig{}));

    RgbImage rgb(200, 200);
    const GrayImage g = target_image(200, 200, 100, 100, 20);
    for (int y = 0; y < 200; ++y) {
        for (int x = 0; x < 200; ++x) rgb.at(x, y) = {g.at(x, y), g.at(x, y), g.at(x, y)};
    }
    const auto det_rgb = detect_target(rgb, DetectorConfig{});
    REQUIRE(det_rgb);
    CHECK(*det_rgb == *detect_target(g, DetectorConfig{}));
}

TEST_CASE("detection is deterministic") {
    const GrayImage img = target_image(320, 240, 150, 110, 22, 8.0, 4);
    CHECK(detect_target(img, DetectorConfig{}) == detect_target(img, DetectorConfig{}));
}

TEST_CASE("translation equivariance") {
    const DetectorConfig cfg;
    const auto base = detect_target(target_image(400, 400, 200, 200, 20), cfg);
    REQUIRE(base);
    for (const auto& [dx, dy] : {std::pair{13, -7}, std::pair{-20, 25}, std::pair{40, 0}, std::pair{-9, -30}}) {
        const auto moved = detect_target(target_image(400, 400, 200 + dx, 200 + dy, 20), cfg);
        REQUIRE(moved);
        CHECK(std::abs(moved->cx - base->cx - dx) <= 2);
        CHECK(std::abs(moved->cy - base->cy - dy) <= 2);
    }
}

TEST_CASE("lowering min_positive_directions keeps detections") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> r(20, 30), pos(130, 190);
    for (int t = 0; t < 8; ++t) {
        const GrayImage img = target_image(320, 320, pos(rng), pos(rng), r(rng), 8.0, t);
        for (int m = 8; m > 1; --m) {
            DetectorConfig hi, lo;
            hi.min_positive_directions = m;
            lo.min_positive_directions = m - 1;
            if (detect_target(img, hi)) CHECK(detect_target(img, lo).has_value());
        }
    }
}

TEST_CASE("detector config validation") {
    DetectorConfig c;
    CHECK_NOTHROW(c.validate());
    c.r_min = 30;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
    c = {};
    c.nms_window_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
    c = {};
    c.min_positive_directions = 9;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
    c = {};
    c.radius_tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("netpbm round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "archery_netpbm_test";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(3);
    const GrayImage g = uniform_noise_image(37, 23, rng);
    write_pgm(dir / "a.pgm", g);
    CHECK(read_pgm(dir / "a.pgm") == g);
    CHECK(read_netpbm_gray(dir / "a.pgm") == g);

    RgbImage c(5, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) {
            c.at(x, y) = {static_cast<std::uint8_t>(x * 50), static_cast<std::uint8_t>(y * 60), 7};
        }
    }
    write_ppm(dir / "c.ppm", c);
    CHECK(read_ppm(dir / "c.ppm") == c);
    CHECK(read_netpbm_gray(dir / "c.ppm") == to_grayscale(c));

    CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), IoError);
    {
        std::ofstream f(dir / "bad.pgm", std::ios::binary);
        f << "P5\n4 4\n65535\n";
    }
    CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), IoError);
    {
        std::ofstream f(dir / "comment.pgm", std::ios::binary);
        f << "P5\n# made by hand\n2 1\n255\n";
        f.put(static_cast<char>(10));
        f.put(static_cast<char>(200));
    }
    const GrayImage cm = read_pgm(dir / "comment.pgm");
    CHECK(cm.width() == 2);
    CHECK(cm.at(1, 0) == 200);
    std::filesystem::remove_all(dir);
}

TEST_CASE("GrayImage invariants") {
    CHECK_THROWS_AS(GrayImage(0, 5), InvalidInput);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), InvalidInput);
}

}  // TEST_SUITE
