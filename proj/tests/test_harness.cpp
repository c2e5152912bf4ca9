#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "archery/config.hpp"
#include "archery/error.hpp"
#include "archery/experiment.hpp"
#include "archery/report.hpp"
#include "archery/scene.hpp"

using namespace archery;
using doctest::Approx;

namespace {

std::filesystem::path scratch_dir() {
    auto d = std::filesystem::temp_directory_path() / "archery_harness_test";
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

AppConfig noiseless() {
    AppConfig app = load_config(default_config_path());
    app.noise = {};
    return app;
}

// Distance from the center to the middle of the first dark stroke along +x.
double first_ring_radius(const GrayImage& img, int cx, int cy) {
    int start = -1, end = -1;
    for (int x = cx; x < img.width(); ++x) {
        const bool dark = img.at(x, cy) < 125;
        if (dark && start < 0) start = x;
        if (!dark && start >= 0) {
            end = x;
            break;
        }
    }
    return 0.5 * (start + end - 1) - cx;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("canonical config loads") {
    const AppConfig app = load_config(default_config_path());
    CHECK(app.scene.wall_distance == Approx(10.0));
    CHECK(app.scene.target_height == Approx(1.145));
    CHECK(app.scene.target_diameter == Approx(0.49));
    CHECK(app.scene.inner_ring_diameter == Approx(0.097));
    CHECK(app.shooter.right_arm.n_joints() == 7);
    CHECK(app.shooter.home[3] == Approx(-1.2));
    CHECK(app.shooter.bow.arrow_mass == Approx(0.020));
    CHECK(app.detector.r_min == 10);
    CHECK(app.detector.r_max == 30);
    CHECK(app.calibration.probe_offsets == std::vector<double>{-0.5, 0.5});
    CHECK(app.n_shots == 10);
    REQUIRE(app.exp3.table.size() == 3);
    CHECK(app.exp3.table[0].draw_length == Approx(0.70));
    CHECK(app.exp3.table[0].roll == Approx(deg_to_rad(4.0)));
    CHECK(app.exp3.table[0].range == 44.0);
    CHECK(app.noise.sigma_yaw == Approx(0.002).epsilon(1e-3));
}

TEST_CASE("config errors") {
    const auto base = default_config_path().parent_path();
    CHECK_THROWS_AS(parse_config("bogus: {}\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("scene:\n  wall_distance_m: 10\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("scene:\n  wall_distance_cm: abc\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("scene: [1, 2]\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("experiment:\n  n_shots: 0\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("noise:\n  sigma_yaw_deg: -1\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("detector:\n  blur_kernel: 4\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("arm:\n  home_rad: [0, 0]\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("experiment:\n  exp3_table: [[70, 4]]\n", base), InvalidConfig);
    CHECK_THROWS_AS(parse_config("scene: [\n", base), InvalidConfig);
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), IoError);
    CHECK_NOTHROW(parse_config("", base));
}

TEST_CASE("arm path resolves against the config directory") {
    const auto dir = scratch_dir() / "cfg";
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(default_arm_path(), dir / "my_arm.yaml",
                               std::filesystem::copy_options::overwrite_existing);
    {
        std::ofstream f(dir / "c.yaml");
        f << "arm:\n  file: my_arm.yaml\ncamera:\n  focal_px: 1800\n";
    }
    const AppConfig app = load_config(dir / "c.yaml");
    CHECK(app.shooter.right_arm.n_joints() == 7);
    CHECK(app.scene.camera.focal_px == 1800.0);
    {
        std::ofstream f(dir / "d.yaml");
        f << "arm:\n  file: missing.yaml\n";
    }
    CHECK_THROWS_AS(load_config(dir / "d.yaml"), IoError);
}

TEST_CASE("render_target projection") {
    Scene scene;
    scene.camera.mount_height = scene.target_height;
    const GrayImage img = render_target(scene);
    const PixelPoint c = project(scene, 0.0, scene.target_height);
    CHECK(c.x == 320.0);
    CHECK(c.y == 240.0);
    const auto det = detect_target(img, DetectorConfig{});
    REQUIRE(det);
    CHECK(std::abs(det->cx - 320) <= 1);
    CHECK(std::abs(det->cy - 240) <= 1);

    CHECK(render_target(scene) == img);

    const double r1 = first_ring_radius(img, 320, 240);
    Scene zoomed = scene;
    zoomed.camera.focal_px *= 2;
    zoomed.target_diameter /= 2;  // keep the outer ring inside the frame
    zoomed.ring_width /= 2;
    Scene twice = scene;
    twice.camera.focal_px *= 2;
    twice.camera.width *= 2;
    twice.camera.height *= 2;
    const double r2 = first_ring_radius(render_target(twice), 640, 480);
    CHECK(std::abs(r2 - 2 * r1) <= 1.0);
    CHECK(r1 == Approx(scene.camera.focal_px * scene.ring_spacing() / scene.wall_distance).epsilon(0.05));

    Scene off = scene;
    off.target_lateral = 2.0;
    CHECK_THROWS_AS(render_target(off), InvalidInput);

    // Focal length putting the first ring at 12 px keeps two rings inside the Hough band.
    Scene twelve = scene;
    twelve.camera.focal_px = 12.0 * scene.wall_distance / scene.ring_spacing();
    const double r = twelve.camera.focal_px * twelve.ring_spacing() / twelve.wall_distance;
    CHECK(r == Approx(12.0));
    const DetectorConfig d;
    CHECK(r >= d.r_min);
    CHECK(2 * r <= d.r_max);
}

TEST_CASE("lateral_at_column inverts project") {
    Scene scene;
    for (const double lat : {-0.4, -0.1, 0.0, 0.25}) {
        CHECK(lateral_at_column(scene, project(scene, lat, 1.0).x) == Approx(lat).epsilon(1e-12));
    }
}

TEST_CASE("csv format") {
    ShotRecord rec;
    rec.shot_index = 0;
    rec.commanded = {deg_to_rad(1.5), deg_to_rad(2.0), 0.65};
    rec.realized = rec.commanded;
    rec.speed = 31.7026019;
    rec.state = ShootState::Released;
    ReportRow row = make_row(rec);
    row.impact_x_cm = 12.5;
    row.impact_y_cm = -3.25;
    row.distance_m = 10.0078;
    const std::string csv = format_csv({row});
    CHECK(count(csv, "\n") == 2);
    CHECK(csv.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.find(",RELEASED\n") != std::string::npos);

    ReportRow fault = make_row(rec);
    fault.shot_index = 1;
    fault.state = ShootState::Fault;
    const auto back = parse_csv(format_csv({row, fault}));
    REQUIRE(back.size() == 2);
    CHECK_FALSE(back[1].impact_x_cm);
    CHECK(back[1].state == ShootState::Fault);

    CHECK_THROWS_AS(parse_csv("a,b\n1,2\n"), InvalidInput);
    CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\n1,2,3\n"), InvalidInput);
    CHECK_THROWS_AS(emit_csv(scratch_dir() / "empty.csv", {}), InvalidInput);
    CHECK_THROWS_AS(emit_csv("/nonexistent/dir/x.csv", {row}), IoError);
}

TEST_CASE("csv round trip keeps six significant digits") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    std::vector<ReportRow> rows;
    for (int i = 0; i < 200; ++i) {
        ReportRow r;
        r.shot_index = i;
        r.theta_cmd = u(rng) * 1e-3;
        r.phi_cmd = u(rng) * 1e-3;
        r.theta_real = u(rng) * 1e-7;
        r.phi_real = u(rng);
        r.d_l = 65.0;
        r.speed = std::abs(u(rng));
        if (i % 7) r.impact_x_cm = u(rng);
        if (i % 5) r.impact_y_cm = u(rng) * 1e-5;
        r.distance_m = std::abs(u(rng));
        r.state = i % 11 ? ShootState::Released : ShootState::Fault;
        rows.push_back(r);
    }
    const auto back = parse_csv(format_csv(rows));
    REQUIRE(back.size() == rows.size());
    auto close = [](double a, double b) { return std::abs(a - b) <= 5e-7 * std::max(std::abs(a), 1e-300); };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].shot_index == rows[i].shot_index);
        CHECK(close(back[i].theta_cmd, rows[i].theta_cmd));
        CHECK(close(back[i].phi_cmd, rows[i].phi_cmd));
        CHECK(close(back[i].theta_real, rows[i].theta_real));
        CHECK(close(back[i].phi_real, rows[i].phi_real));
        CHECK(close(back[i].speed, rows[i].speed));
        CHECK(back[i].impact_x_cm.has_value() == rows[i].impact_x_cm.has_value());
        if (rows[i].impact_x_cm) CHECK(close(*back[i].impact_x_cm, *rows[i].impact_x_cm));
        if (rows[i].impact_y_cm) CHECK(close(*back[i].impact_y_cm, *rows[i].impact_y_cm));
        CHECK(close(back[i].distance_m, rows[i].distance_m));
        CHECK(back[i].state == rows[i].state);
    }
    CHECK(format_csv(back) == format_csv(rows));
}

TEST_CASE("svg output") {
    ReportRow r;
    r.impact_x_cm = 4.0;
    r.impact_y_cm = 80.0;
    const std::vector<ReportRow> same(10, r);
    ScatterStyle style;
    style.title = "ten <identical> shots";
    const std::string svg = format_svg_scatter(same, style);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("</svg>\n") == svg.size() - 7);
    CHECK(count(svg, "<circle") == 10);
    CHECK(count(svg, "<circle cx=\"") == 10);
    const auto first = svg.find("<circle");
    const std::string marker = svg.substr(first, svg.find("<title>", first) - first);
    CHECK(count(svg, marker) == 10);
    CHECK(svg.find("&lt;identical&gt;") != std::string::npos);

    style.rings_cm = {4.85, 8.17, 16.33, 24.5};
    CHECK(count(format_svg_scatter(same, style), "<ellipse") == 4);

    LaunchState l;
    l.speed = 30;
    l.elevation = 0.2;
    const auto path = scratch_dir() / "traj.svg";
    emit_svg_trajectory(path, sample_trajectory(l, 1e-3, 10), "flight");
    const std::string t = slurp(path);
    CHECK(count(t, "<polyline") == 1);
    CHECK_THROWS_AS(emit_svg_scatter(scratch_dir() / "x.svg", {}, style), InvalidInput);
}

TEST_CASE("experiment 1 without noise repeats one impact") {
    const AppConfig app = noiseless();
    const ExperimentResult r = run_experiment(app, experiment_config(app, 1, 1));
    REQUIRE(r.rows.size() == 10);
    CHECK(r.stats.n == 10);
    CHECK(r.stats.max_pairwise == 0.0);
    CHECK(r.stats.var_x == 0.0);
    for (const auto& row : r.rows) {
        CHECK(row.theta_cmd == 0.0);
        CHECK(row.phi_cmd == 0.0);
        CHECK(*row.impact_x_cm == 0.0);
        CHECK(*row.impact_y_cm == *r.rows[0].impact_y_cm);
    }
}

TEST_CASE("experiment 2 without noise hits the target") {
    const AppConfig app = noiseless();
    const ExperimentResult r = run_experiment(app, experiment_config(app, 2, 1));
    REQUIRE(r.calibration);
    CHECK(r.stats.n == 10);
    CHECK(std::hypot(r.stats.mean_x, r.stats.mean_y) <= 2.0);
    CHECK(r.calibration->calibration.k_p == Approx(1.0 / app.scene.camera.focal_px).epsilon(0.05));
    for (const auto& rec : r.records) CHECK(rec.detection_x.has_value());
}

TEST_CASE("experiment 2 reports a missing target as a fault") {
    AppConfig app = noiseless();
    app.exp2_target_offset = 5.0;  // far outside the camera frame
    ExperimentConfig cfg = experiment_config(app, 2, 1);
    cfg.calibrate = false;
    cfg.n_shots = 3;
    const ExperimentResult r = run_experiment(app, cfg);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) {
        CHECK(row.state == ShootState::Fault);
        CHECK_FALSE(row.impact_x_cm);
    }
    CHECK(r.stats.n == 0);
}

TEST_CASE("experiment 3 sweeps the table and grid") {
    const AppConfig app = noiseless();
    const ExperimentResult r = run_experiment(app, experiment_config(app, 3, 1));
    REQUIRE(r.fit);
    CHECK(r.rows.size() == 3 + 3 * 4);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.rows[i].distance_m == Approx(r.fit->predicted[i]).epsilon(1e-9));
    }
    CHECK(r.shooter.bow.efficiency == r.fit->efficiency);
}

TEST_CASE("summary statistics") {
    std::vector<ReportRow> rows(3);
    rows[0].impact_x_cm = 0.0;
    rows[0].impact_y_cm = 0.0;
    rows[1].impact_x_cm = 3.0;
    rows[1].impact_y_cm = 4.0;
    rows[2].impact_x_cm = 6.0;
    rows[2].impact_y_cm = 0.0;
    rows.push_back({});
    const AxisStats s = summarize(rows);
    CHECK(s.n == 3);
    CHECK(s.mean_x == Approx(3.0));
    CHECK(s.var_x == Approx(9.0));
    CHECK(s.var_y == Approx(16.0 / 3.0));
    CHECK(s.spread_x == 6.0);
    CHECK(s.max_pairwise == Approx(6.0));
}

TEST_CASE("experiments are reproducible byte for byte") {
    const AppConfig app = load_config(default_config_path());
    for (const int id : {1, 2}) {
        const auto a = run_experiment(app, experiment_config(app, id, 1234));
        const auto b = run_experiment(app, experiment_config(app, id, 1234));
        CHECK(format_csv(a.rows) == format_csv(b.rows));
        const auto c = run_experiment(app, experiment_config(app, id, 1235));
        CHECK(format_csv(a.rows) != format_csv(c.rows));
    }
}

}  // TEST_SUITE

// Replicated study, slower than the rest of the harness suite.
TEST_SUITE("study") {

TEST_CASE("calibration shrinks the aiming error") {
    const AppConfig app = load_config(default_config_path());
    double on = 0.0, off = 0.0;
    int on_better = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ExperimentConfig cfg = experiment_config(app, 2, seed);
        const auto with = run_experiment(app, cfg);
        cfg.calibrate = false;
        const auto without = run_experiment(app, cfg);
        double a = 0.0, b = 0.0;
        for (const auto& r : with.rows) a += std::abs(r.impact_x_cm.value_or(1e9));
        for (const auto& r : without.rows) b += std::abs(r.impact_x_cm.value_or(1e9));
        on += a / static_cast<double>(with.rows.size());
        off += b / static_cast<double>(without.rows.size());
        on_better += a < b;
    }
    MESSAGE("mean |lateral error| over 100 runs: calibrated ", on / 100, " cm, uncalibrated ", off / 100,
            " cm; calibrated better in ", on_better, " runs");
    CHECK(on < off);
}

}  // TEST_SUITE
