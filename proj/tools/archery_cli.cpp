// Command-line driver: render, detect, calibrate, shoot, experiment, fit-ballistics.
// Lengths are given in centimeters and angles in degrees.

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "archery/config.hpp"
#include "archery/error.hpp"
#include "archery/experiment.hpp"
#include "archery/report.hpp"
#include "archery/scene.hpp"
#include "archery/vision.hpp"

using namespace archery;

namespace {

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidInput:
        case ErrorKind::InvalidConfig:
            return 1;
        case ErrorKind::DetectionFailed:
        case ErrorKind::CalibrationFailed:
        case ErrorKind::DrawInfeasible:
            return 2;
        case ErrorKind::Io:
            return 3;
    }
    return 1;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
};

AppConfig load(const Common& c) { return c.config.empty() ? load_config(default_config_path()) : load_config(c.config); }

std::uint64_t require_seed(const Common& c) {
    if (!c.seed) throw InvalidConfig("--seed is required for stochastic commands");
    return *c.seed;
}

// Noise overrides shared by shoot and experiment.
struct NoiseFlags {
    std::optional<double> sigma_yaw_deg, sigma_roll_deg, drift_deg;
    bool noiseless = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--sigma-yaw-deg", sigma_yaw_deg, "Yaw noise per shot (deg)");
        cmd->add_option("--sigma-roll-deg", sigma_roll_deg, "Roll noise per shot (deg)");
        cmd->add_option("--drift-deg", drift_deg, "Yaw drift added after every shot (deg)");
        cmd->add_flag("--noiseless", noiseless, "Zero all noise and drift");
    }
    void apply(NoiseModel& n) const {
        if (noiseless) n.sigma_yaw = n.sigma_roll = n.drift_per_shot = 0.0;
        if (sigma_yaw_deg) n.sigma_yaw = deg_to_rad(*sigma_yaw_deg);
        if (sigma_roll_deg) n.sigma_roll = deg_to_rad(*sigma_roll_deg);
        if (drift_deg) n.drift_per_shot = deg_to_rad(*drift_deg);
    }
};

void print_detection(const std::optional<TargetDetection>& det) {
    if (!det) throw DetectionFailed("no concentric target found");
    fmt::print("cx={} cy={} r_avg={:.3f} positive_directions={}\n", det->cx, det->cy, det->r_avg,
               det->positive_directions);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated robot archer: target detection, arm kinematics and arrow flight"};
    app.require_subcommand(1);
    Common common;
    app.add_option("-c,--config", common.config, "YAML config (default: shipped data/default_config.yaml)");
    app.add_option("--seed", common.seed, "RNG seed (required for stochastic commands)");

    // render
    auto* render = app.add_subcommand("render", "Render the scene target as a PGM image");
    std::string render_out;
    std::optional<double> render_lat, render_h, render_focal;
    double render_noise = 0.0;
    render->add_option("-o,--out", render_out, "Output PGM")->required();
    render->add_option("--lateral-cm", render_lat, "Target center, right of the camera axis");
    render->add_option("--height-cm", render_h, "Target center above ground");
    render->add_option("--focal-px", render_focal, "Camera focal length");
    render->add_option("--pixel-noise", render_noise, "Gaussian pixel noise sigma (needs --seed)")
        ->check(CLI::NonNegativeNumber);

    // detect
    auto* detect = app.add_subcommand("detect", "Detect the concentric target in a PGM/PPM image");
    std::string detect_in;
    detect->add_option("image", detect_in, "Input image")->required();

    // calibrate
    auto* calib = app.add_subcommand("calibrate", "Run the yaw gain calibration in simulation");
    NoiseFlags calib_noise;
    calib_noise.add(calib);

    // shoot
    auto* shoot = app.add_subcommand("shoot", "Fire arrows at an explicit aim");
    double shoot_theta = 0.0, shoot_phi = 0.0;
    std::optional<double> shoot_draw;
    int shoot_n = 1;
    bool shoot_no_wall = false;
    std::string shoot_csv, shoot_traj;
    NoiseFlags shoot_noise;
    shoot->add_option("--theta-deg", shoot_theta, "Commanded yaw");
    shoot->add_option("--phi-deg", shoot_phi, "Commanded roll");
    shoot->add_option("--draw-cm", shoot_draw, "Draw length");
    shoot->add_option("-n,--shots", shoot_n, "Number of arrows")->check(CLI::PositiveNumber);
    shoot->add_flag("--no-wall", shoot_no_wall, "Fly to the ground instead of stopping at the wall");
    shoot->add_option("--csv", shoot_csv, "Write the shot log here instead of stdout");
    shoot->add_option("--trajectory-svg", shoot_traj, "Plot the first arrow's flight");
    shoot_noise.add(shoot);

    // experiment
    auto* exp = app.add_subcommand("experiment", "Reproduce experiment 1, 2 or 3");
    int exp_id = 1;
    std::optional<int> exp_n;
    std::optional<double> exp_draw;
    std::string exp_csv, exp_svg;
    bool exp_no_cal = false;
    NoiseFlags exp_noise;
    exp->add_option("id", exp_id, "1: wall shots, 2: vision-aimed, 3: long-range sweep")
        ->required()
        ->check(CLI::Range(1, 3));
    exp->add_option("-n,--shots", exp_n, "Shots (experiments 1 and 2)")->check(CLI::PositiveNumber);
    exp->add_option("--draw-cm", exp_draw, "Draw length (experiments 1 and 2)");
    exp->add_option("--csv", exp_csv, "Write the shot log here instead of stdout");
    exp->add_option("--svg", exp_svg, "Write a scatter plot of impacts");
    exp->add_flag("--no-calibration", exp_no_cal, "Experiment 2 with k_p = 0 (yaw fixed at 0)");
    exp_noise.add(exp);

    // fit-ballistics
    auto* fit = app.add_subcommand("fit-ballistics", "Fit bow efficiency and drag to the range table");
    std::optional<std::size_t> fit_row;
    std::optional<double> fit_drag;
    fit->add_option("--row", fit_row, "Fit a single table row (0-based)");
    fit->add_option("--fixed-drag", fit_drag, "Hold the drag coefficient (1/m) fixed")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        AppConfig cfg = load(common);

        if (*render) {
            if (render_lat) cfg.scene.target_lateral = cm_to_m(*render_lat);
            if (render_h) cfg.scene.target_height = cm_to_m(*render_h);
            if (render_focal) cfg.scene.camera.focal_px = *render_focal;
            GrayImage img = render_target(cfg.scene);
            if (render_noise > 0.0) {
                std::mt19937_64 rng(require_seed(common));
                add_gaussian_noise(img, render_noise, rng);
            }
            write_pgm(render_out, img);
            const PixelPoint c = project(cfg.scene, cfg.scene.target_lateral, cfg.scene.target_height);
            fmt::print("wrote {} ({}x{}), center=({:.2f}, {:.2f}) r_avg={:.2f} px\n", render_out, img.width(),
                       img.height(), c.x, c.y,
                       cfg.scene.camera.focal_px * cfg.scene.ring_spacing() / cfg.scene.wall_distance);
        } else if (*detect) {
            print_detection(detect_target(read_netpbm_gray(detect_in), cfg.detector));
        } else if (*calib) {
            calib_noise.apply(cfg.noise);
            cfg.noise.seed = calibration_seed(require_seed(common));
            cfg.noise.drift_per_shot = 0.0;
            ShooterSetup setup = cfg.shooter;
            setup.wall_distance = cfg.scene.wall_distance;
            ShootingSession session(setup, cfg.noise);
            SimWorld world(cfg.scene, cfg.detector, session);
            CalibrationSettings s;
            s.draw_length = cfg.draw_length;
            s.roll_fixed = cfg.calibration.roll_fixed;
            s.wall_distance = cfg.scene.wall_distance;
            s.lateral_tolerance = cfg.calibration.lateral_tolerance;
            const auto rep = calibrate(world, cfg.calibration.shots_per_probe, cfg.calibration.probe_offsets, s);
            fmt::print("spread_center_cm=({:.3f}, {:.3f})\n", m_to_cm(rep.spread_center_lateral),
                       m_to_cm(rep.spread_center_height));
            fmt::print("x_ref_px={}\n", rep.calibration.x_ref);
            for (const auto& p : rep.probes) {
                fmt::print("probe offset_cm={:.1f} yaw_deg={:.5f} x_px={} gain={:.6e}\n", m_to_cm(p.offset),
                           rad_to_deg(p.yaw), p.x, p.gain);
            }
            fmt::print("k_p={:.6e} rad/px (1/f = {:.6e})\n", rep.calibration.k_p, 1.0 / cfg.scene.camera.focal_px);
        } else if (*shoot) {
            shoot_noise.apply(cfg.noise);
            cfg.noise.seed = require_seed(common);
            ShooterSetup setup = cfg.shooter;
            setup.wall_distance = cfg.scene.wall_distance;
            if (shoot_no_wall) setup.wall_distance.reset();
            const AimState aim{deg_to_rad(shoot_theta), deg_to_rad(shoot_phi),
                               shoot_draw ? cm_to_m(*shoot_draw) : cfg.draw_length};
            ShootingSession session(setup, cfg.noise);
            std::vector<ReportRow> rows;
            std::optional<ShotRecord> first;
            for (int i = 0; i < shoot_n; ++i) {
                const ShotRecord rec = session.execute_shot(aim);
                if (!first) first = rec;
                ReportRow row = make_row(rec);
                if (rec.state == ShootState::Released) {
                    if (rec.wall) {
                        row.impact_x_cm = m_to_cm(rec.wall->lateral);
                        row.impact_y_cm = m_to_cm(rec.wall->height);
                        row.distance_m = std::hypot(*setup.wall_distance, rec.wall->lateral);
                    } else {
                        row.impact_x_cm = m_to_cm(rec.landing.y);
                        row.impact_y_cm = m_to_cm(rec.landing.x);
                        row.distance_m = rec.landing.distance();
                    }
                } else {
                    std::cerr << fmt::format("shot {}: FAULT: {}\n", rec.shot_index, rec.fault);
                }
                rows.push_back(row);
            }
            if (shoot_csv.empty()) {
                std::cout << format_csv(rows);
            } else {
                emit_csv(shoot_csv, rows);
            }
            if (!shoot_traj.empty() && first && first->state == ShootState::Released) {
                LaunchState l;
                l.speed = first->speed;
                l.elevation = first->realized.phi;
                l.azimuth = first->realized.theta;
                l.release_height = setup.release_height;
                l.drag_coefficient = setup.drag_coefficient;
                emit_svg_trajectory(shoot_traj, sample_trajectory(l, setup.dt, 50),
                                    fmt::format("Shot 0: {:.1f} m/s, roll {:.2f} deg", l.speed, rad_to_deg(l.elevation)));
            }
        } else if (*exp) {
            ExperimentConfig ec = experiment_config(cfg, exp_id, require_seed(common));
            exp_noise.apply(ec.noise);
            if (exp_n) ec.n_shots = *exp_n;
            if (exp_draw) ec.draw_length = cm_to_m(*exp_draw);
            if (exp_no_cal) ec.calibrate = false;
            const ExperimentResult res = run_experiment(cfg, ec);
            if (exp_csv.empty()) {
                std::cout << format_csv(res.rows);
            } else {
                emit_csv(exp_csv, res.rows);
            }
            if (!exp_svg.empty()) {
                ScatterStyle style;
                if (exp_id == 1) {
                    style.title = "Experiment 1: wall impacts, yaw 0, roll 0";
                    style.y_label = "Y, height above ground (cm)";
                } else if (exp_id == 2) {
                    style.title = "Experiment 2: vision-aimed impacts";
                    style.y_label = "Y, relative to target center (cm)";
                    const double r = m_to_cm(res.scene.ring_spacing());
                    style.rings_cm = {m_to_cm(res.scene.inner_ring_diameter) / 2, r, 2 * r, 3 * r};
                } else {
                    style.title = "Experiment 3: landing points";
                    style.x_label = "lateral (cm)";
                    style.y_label = "downrange (cm)";
                }
                emit_svg_scatter(exp_svg, res.rows, style);
            }
            if (!exp_csv.empty()) {
                const auto& s = res.stats;
                fmt::print("experiment {}: {} impacts, mean=({:.3f}, {:.3f}) cm, var=({:.3f}, {:.3f}) cm^2, "
                           "spread=({:.3f}, {:.3f}) cm, max_pairwise={:.3f} cm\n",
                           res.id, s.n, s.mean_x, s.mean_y, s.var_x, s.var_y, s.spread_x, s.spread_y,
                           s.max_pairwise);
                if (res.calibration) {
                    fmt::print("calibration: k_p={:.6e} rad/px x_ref={} px\n", res.calibration->calibration.k_p,
                               res.calibration->calibration.x_ref);
                }
                if (res.fit) {
                    fmt::print("fit: efficiency={:.4f} drag={:.6f} 1/m\n", res.fit->efficiency,
                               res.fit->drag_coefficient);
                }
            }
        } else if (*fit) {
            std::vector<RangeObservation> rows = cfg.exp3.table;
            if (fit_row) {
                if (*fit_row >= rows.size()) throw InvalidInput("--row is out of range");
                rows = {rows[*fit_row]};
                if (!fit_drag) fit_drag = 0.0;
            }
            FitOptions opt;
            opt.bow = cfg.shooter.bow;
            opt.release_height = cfg.shooter.release_height;
            opt.dt = cfg.shooter.dt;
            opt.fixed_drag = fit_drag;
            const FitResult r = fit_effective_parameters(rows, opt);
            fmt::print("efficiency={:.6f} drag={:.6f} 1/m sse={:.6f} m^2\n", r.efficiency, r.drag_coefficient,
                       r.sum_squared);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                fmt::print("D_L={:.1f} cm roll={:.1f} deg measured={:.2f} m predicted={:.3f} m residual={:+.3f} m\n",
                           m_to_cm(rows[i].draw_length), rad_to_deg(rows[i].roll), rows[i].range, r.predicted[i],
                           r.residuals[i]);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
