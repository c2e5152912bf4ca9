#include "archery/experiment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "archery/error.hpp"

namespace archery {

SimWorld::SimWorld(Scene scene, DetectorConfig detector, ShootingSession& session)
    : scene_(std::move(scene)), detector_(detector), session_(session) {
    scene_.validate();
    detector_.validate();
}

void SimWorld::place_target(double lateral, double height) {
    scene_.target_lateral = lateral;
    scene_.target_height = height;
}

std::optional<TargetDetection> SimWorld::detect() {
    const auto key = std::make_pair(scene_.target_lateral, scene_.target_height);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::optional<TargetDetection> det;
    try {
        det = detect_target(render_target(scene_), detector_);
    } catch (const InvalidInput&) {
        det.reset();  // target outside the frame
    }
    cache_.emplace(key, det);
    return det;
}

std::optional<double> SimWorld::detect_target_x() {
    const auto det = detect();
    if (!det) return std::nullopt;
    return det->cx;
}

ShotRecord SimWorld::fire(const AimState& aim) { return session_.execute_shot(aim); }

AxisStats summarize(const std::vector<ReportRow>& rows) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.impact_x_cm && r.impact_y_cm) pts.emplace_back(*r.impact_x_cm, *r.impact_y_cm);
    }
    AxisStats s;
    s.n = static_cast<int>(pts.size());
    if (pts.empty()) return s;
    // Shifted sums: identical samples give exactly zero variance.
    const double kx = pts[0].first, ky = pts[0].second;
    double sx = 0, sy = 0, sxx = 0, syy = 0;
    for (const auto& [x, y] : pts) {
        sx += x - kx;
        sy += y - ky;
        sxx += (x - kx) * (x - kx);
        syy += (y - ky) * (y - ky);
    }
    s.mean_x = kx + sx / s.n;
    s.mean_y = ky + sy / s.n;
    if (s.n > 1) {
        s.var_x = std::max(0.0, (sxx - sx * sx / s.n) / (s.n - 1));
        s.var_y = std::max(0.0, (syy - sy * sy / s.n) / (s.n - 1));
    }
    const auto [min_x, max_x] = std::minmax_element(pts.begin(), pts.end(),
                                                    [](auto& a, auto& b) { return a.first < b.first; });
    const auto [min_y, max_y] = std::minmax_element(pts.begin(), pts.end(),
                                                    [](auto& a, auto& b) { return a.second < b.second; });
    s.spread_x = max_x->first - min_x->first;
    s.spread_y = max_y->second - min_y->second;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            s.max_pairwise = std::max(
                s.max_pairwise, std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second));
        }
    }
    return s;
}

ExperimentConfig experiment_config(const AppConfig& app, int id, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.id = id;
    cfg.n_shots = app.n_shots;
    cfg.draw_length = app.draw_length;
    cfg.noise = app.noise;
    cfg.noise.seed = seed;
    cfg.calibrate = app.calibration.enabled;
    return cfg;
}

std::uint64_t calibration_seed(std::uint64_t seed) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

ShotRecord detection_fault(int index, const AimState& aim) {
    ShotRecord r;
    r.shot_index = index;
    r.commanded = aim;
    r.realized = aim;
    r.state = ShootState::Fault;
    r.fault = "target not detected";
    return r;
}

// Wall coordinates in cm relative to (origin_lateral, origin_height).
ReportRow wall_row(const ShotRecord& rec, double wall_distance, double origin_lateral, double origin_height) {
    ReportRow row = make_row(rec);
    if (rec.state == ShootState::Released && rec.wall) {
        row.impact_x_cm = m_to_cm(rec.wall->lateral - origin_lateral);
        row.impact_y_cm = m_to_cm(rec.wall->height - origin_height);
        row.distance_m = std::hypot(wall_distance, rec.wall->lateral);
    } else if (rec.state == ShootState::Released) {
        row.distance_m = rec.landing.distance();
    }
    return row;
}

void run_wall_shots(ExperimentResult& out, ShootingSession& session, const ExperimentConfig& cfg) {
    const double wall = out.scene.wall_distance;
    for (int i = 0; i < cfg.n_shots; ++i) {
        const ShotRecord rec = session.execute_shot({0.0, 0.0, cfg.draw_length});
        out.rows.push_back(wall_row(rec, wall, 0.0, 0.0));
        out.records.push_back(rec);
    }
}

void run_target_shots(ExperimentResult& out, const AppConfig& app, const ExperimentConfig& cfg) {
    Calibration cal;
    cal.roll_fixed = app.calibration.roll_fixed;
    Scene scene = app.scene;

    if (cfg.calibrate) {
        NoiseModel cal_noise = cfg.noise;
        cal_noise.seed = calibration_seed(cfg.noise.seed);
        // Bisection needs a stationary response; per-shot drift would move
        // the impact point between volleys.
        cal_noise.drift_per_shot = 0.0;
        ShootingSession cal_session(out.shooter, cal_noise);
        SimWorld cal_world(scene, app.detector, cal_session);
        CalibrationSettings settings;
        settings.draw_length = cfg.draw_length;
        settings.roll_fixed = app.calibration.roll_fixed;
        settings.wall_distance = scene.wall_distance;
        settings.lateral_tolerance = app.calibration.lateral_tolerance;
        const CalibrationReport report =
            calibrate(cal_world, app.calibration.shots_per_probe, app.calibration.probe_offsets, settings);
        cal = report.calibration;
        scene.target_lateral = report.spread_center_lateral + app.exp2_target_offset;
        scene.target_height = report.spread_center_height;
        out.calibration = report;
    } else {
        scene.target_lateral += app.exp2_target_offset;
    }
    out.scene = scene;

    ShootingSession session(out.shooter, cfg.noise);
    SimWorld world(scene, app.detector, session);
    for (int i = 0; i < cfg.n_shots; ++i) {
        const auto det = world.detect();
        ShotRecord rec;
        if (!det) {
            rec = detection_fault(i, {0.0, cal.roll_fixed, cfg.draw_length});
        } else {
            const AimOrientation aim = aim_from_detection(det->cx, cal);
            rec = session.execute_shot({aim.theta, aim.phi, cfg.draw_length}, det->cx, det->cy);
            rec.shot_index = i;
        }
        out.rows.push_back(wall_row(rec, scene.wall_distance, scene.target_lateral, scene.target_height));
        out.records.push_back(rec);
    }
}

void run_range_sweep(ExperimentResult& out, const AppConfig& app, const ExperimentConfig& cfg) {
    FitOptions opt;
    opt.bow = out.shooter.bow;
    opt.release_height = out.shooter.release_height;
    opt.dt = out.shooter.dt;
    out.fit_rows = app.exp3.table;
    out.fit = fit_effective_parameters(out.fit_rows, opt);
    out.shooter.bow.efficiency = out.fit->efficiency;
    out.shooter.drag_coefficient = out.fit->drag_coefficient;
    out.shooter.wall_distance.reset();

    std::vector<std::pair<double, double>> shots;
    for (const auto& r : app.exp3.table) shots.emplace_back(r.draw_length, r.roll);
    for (const double d : app.exp3.sweep_draw_lengths) {
        for (const double phi : app.exp3.sweep_rolls) shots.emplace_back(d, phi);
    }

    ShootingSession session(out.shooter, cfg.noise);
    for (const auto& [d, phi] : shots) {
        const ShotRecord rec = session.execute_shot({0.0, phi, d});
        ReportRow row = make_row(rec);
        if (rec.state == ShootState::Released) {
            row.impact_x_cm = m_to_cm(rec.landing.y);
            row.impact_y_cm = m_to_cm(rec.landing.x);
            row.distance_m = rec.landing.distance();
        }
        out.rows.push_back(row);
        out.records.push_back(rec);
    }
}

}  // namespace

ExperimentResult run_experiment(const AppConfig& app, const ExperimentConfig& cfg) {
    app.validate();
    if (cfg.n_shots < 1) throw InvalidConfig("n_shots must be >= 1");
    if (cfg.draw_length < app.shooter.bow.brace_distance) {
        throw InvalidConfig("draw length is shorter than the brace distance");
    }
    ExperimentResult out;
    out.id = cfg.id;
    out.scene = app.scene;
    out.shooter = app.shooter;
    out.shooter.wall_distance = app.scene.wall_distance;

    switch (cfg.id) {
        case 1: {
            ShootingSession session(out.shooter, cfg.noise);
            run_wall_shots(out, session, cfg);
            break;
        }
        case 2:
            run_target_shots(out, app, cfg);
            break;
        case 3:
            run_range_sweep(out, app, cfg);
            break;
        default:
            throw InvalidConfig(fmt::format("unknown experiment id {}", cfg.id));
    }
    out.stats = summarize(out.rows);
    return out;
}

}  // namespace archery
