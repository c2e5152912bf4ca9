#include "archery/controller.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "archery/error.hpp"

namespace archery {

std::string_view to_string(ShootState s) {
    switch (s) {
        case ShootState::Nocked: return "NOCKED";
        case ShootState::Aimed: return "AIMED";
        case ShootState::GrippedString: return "GRIPPED_STRING";
        case ShootState::Drawn: return "DRAWN";
        case ShootState::Released: return "RELEASED";
        case ShootState::Fault: return "FAULT";
    }
    return "?";
}

ShootState shoot_state_from_string(std::string_view s) {
    for (auto st : {ShootState::Nocked, ShootState::Aimed, ShootState::GrippedString, ShootState::Drawn,
                    ShootState::Released, ShootState::Fault}) {
        if (to_string(st) == s) return st;
    }
    throw InvalidInput(fmt::format("unknown shoot state '{}'", s));
}

bool ShotStateMachine::is_legal(ShootState from, ShootState to) {
    if (to == ShootState::Fault) return true;
    switch (from) {
        case ShootState::Nocked: return to == ShootState::Aimed;
        case ShootState::Aimed: return to == ShootState::GrippedString;
        case ShootState::GrippedString: return to == ShootState::Drawn;
        case ShootState::Drawn: return to == ShootState::Released;
        case ShootState::Released:
        case ShootState::Fault: return false;
    }
    return false;
}

void ShotStateMachine::advance(ShootState to) {
    if (!is_legal(state_, to)) {
        throw InvalidInput(fmt::format("illegal shot transition {} -> {}", to_string(state_), to_string(to)));
    }
    state_ = to;
}

void ShotStateMachine::fault(std::string cause) {
    state_ = ShootState::Fault;
    fault_cause_ = std::move(cause);
}

void ShotStateMachine::nock_new_arrow() {
    state_ = ShootState::Nocked;
    fault_cause_.clear();
}

double compute_gain(double yaw, double x, double x_ref) {
    if (x == x_ref) {
        throw CalibrationFailed("degenerate calibration: target detected at the reference column");
    }
    return yaw / (x - x_ref);
}

AimOrientation aim_from_detection(double x, const Calibration& cal) {
    return {cal.k_p * (x - cal.x_ref), cal.roll_fixed};
}

void NoiseModel::validate() const {
    if (!(sigma_yaw >= 0.0) || !(sigma_roll >= 0.0) || !std::isfinite(drift_per_shot)) {
        throw InvalidConfig("noise sigmas must be non-negative and drift finite");
    }
}

ShootingSession::ShootingSession(ShooterSetup setup, NoiseModel noise)
    : setup_(std::move(setup)), noise_(noise), rng_(noise.seed) {
    noise_.validate();
    setup_.bow.validate();
    setup_.ik.validate();
    if (setup_.home.size() != setup_.right_arm.n_joints()) {
        throw InvalidConfig("home configuration does not match the arm");
    }
}

ShotRecord ShootingSession::execute_shot(const AimState& commanded, std::optional<double> detection_x,
                                         std::optional<double> detection_y) {
    machine_.nock_new_arrow();
    ShotRecord rec;
    rec.shot_index = shots_;
    rec.commanded = commanded;
    rec.detection_x = detection_x;
    rec.detection_y = detection_y;

    // Two draws per shot regardless of the sigmas keeps the stream aligned
    // between configurations.
    const double n_yaw = unit_normal_(rng_);
    const double n_roll = unit_normal_(rng_);
    rec.realized = commanded;
    rec.realized.theta = commanded.theta + noise_.sigma_yaw * n_yaw + drift_;
    rec.realized.phi = commanded.phi + noise_.sigma_roll * n_roll;
    ++shots_;
    drift_ += noise_.drift_per_shot;

    auto finish_fault = [&](const std::string& cause) {
        machine_.fault(cause);
        rec.state = ShootState::Fault;
        rec.fault = cause;
        return rec;
    };

    if (!commanded.valid() || commanded.draw_length < setup_.bow.brace_distance || !rec.realized.valid()) {
        return finish_fault("invalid aim");
    }
    machine_.advance(ShootState::Aimed);

    Pose left;
    left.position = setup_.left_gripper_position;
    left.yaw = commanded.theta;
    left.roll = commanded.phi;
    try {
        AimState brace = commanded;
        brace.draw_length = AngleConvention::brace_distance;
        const auto grip = track_draw(setup_.right_arm, setup_.home, left, brace, 1, setup_.ik);
        machine_.advance(ShootState::GrippedString);
        track_draw(setup_.right_arm, grip.back(), left, commanded, setup_.draw_waypoints, setup_.ik);
        machine_.advance(ShootState::Drawn);
    } catch (const DrawInfeasible& e) {
        return finish_fault(e.what());
    }

    rec.speed = launch_speed(setup_.bow, commanded.draw_length);
    LaunchState launch;
    launch.speed = rec.speed;
    launch.elevation = rec.realized.phi;
    launch.azimuth = rec.realized.theta;
    launch.release_height = setup_.release_height;
    launch.drag_coefficient = setup_.drag_coefficient;
    rec.landing = integrate_flight(launch, setup_.wall_distance, setup_.dt);
    rec.wall = rec.landing.wall;
    machine_.advance(ShootState::Released);
    rec.state = ShootState::Released;
    return rec;
}

namespace {

struct MeanImpact {
    double lateral = 0.0;
    double height = 0.0;
};

MeanImpact volley(CalibrationWorld& world, const AimState& aim, int shots) {
    MeanImpact m;
    int hits = 0;
    for (int i = 0; i < shots; ++i) {
        const ShotRecord r = world.fire(aim);
        if (r.state != ShootState::Released || !r.wall) {
            throw CalibrationFailed(fmt::format("calibration shot did not reach the wall: {}",
                                                r.fault.empty() ? "arrow landed short" : r.fault));
        }
        m.lateral += r.wall->lateral;
        m.height += r.wall->height;
        ++hits;
    }
    m.lateral /= hits;
    m.height /= hits;
    return m;
}

}  // namespace

CalibrationReport calibrate(CalibrationWorld& world, int shots_per_probe, const std::vector<double>& probe_offsets,
                            const CalibrationSettings& settings) {
    if (probe_offsets.empty()) {
        throw CalibrationFailed("calibration needs at least one probe offset");
    }
    if (shots_per_probe < 1) {
        throw CalibrationFailed("calibration needs at least one shot per probe");
    }
    CalibrationReport report;
    report.calibration.roll_fixed = settings.roll_fixed;

    AimState aim{0.0, settings.roll_fixed, settings.draw_length};
    const MeanImpact center = volley(world, aim, shots_per_probe);
    report.spread_center_lateral = center.lateral;
    report.spread_center_height = center.height;

    world.place_target(center.lateral, center.height);
    const auto x_ref = world.detect_target_x();
    if (!x_ref) {
        throw CalibrationFailed("target not detected at the spread center");
    }
    report.calibration.x_ref = *x_ref;

    double gain_sum = 0.0;
    for (const double offset : probe_offsets) {
        const double goal = center.lateral + offset;
        world.place_target(goal, center.height);
        const auto x = world.detect_target_x();
        if (!x) {
            throw CalibrationFailed(fmt::format("target not detected at probe offset {} m", offset));
        }
        double lo = -settings.yaw_bracket;
        double hi = settings.yaw_bracket;
        double yaw = 0.0;
        bool hit = false;
        for (int it = 0; it < settings.max_bisections; ++it) {
            yaw = 0.5 * (lo + hi);
            aim.theta = yaw;
            const double err = volley(world, aim, shots_per_probe).lateral - goal;
            if (std::abs(err) <= settings.lateral_tolerance) {
                hit = true;
                break;
            }
            (err < 0 ? lo : hi) = yaw;
        }
        if (!hit) {
            throw CalibrationFailed(fmt::format("yaw search did not hit the probe at offset {} m", offset));
        }
        CalibrationProbe p{offset, yaw, *x, compute_gain(yaw, *x, *x_ref)};
        gain_sum += p.gain;
        report.probes.push_back(p);
    }
    report.calibration.k_p = gain_sum / static_cast<double>(probe_offsets.size());
    return report;
}

}  // namespace archery
