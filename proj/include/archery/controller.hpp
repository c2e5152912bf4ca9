#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "archery/ballistics.hpp"
#include "archery/geometry.hpp"
#include "archery/kinematics.hpp"

namespace archery {

enum class ShootState { Nocked, Aimed, GrippedString, Drawn, Released, Fault };

std::string_view to_string(ShootState s);
ShootState shoot_state_from_string(std::string_view s);

// Enforces NOCKED -> AIMED -> GRIPPED_STRING -> DRAWN -> RELEASED, with FAULT
// reachable from anywhere. RELEASED and FAULT only leave through nock_new_arrow().
class ShotStateMachine {
public:
    ShootState state() const { return state_; }
    static bool is_legal(ShootState from, ShootState to);
    // Throws InvalidInput on an illegal transition; the state is left unchanged.
    void advance(ShootState to);
    void fault(std::string cause);
    void nock_new_arrow();
    const std::string& fault_cause() const { return fault_cause_; }

private:
    ShootState state_ = ShootState::Nocked;
    std::string fault_cause_;
};

struct Calibration {
    double k_p = 0.0;     // rad per pixel
    double x_ref = 0.0;   // px
    double roll_fixed = 0.0;  // rad
};

struct AimOrientation {
    double theta = 0.0;
    double phi = 0.0;
};

// yaw / (x - x_ref). Throws CalibrationFailed when x == x_ref.
double compute_gain(double yaw, double x, double x_ref);

AimOrientation aim_from_detection(double x, const Calibration& cal);

struct NoiseModel {
    double sigma_yaw = 0.0;   // rad per shot
    double sigma_roll = 0.0;  // rad per shot
    double drift_per_shot = 0.0;  // rad of yaw added after every shot
    std::uint64_t seed = 0;

    void validate() const;
};

struct ShotRecord {
    int shot_index = 0;
    AimState commanded;
    AimState realized;
    double speed = 0.0;
    LandingPoint landing;
    std::optional<WallImpact> wall;
    std::optional<double> detection_x;
    std::optional<double> detection_y;
    ShootState state = ShootState::Nocked;
    std::string fault;
};

struct ShooterSetup {
    BowModel bow;
    ArmModel right_arm;
    JointVector home;             // right-arm configuration before gripping
    Vec3 left_gripper_position;   // in the right-arm base frame
    IkConfig ik;
    std::size_t draw_waypoints = 10;
    double release_height = 1.30;
    double drag_coefficient = 0.003;
    std::optional<double> wall_distance = 10.0;
    double dt = 1e-4;
};

// A single shooting session: the arrow sequence shares one RNG stream and the
// accumulated yaw drift. Not thread safe; use one session per thread.
class ShootingSession {
public:
    ShootingSession(ShooterSetup setup, NoiseModel noise);

    // Runs steps AIM -> GRIP -> DRAW -> RELEASE for a freshly nocked arrow.
    // Kinematic or aim failures end in FAULT and are reported in the record.
    ShotRecord execute_shot(const AimState& commanded, std::optional<double> detection_x = std::nullopt,
                            std::optional<double> detection_y = std::nullopt);

    const ShooterSetup& setup() const { return setup_; }
    const ShotStateMachine& machine() const { return machine_; }
    int shots_fired() const { return shots_; }
    double accumulated_drift() const { return drift_; }

private:
    ShooterSetup setup_;
    NoiseModel noise_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> unit_normal_{0.0, 1.0};
    ShotStateMachine machine_;
    int shots_ = 0;
    double drift_ = 0.0;
};

// What calibration needs from the simulated scene.
class CalibrationWorld {
public:
    virtual ~CalibrationWorld() = default;
    virtual void place_target(double lateral, double height) = 0;
    // Horizontal pixel coordinate of the detected target, if any.
    virtual std::optional<double> detect_target_x() = 0;
    virtual ShotRecord fire(const AimState& aim) = 0;
};

struct CalibrationSettings {
    double draw_length = 0.65;
    double roll_fixed = 0.0;
    double wall_distance = 10.0;
    double lateral_tolerance = 0.01;  // m
    double yaw_bracket = 0.15;        // rad, bisection searches [-b, b]
    int max_bisections = 60;
};

struct CalibrationProbe {
    double offset = 0.0;  // m
    double yaw = 0.0;
    double x = 0.0;
    double gain = 0.0;
};

struct CalibrationReport {
    Calibration calibration;
    double spread_center_lateral = 0.0;
    double spread_center_height = 0.0;
    std::vector<CalibrationProbe> probes;
};

// Zero-yaw spread -> X_ref, then per-probe yaw bisection -> mean gain.
// Throws CalibrationFailed when there are no probes, detection fails, or a
// probe cannot be bracketed.
CalibrationReport calibrate(CalibrationWorld& world, int shots_per_probe, const std::vector<double>& probe_offsets,
                            const CalibrationSettings& settings);

}  // namespace archery
