#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "archery/ballistics.hpp"
#include "archery/controller.hpp"
#include "archery/kinematics.hpp"
#include "archery/scene.hpp"
#include "archery/vision.hpp"

namespace archery {

struct CalibrationConfig {
    bool enabled = true;
    int shots_per_probe = 3;
    std::vector<double> probe_offsets{-0.5, 0.5};  // m
    double roll_fixed = deg_to_rad(2.0);
    double lateral_tolerance = 0.01;  // m
};

struct Exp3Config {
    std::vector<RangeObservation> table{
        {0.70, deg_to_rad(4.0), 44.0},
        {0.70, deg_to_rad(10.0), 55.0},
        {0.65, deg_to_rad(12.0), 50.0},
    };
    std::vector<double> sweep_draw_lengths{0.60, 0.65, 0.70};
    std::vector<double> sweep_rolls{deg_to_rad(4.0), deg_to_rad(8.0), deg_to_rad(12.0), deg_to_rad(16.0)};
};

// Everything a run needs. SI units internally; the YAML file uses the unit
// suffix in each key name (_cm, _deg, _g, ...).
struct AppConfig {
    Scene scene;
    ShooterSetup shooter;
    NoiseModel noise;
    DetectorConfig detector;
    CalibrationConfig calibration;
    Exp3Config exp3;
    int n_shots = 10;
    double draw_length = 0.65;
    // Experiment 2 target position, right of the zero-yaw spread center
    // (right of the scene target when calibration is off).
    double exp2_target_offset = 0.30;

    void validate() const;
};

// Defaults with the shipped default arm.
AppConfig default_config();

// Throws InvalidConfig on unknown keys or bad values, IoError on read failures.
// Relative arm paths resolve against the config file's directory.
AppConfig load_config(const std::filesystem::path& path);
AppConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir);

std::filesystem::path default_arm_path();
std::filesystem::path default_config_path();

}  // namespace archery
