#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "archery/config.hpp"
#include "archery/controller.hpp"
#include "archery/report.hpp"

namespace archery {

// Scene + detector + shooter wired together for closed-loop simulation.
class SimWorld : public CalibrationWorld {
public:
    SimWorld(Scene scene, DetectorConfig detector, ShootingSession& session);

    void place_target(double lateral, double height) override;
    std::optional<double> detect_target_x() override;
    ShotRecord fire(const AimState& aim) override;

    // Full detection at the current target placement; memoized per placement.
    std::optional<TargetDetection> detect();
    const Scene& scene() const { return scene_; }
    ShootingSession& session() { return session_; }

private:
    Scene scene_;
    DetectorConfig detector_;
    ShootingSession& session_;
    std::map<std::pair<double, double>, std::optional<TargetDetection>> cache_;
};

struct AxisStats {
    int n = 0;
    double mean_x = 0.0, mean_y = 0.0;
    double var_x = 0.0, var_y = 0.0;  // sample variance, cm^2
    double spread_x = 0.0, spread_y = 0.0;  // largest per-axis distance between two shots
    double max_pairwise = 0.0;  // largest 2-D distance between two shots
};

// Statistics over rows that carry both impact coordinates.
AxisStats summarize(const std::vector<ReportRow>& rows);

struct ExperimentConfig {
    int id = 1;
    int n_shots = 10;
    double draw_length = 0.65;
    NoiseModel noise;
    bool calibrate = true;
};

ExperimentConfig experiment_config(const AppConfig& app, int id, std::uint64_t seed);

struct ExperimentResult {
    int id = 0;
    std::vector<ShotRecord> records;
    std::vector<ReportRow> rows;
    AxisStats stats;
    Scene scene;  // final target placement
    std::optional<CalibrationReport> calibration;
    std::optional<FitResult> fit;
    std::vector<RangeObservation> fit_rows;
    ShooterSetup shooter;  // as used for the shots (fitted bow for experiment 3)
};

// 1: zero-yaw/zero-roll wall shots. 2: render -> detect -> aim -> shoot at a
// target. 3: fit (efficiency, drag) to the range table, then a long-range sweep.
ExperimentResult run_experiment(const AppConfig& app, const ExperimentConfig& cfg);

// Seeds the calibration session separately from the shot session.
std::uint64_t calibration_seed(std::uint64_t seed);

}  // namespace archery
