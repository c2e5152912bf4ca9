#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace archery {

inline constexpr double kGravity = 9.80665;

// Linear-spring bow: draw force grows in proportion to extension past brace.
struct BowModel {
    double rated_draw_force = 71.2;     // N (16 lbf)
    double rated_draw_length = 0.7112;  // m (28 in)
    double brace_distance = 0.22;       // m
    double efficiency = 0.75;
    double arrow_mass = 0.020;  // kg

    double spring_constant() const { return rated_draw_force / (rated_draw_length - brace_distance); }
    void validate() const;
};

// Throws InvalidInput when draw_length < brace distance.
double launch_speed(const BowModel& bow, double draw_length);

struct LaunchState {
    double speed = 0.0;           // m/s
    double elevation = 0.0;       // rad above horizontal
    double azimuth = 0.0;         // rad, positive to the right
    double release_height = 1.30; // m
    double drag_coefficient = 0.003;  // 1/m, quadratic drag per unit mass
};

struct WallImpact {
    double height = 0.0;   // z above ground
    double lateral = 0.0;  // positive to the right
};

struct LandingPoint {
    double x = 0.0;  // downrange
    double y = 0.0;  // lateral
    double flight_time = 0.0;
    std::optional<WallImpact> wall;

    double distance() const;
};

struct TrajectorySample {
    double t, x, y, z, vx, vy, vz;
};

// RK4 flight until the first ground crossing. Events inside the last step are
// located on the cubic Hermite interpolant of that step.
//
// The flight is integrated in the vertical plane of the launch azimuth; no
// lateral force acts, so the ground track is a straight line. The wall impact
// is taken where the ground track has covered `wall_distance`, reported as
// height there and lateral offset wall_distance * tan(azimuth).
LandingPoint integrate_flight(const LaunchState& launch, std::optional<double> wall_distance, double dt = 1e-4);

// Same integration, returning every `stride`-th step plus the landing point.
std::vector<TrajectorySample> sample_trajectory(const LaunchState& launch, double dt = 1e-4, int stride = 1);

struct RangeObservation {
    double draw_length;  // m
    double roll;         // rad
    double range;        // m
};

struct FitOptions {
    BowModel bow;
    double release_height = 1.30;
    double dt = 1e-4;
    // Step used while scanning the grid; the refined optimum uses `dt`.
    double grid_dt = 2e-3;
    std::optional<double> fixed_drag;
};

struct FitResult {
    double efficiency = 0.0;
    double drag_coefficient = 0.0;
    std::vector<double> predicted;
    std::vector<double> residuals;  // predicted - measured
    double sum_squared = 0.0;
};

// Predicted landing distance for one observation row at (efficiency, drag).
double predict_range(const RangeObservation& obs, double efficiency, double drag, const FitOptions& opt, double dt);

// Least-squares fit of (efficiency, drag) to measured ranges: grid scan over
// efficiency in [0.3, 1.0] step 0.01 and drag in [0, 0.02] step 2.5e-4, then
// a shrinking pattern search. Needs at least as many rows as free parameters.
FitResult fit_effective_parameters(const std::vector<RangeObservation>& observations, const FitOptions& opt = {});

}  // namespace archery
