#pragma once

#include <cmath>
#include <numbers>

namespace archery {

// Cartesian vector in meters. Positions along the draw vector are expressed
// in the left-gripper frame: Z up, Y along the draw direction at zero yaw and
// roll, X completing the right-handed triad.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr bool operator==(const Vec3&) const = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

// Left-gripper orientation plus draw length: the full parameterization of a shot.
//   theta       yaw, rotation about Z, |theta| <= pi
//   phi         roll, rotation about X, |phi| <= pi/2
//   draw_length distance from the arrow rest along the draw vector, >= 0
struct AimState {
    double theta = 0.0;
    double phi = 0.0;
    double draw_length = 0.0;

    // Throws InvalidInput when an invariant is violated.
    static AimState make(double theta, double phi, double draw_length);
    bool valid() const;
};

struct AngleConvention {
    static constexpr double right_gripper_yaw_offset = -std::numbers::pi / 2.0;
    // String rest point measured from the arrow rest.
    static constexpr double brace_distance = 0.22;
};

// Offset from the left gripper to the point at `draw_length` along the draw vector.
Vec3 draw_delta(const AimState& aim);

// Where the right gripper has to be to hold the string at the aimed draw length.
Vec3 right_gripper_target(const Vec3& left_pos, const AimState& aim);

constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }
constexpr double cm_to_m(double cm) { return cm / 100.0; }
constexpr double m_to_cm(double m) { return m * 100.0; }

}  // namespace archery
