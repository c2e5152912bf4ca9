#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "archery/geometry.hpp"

namespace archery {

struct Joint {
    std::string name;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // unit, in the parent link frame
    Eigen::Vector3d offset = Eigen::Vector3d::Zero(); // to the next joint (or the tool), child frame
    double lo = -3.14159;
    double hi = 3.14159;
};

// Serial chain of revolute joints. The first joint sits at the base origin;
// the last joint's offset is the tool point.
class ArmModel {
public:
    ArmModel() = default;
    // Throws InvalidConfig unless the invariants hold.
    explicit ArmModel(std::vector<Joint> joints, std::string name = {});

    std::size_t n_joints() const { return joints_.size(); }
    const std::vector<Joint>& joints() const { return joints_; }
    const std::string& name() const { return name_; }
    // Sum of link offset lengths.
    double reach() const;

private:
    std::vector<Joint> joints_;
    std::string name_;
};

struct JointVector {
    Eigen::VectorXd q;

    JointVector() = default;
    explicit JointVector(Eigen::VectorXd values) : q(std::move(values)) {}
    static JointVector zeros(std::size_t n) { return JointVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))); }

    std::size_t size() const { return static_cast<std::size_t>(q.size()); }
    double operator[](std::size_t i) const { return q[static_cast<Eigen::Index>(i)]; }
    double& operator[](std::size_t i) { return q[static_cast<Eigen::Index>(i)]; }
};

// Z-Y-X intrinsic (yaw, pitch, roll), angles wrapped to (-pi, pi].
struct Pose {
    Vec3 position;
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;

    Eigen::Matrix3d rotation() const;
    static Pose from(const Eigen::Vector3d& p, const Eigen::Matrix3d& r);
};

double wrap_angle(double a);

struct IkConfig {
    int max_iterations = 200;
    double position_tolerance = 1e-4;
    double orientation_tolerance = 1e-3;
    double damping = 1e-3;
    double step_scale = 0.5;

    void validate() const;
};

struct IkReport {
    bool converged = false;
    int iterations = 0;
    double position_error = 0.0;
    double orientation_error = 0.0;
};

struct IkResult {
    JointVector q;
    IkReport report;
};

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

Pose forward_kinematics(const ArmModel& arm, const JointVector& q);

// Geometric Jacobian: rows 0-2 linear velocity, rows 3-5 angular velocity, base frame.
Jacobian jacobian(const ArmModel& arm, const JointVector& q);

// 6-vector (position error, rotation vector of R_target * R_current^T).
Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current);

// J^T (J J^T + lambda^2 I)^-1 e
Eigen::VectorXd damped_pinv_step(const Jacobian& j, const Eigen::Matrix<double, 6, 1>& e, double damping);

JointVector clamp_to_limits(const ArmModel& arm, JointVector q);

// Iterative damped-least-squares IK. Non-convergence is reported, not thrown.
IkResult solve_ik(const ArmModel& arm, const JointVector& q0, const Pose& target, const IkConfig& cfg);

// Pose the right gripper must take to hold the string at `aim`, given the left
// gripper pose, both in the right-arm base frame.
Pose right_gripper_pose(const Pose& left_pose, const AimState& aim);

// Draw lengths visited by track_draw.
std::vector<double> draw_waypoints(double draw_length, std::size_t n_waypoints);

// Solves IK along the draw vector from the brace distance to aim.draw_length,
// seeding each solve with the previous solution. Throws DrawInfeasible on the
// first waypoint that does not converge.
std::vector<JointVector> track_draw(const ArmModel& arm_right, const JointVector& q_current, const Pose& left_pose,
                                    const AimState& aim, std::size_t n_waypoints, const IkConfig& cfg);

// YAML arm description. Unknown keys are rejected with InvalidConfig.
ArmModel load_arm_model(const std::filesystem::path& path);
ArmModel parse_arm_model(const std::string& yaml_text);

}  // namespace archery
