#include "archery/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "archery/error.hpp"

namespace archery {

ArmModel::ArmModel(std::vector<Joint> joints, std::string name) : joints_(std::move(joints)), name_(std::move(name)) {
    if (joints_.empty()) {
        throw InvalidConfig("arm needs at least one joint");
    }
    for (const auto& j : joints_) {
        if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
            throw InvalidConfig(fmt::format("joint '{}' axis is not unit length", j.name));
        }
        if (!std::isfinite(j.lo) || !std::isfinite(j.hi) || j.lo > j.hi) {
            throw InvalidConfig(fmt::format("joint '{}' has invalid limits [{}, {}]", j.name, j.lo, j.hi));
        }
        if (!j.offset.allFinite()) {
            throw InvalidConfig(fmt::format("joint '{}' offset is not finite", j.name));
        }
    }
}

double ArmModel::reach() const {
    double r = 0.0;
    for (const auto& j : joints_) r += j.offset.norm();
    return r;
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

Eigen::Matrix3d Pose::rotation() const {
    return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

Pose Pose::from(const Eigen::Vector3d& p, const Eigen::Matrix3d& r) {
    Pose pose;
    pose.position = {p.x(), p.y(), p.z()};
    pose.yaw = wrap_angle(std::atan2(r(1, 0), r(0, 0)));
    pose.pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    pose.roll = wrap_angle(std::atan2(r(2, 1), r(2, 2)));
    return pose;
}

void IkConfig::validate() const {
    if (max_iterations <= 0 || !(position_tolerance > 0) || !(orientation_tolerance > 0) || !(damping > 0) ||
        !(step_scale > 0)) {
        throw InvalidConfig("IK settings must all be positive");
    }
}

namespace {

void check_dims(const ArmModel& arm, const JointVector& q) {
    if (q.size() != arm.n_joints()) {
        throw InvalidInput(fmt::format("joint vector has {} entries, arm has {} joints", q.size(), arm.n_joints()));
    }
}

struct ChainState {
    std::vector<Eigen::Vector3d> joint_pos;
    std::vector<Eigen::Vector3d> joint_axis;  // world frame
    Eigen::Vector3d tool = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
};

ChainState walk_chain(const ArmModel& arm, const JointVector& q) {
    check_dims(arm, q);
    ChainState s;
    s.joint_pos.reserve(arm.n_joints());
    s.joint_axis.reserve(arm.n_joints());
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    for (std::size_t i = 0; i < arm.n_joints(); ++i) {
        const auto& j = arm.joints()[i];
        s.joint_pos.push_back(p);
        s.joint_axis.push_back(r * j.axis);
        r = r * Eigen::AngleAxisd(q[i], j.axis).toRotationMatrix();
        p += r * j.offset;
    }
    s.tool = p;
    s.rot = r;
    return s;
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

Pose forward_kinematics(const ArmModel& arm, const JointVector& q) {
    const auto s = walk_chain(arm, q);
    return Pose::from(s.tool, s.rot);
}

Jacobian jacobian(const ArmModel& arm, const JointVector& q) {
    const auto s = walk_chain(arm, q);
    Jacobian j(6, static_cast<Eigen::Index>(arm.n_joints()));
    for (std::size_t i = 0; i < arm.n_joints(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        j.block<3, 1>(0, c) = s.joint_axis[i].cross(s.tool - s.joint_pos[i]);
        j.block<3, 1>(3, c) = s.joint_axis[i];
    }
    return j;
}

Eigen::Matrix<double, 6, 1> pose_error(const Pose& target, const Pose& current) {
    Eigen::Matrix<double, 6, 1> e;
    e.head<3>() = to_eigen(target.position) - to_eigen(current.position);
    const Eigen::AngleAxisd aa(target.rotation() * current.rotation().transpose());
    e.tail<3>() = aa.angle() * aa.axis();
    return e;
}

Eigen::VectorXd damped_pinv_step(const Jacobian& j, const Eigen::Matrix<double, 6, 1>& e, double damping) {
    Eigen::Matrix<double, 6, 6> a = j * j.transpose();
    a.diagonal().array() += damping * damping;
    return j.transpose() * a.ldlt().solve(e);
}

JointVector clamp_to_limits(const ArmModel& arm, JointVector q) {
    check_dims(arm, q);
    for (std::size_t i = 0; i < arm.n_joints(); ++i) {
        q[i] = std::clamp(q[i], arm.joints()[i].lo, arm.joints()[i].hi);
    }
    return q;
}

IkResult solve_ik(const ArmModel& arm, const JointVector& q0, const Pose& target, const IkConfig& cfg) {
    cfg.validate();
    check_dims(arm, q0);
    IkResult out{clamp_to_limits(arm, q0), {}};
    for (int it = 0;; ++it) {
        const auto s = walk_chain(arm, out.q);
        const auto e = pose_error(target, Pose::from(s.tool, s.rot));
        out.report.iterations = it;
        out.report.position_error = e.head<3>().norm();
        out.report.orientation_error = e.tail<3>().norm();
        if (out.report.position_error <= cfg.position_tolerance &&
            out.report.orientation_error <= cfg.orientation_tolerance) {
            out.report.converged = true;
            return out;
        }
        if (it == cfg.max_iterations) return out;
        const Eigen::VectorXd dq = damped_pinv_step(jacobian(arm, out.q), e, cfg.damping);
        out.q = clamp_to_limits(arm, JointVector(out.q.q + cfg.step_scale * dq));
    }
}

Pose right_gripper_pose(const Pose& left_pose, const AimState& aim) {
    Pose p;
    p.position = right_gripper_target(left_pose.position, aim);
    p.yaw = wrap_angle(left_pose.yaw + AngleConvention::right_gripper_yaw_offset);
    p.pitch = left_pose.pitch;
    p.roll = left_pose.roll;
    return p;
}

std::vector<double> draw_waypoints(double draw_length, std::size_t n_waypoints) {
    if (n_waypoints == 0) {
        throw InvalidInput("track_draw needs at least one waypoint");
    }
    if (n_waypoints == 1) return {draw_length};
    const double b = AngleConvention::brace_distance;
    std::vector<double> d(n_waypoints);
    for (std::size_t k = 0; k < n_waypoints; ++k) {
        d[k] = b + (draw_length - b) * static_cast<double>(k) / static_cast<double>(n_waypoints - 1);
    }
    return d;
}

std::vector<JointVector> track_draw(const ArmModel& arm_right, const JointVector& q_current, const Pose& left_pose,
                                    const AimState& aim, std::size_t n_waypoints, const IkConfig& cfg) {
    if (!aim.valid()) {
        throw InvalidInput("track_draw called with an invalid aim");
    }
    const auto lengths = draw_waypoints(aim.draw_length, n_waypoints);
    std::vector<JointVector> path;
    path.reserve(lengths.size());
    JointVector seed = q_current;
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        AimState waypoint = aim;
        waypoint.draw_length = lengths[k];
        auto res = solve_ik(arm_right, seed, right_gripper_pose(left_pose, waypoint), cfg);
        if (!res.report.converged) {
            throw DrawInfeasible(k, fmt::format("IK did not converge at waypoint {} (D_L={:.4f} m, pos err {:.2e} m, "
                                                "ori err {:.2e} rad)",
                                                k, lengths[k], res.report.position_error,
                                                res.report.orientation_error));
        }
        seed = res.q;
        path.push_back(std::move(res.q));
    }
    return path;
}

namespace {

void reject_unknown_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
    if (!node.IsMap()) {
        throw InvalidConfig(fmt::format("{}: expected a mapping", where));
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            throw InvalidConfig(fmt::format("{}: unknown key '{}'", where, key));
        }
    }
}

Eigen::Vector3d read_vec3(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence() || n.size() != 3) {
        throw InvalidConfig(fmt::format("{}: expected a 3-element list", where));
    }
    return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

}  // namespace

ArmModel parse_arm_model(const std::string& yaml_text) {
    try {
        const YAML::Node root = YAML::Load(yaml_text);
        reject_unknown_keys(root, {"name", "joints"}, "arm");
        const YAML::Node joints = root["joints"];
        if (!joints || !joints.IsSequence()) {
            throw InvalidConfig("arm: 'joints' must be a list");
        }
        std::vector<Joint> out;
        for (std::size_t i = 0; i < joints.size(); ++i) {
            const auto where = fmt::format("arm.joints[{}]", i);
            const YAML::Node jn = joints[i];
            reject_unknown_keys(jn, {"name", "axis", "offset", "limits"}, where);
            Joint j;
            j.name = jn["name"] ? jn["name"].as<std::string>() : fmt::format("joint{}", i);
            if (!jn["axis"] || !jn["offset"] || !jn["limits"]) {
                throw InvalidConfig(fmt::format("{}: axis, offset and limits are required", where));
            }
            j.axis = read_vec3(jn["axis"], where + ".axis");
            j.offset = read_vec3(jn["offset"], where + ".offset");
            const YAML::Node lim = jn["limits"];
            if (!lim.IsSequence() || lim.size() != 2) {
                throw InvalidConfig(where + ".limits: expected [lo, hi]");
            }
            j.lo = lim[0].as<double>();
            j.hi = lim[1].as<double>();
            out.push_back(std::move(j));
        }
        return ArmModel(std::move(out), root["name"] ? root["name"].as<std::string>() : std::string{});
    } catch (const YAML::Exception& e) {
        throw InvalidConfig(fmt::format("arm description: {}", e.what()));
    }
}

ArmModel load_arm_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("{}: cannot open arm description", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_arm_model(ss.str());
}

}  // namespace archery
