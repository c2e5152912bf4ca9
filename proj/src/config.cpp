#include "archery/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "archery/error.hpp"

#ifndef ARCHERY_DATA_DIR
#define ARCHERY_DATA_DIR "data"
#endif

namespace archery {

std::filesystem::path default_arm_path() { return std::filesystem::path(ARCHERY_DATA_DIR) / "default_arm.yaml"; }
std::filesystem::path default_config_path() { return std::filesystem::path(ARCHERY_DATA_DIR) / "default_config.yaml"; }

void AppConfig::validate() const {
    scene.validate();
    shooter.bow.validate();
    shooter.ik.validate();
    noise.validate();
    detector.validate();
    if (shooter.home.size() != shooter.right_arm.n_joints()) {
        throw InvalidConfig(fmt::format("arm.home_rad has {} entries, arm has {} joints", shooter.home.size(),
                                        shooter.right_arm.n_joints()));
    }
    if (n_shots < 1) throw InvalidConfig("experiment.n_shots must be >= 1");
    if (draw_length < shooter.bow.brace_distance) {
        throw InvalidConfig("experiment.draw_length_cm is shorter than the brace distance");
    }
    if (shooter.draw_waypoints < 1) throw InvalidConfig("arm.draw_waypoints must be >= 1");
    if (!(shooter.dt > 0 && shooter.dt <= 0.01)) throw InvalidConfig("flight.dt_s must lie in (0, 0.01]");
    if (shooter.release_height < 0 || shooter.drag_coefficient < 0) {
        throw InvalidConfig("flight release height and drag must be non-negative");
    }
    if (calibration.shots_per_probe < 1) throw InvalidConfig("calibration.shots_per_probe must be >= 1");
}

AppConfig default_config() {
    AppConfig c;
    c.shooter.right_arm = load_arm_model(default_arm_path());
    c.shooter.home = JointVector::zeros(c.shooter.right_arm.n_joints());
    if (c.shooter.home.size() > 3) c.shooter.home[3] = -1.2;
    c.shooter.left_gripper_position = {0.25, -0.85, 0.0};
    c.shooter.wall_distance = c.scene.wall_distance;
    return c;
}

namespace {

// Reads keys of one mapping, rejecting any key without a handler.
class Section {
public:
    Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
        if (node_ && !node_.IsMap()) {
            throw InvalidConfig(fmt::format("section '{}' must be a mapping", name_));
        }
    }

    template <typename T>
    Section& get(const std::string& key, T& out, double scale = 1.0) {
        seen_.insert(key);
        if (!node_ || !node_[key]) return *this;
        try {
            if constexpr (std::is_floating_point_v<T>) {
                out = node_[key].template as<double>() * scale;
            } else {
                out = node_[key].template as<T>();
            }
        } catch (const YAML::Exception&) {
            throw InvalidConfig(fmt::format("{}.{}: invalid value", name_, key));
        }
        return *this;
    }

    Section& list(const std::string& key, std::vector<double>& out, double scale = 1.0) {
        seen_.insert(key);
        if (!node_ || !node_[key]) return *this;
        const YAML::Node n = node_[key];
        if (!n.IsSequence()) throw InvalidConfig(fmt::format("{}.{}: expected a list", name_, key));
        out.clear();
        for (const auto& v : n) {
            try {
                out.push_back(v.as<double>() * scale);
            } catch (const YAML::Exception&) {
                throw InvalidConfig(fmt::format("{}.{}: invalid list element", name_, key));
            }
        }
        return *this;
    }

    Section& raw(const std::string& key, YAML::Node& out) {
        seen_.insert(key);
        if (node_ && node_[key]) out = node_[key];
        return *this;
    }

    void done() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) {
                throw InvalidConfig(fmt::format("unknown key '{}.{}'", name_, key));
            }
        }
    }

private:
    const YAML::Node node_;
    std::string name_;
    std::set<std::string> seen_;
};

constexpr double kCm = 0.01;
constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

AppConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node loaded;
    try {
        loaded = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw InvalidConfig(fmt::format("config: {}", e.what()));
    }
    const YAML::Node root = loaded.IsNull() ? YAML::Node(YAML::NodeType::Map) : loaded;
    if (!root.IsMap()) {
        throw InvalidConfig("config root must be a mapping");
    }
    static const std::set<std::string> sections{"scene",   "camera",   "bow",         "flight",    "arm",
                                                "ik",      "noise",    "detector",    "calibration", "experiment"};
    for (const auto& kv : root) {
        if (!sections.count(kv.first.as<std::string>())) {
            throw InvalidConfig(fmt::format("unknown section '{}'", kv.first.as<std::string>()));
        }
    }

    AppConfig c = default_config();
    auto& sc = c.scene;
    Section(root["scene"], "scene")
        .get("wall_distance_cm", sc.wall_distance, kCm)
        .get("target_lateral_cm", sc.target_lateral, kCm)
        .get("target_height_cm", sc.target_height, kCm)
        .get("target_diameter_cm", sc.target_diameter, kCm)
        .get("inner_ring_diameter_cm", sc.inner_ring_diameter, kCm)
        .get("ring_width_cm", sc.ring_width, kCm)
        .done();
    auto& cam = sc.camera;
    Section(root["camera"], "camera")
        .get("focal_px", cam.focal_px)
        .get("width", cam.width)
        .get("height", cam.height)
        .get("mount_height_cm", cam.mount_height, kCm)
        .get("mount_lateral_cm", cam.mount_lateral, kCm)
        .done();

    auto& bow = c.shooter.bow;
    double arrow_mass_g = bow.arrow_mass * 1000.0;
    Section(root["bow"], "bow")
        .get("rated_draw_force_n", bow.rated_draw_force)
        .get("rated_draw_length_cm", bow.rated_draw_length, kCm)
        .get("brace_distance_cm", bow.brace_distance, kCm)
        .get("efficiency", bow.efficiency)
        .get("arrow_mass_g", arrow_mass_g)
        .done();
    bow.arrow_mass = arrow_mass_g / 1000.0;

    Section(root["flight"], "flight")
        .get("release_height_cm", c.shooter.release_height, kCm)
        .get("drag_coefficient", c.shooter.drag_coefficient)
        .get("dt_s", c.shooter.dt)
        .done();

    std::string arm_file;
    std::vector<double> left{m_to_cm(c.shooter.left_gripper_position.x), m_to_cm(c.shooter.left_gripper_position.y),
                             m_to_cm(c.shooter.left_gripper_position.z)};
    std::vector<double> home(c.shooter.home.q.data(), c.shooter.home.q.data() + c.shooter.home.q.size());
    int waypoints = static_cast<int>(c.shooter.draw_waypoints);
    Section(root["arm"], "arm")
        .get("file", arm_file)
        .list("left_gripper_cm", left)
        .list("home_rad", home)
        .get("draw_waypoints", waypoints)
        .done();
    if (!arm_file.empty()) {
        std::filesystem::path p(arm_file);
        c.shooter.right_arm = load_arm_model(p.is_absolute() ? p : base_dir / p);
    }
    if (left.size() != 3) throw InvalidConfig("arm.left_gripper_cm needs 3 values");
    c.shooter.left_gripper_position = {cm_to_m(left[0]), cm_to_m(left[1]), cm_to_m(left[2])};
    c.shooter.home = JointVector(Eigen::Map<Eigen::VectorXd>(home.data(), static_cast<Eigen::Index>(home.size())));
    if (waypoints < 1) throw InvalidConfig("arm.draw_waypoints must be >= 1");
    c.shooter.draw_waypoints = static_cast<std::size_t>(waypoints);

    auto& ik = c.shooter.ik;
    Section(root["ik"], "ik")
        .get("max_iterations", ik.max_iterations)
        .get("position_tolerance_m", ik.position_tolerance)
        .get("orientation_tolerance_rad", ik.orientation_tolerance)
        .get("damping", ik.damping)
        .get("step_scale", ik.step_scale)
        .done();

    auto& nz = c.noise;
    Section(root["noise"], "noise")
        .get("sigma_yaw_deg", nz.sigma_yaw, kDeg)
        .get("sigma_roll_deg", nz.sigma_roll, kDeg)
        .get("drift_deg_per_shot", nz.drift_per_shot, kDeg)
        .done();

    auto& d = c.detector;
    Section(root["detector"], "detector")
        .get("blur_kernel", d.blur_kernel)
        .get("blur_sigma", d.blur_sigma)
        .get("r_min", d.r_min)
        .get("r_max", d.r_max)
        .get("diff_threshold", d.diff_threshold)
        .get("nms_window_fraction", d.nms_window_fraction)
        .get("radius_tolerance", d.radius_tolerance)
        .get("min_positive_directions", d.min_positive_directions)
        .get("accumulator_xy_resolution", d.accumulator_xy_resolution)
        .get("edge_threshold_sigmas", d.edge_threshold_sigmas)
        .get("vote_fraction", d.vote_fraction)
        .get("diff_vector_length", d.diff_vector_length)
        .done();

    auto& cal = c.calibration;
    Section(root["calibration"], "calibration")
        .get("enabled", cal.enabled)
        .get("shots_per_probe", cal.shots_per_probe)
        .list("probe_offsets_cm", cal.probe_offsets, kCm)
        .get("roll_fixed_deg", cal.roll_fixed, kDeg)
        .get("lateral_tolerance_cm", cal.lateral_tolerance, kCm)
        .done();

    double draw_cm = m_to_cm(c.draw_length);
    YAML::Node table;
    Section(root["experiment"], "experiment")
        .get("n_shots", c.n_shots)
        .get("exp2_target_offset_cm", c.exp2_target_offset, kCm)
        .get("draw_length_cm", draw_cm)
        .raw("exp3_table", table)
        .list("exp3_sweep_draw_cm", c.exp3.sweep_draw_lengths, kCm)
        .list("exp3_sweep_roll_deg", c.exp3.sweep_rolls, kDeg)
        .done();
    c.draw_length = cm_to_m(draw_cm);
    if (!table.IsNull()) {
        if (!table.IsSequence()) throw InvalidConfig("experiment.exp3_table must be a list of [cm, deg, m] rows");
        c.exp3.table.clear();
        for (const auto& row : table) {
            if (!row.IsSequence() || row.size() != 3) {
                throw InvalidConfig("experiment.exp3_table rows are [draw_length_cm, roll_deg, range_m]");
            }
            c.exp3.table.push_back(
                {cm_to_m(row[0].as<double>()), row[1].as<double>() * kDeg, row[2].as<double>()});
        }
    }

    c.shooter.wall_distance = c.scene.wall_distance;
    c.validate();
    return c;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("{}: cannot open config", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace archery
