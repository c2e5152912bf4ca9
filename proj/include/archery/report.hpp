#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archery/ballistics.hpp"
#include "archery/controller.hpp"

namespace archery {

// One CSV line. Angles in degrees, draw length and impacts in centimeters,
// speed in m/s, distance in meters.
struct ReportRow {
    int shot_index = 0;
    double theta_cmd = 0.0;
    double phi_cmd = 0.0;
    double theta_real = 0.0;
    double phi_real = 0.0;
    double d_l = 0.0;
    double speed = 0.0;
    std::optional<double> impact_x_cm;
    std::optional<double> impact_y_cm;
    double distance_m = 0.0;
    ShootState state = ShootState::Released;
};

inline constexpr std::string_view kCsvHeader =
    "shot_index,theta_cmd,phi_cmd,theta_real,phi_real,d_l,speed,impact_x_cm,impact_y_cm,distance_m,state";

// Fills the aim/speed columns from a shot record; impacts are left to the caller.
ReportRow make_row(const ShotRecord& rec);

std::string format_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_csv(std::string_view text);
void emit_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);

struct ScatterStyle {
    std::string title;
    std::string x_label = "X (cm)";
    std::string y_label = "Y (cm)";
    // Ring radii in cm drawn around (ring_center_x, ring_center_y).
    std::vector<double> rings_cm;
    double ring_center_x = 0.0;
    double ring_center_y = 0.0;
};

std::string format_svg_scatter(const std::vector<ReportRow>& rows, const ScatterStyle& style);
void emit_svg_scatter(const std::filesystem::path& path, const std::vector<ReportRow>& rows, const ScatterStyle& style);

std::string format_svg_trajectory(const std::vector<TrajectorySample>& samples, const std::string& title);
void emit_svg_trajectory(const std::filesystem::path& path, const std::vector<TrajectorySample>& samples,
                         const std::string& title);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace archery
