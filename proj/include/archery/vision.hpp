#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "archery/image.hpp"

namespace archery {

// Tuning for the concentric-target detector. Defaults reproduce the settings
// used for a target 10 m away with a 640x480 camera.
struct DetectorConfig {
    int blur_kernel = 5;
    double blur_sigma = 1.0;
    int r_min = 10;
    int r_max = 30;
    int diff_threshold = 40;
    double nms_window_fraction = 0.10;
    double radius_tolerance = 0.50;
    int min_positive_directions = 5;
    // Accumulator x-y bins per image pixel.
    double accumulator_xy_resolution = 1.0;
    // Edge pixels: gradient magnitude > mean + k * stddev.
    double edge_threshold_sigmas = 1.5;
    // Minimum accumulator score as a fraction of the candidate circumference 2*pi*r.
    double vote_fraction = 0.20;
    // Difference-vector length in steps; 0 selects 4 * r_max.
    int diff_vector_length = 0;

    int effective_diff_length() const { return diff_vector_length > 0 ? diff_vector_length : 4 * r_max; }
    // Throws InvalidConfig.
    void validate() const;
};

struct CircleCandidate {
    int cx = 0;
    int cy = 0;
    int radius = 0;
    int score = 0;
    bool operator==(const CircleCandidate&) const = default;
};

enum class Direction : std::uint8_t { Up, Down, Left, Right, UpLeft, UpRight, DownLeft, DownRight };

inline constexpr std::array<Direction, 8> kAllDirections = {
    Direction::Up,     Direction::Down,    Direction::Left,     Direction::Right,
    Direction::UpLeft, Direction::UpRight, Direction::DownLeft, Direction::DownRight,
};

// Pixel step for one index along a direction. Diagonals move one pixel on each
// axis, so diagonal index k sits k*sqrt(2) pixels from the start. The ring
// ratio test is scale free, so no correction is applied.
struct PixelStep {
    int dx;
    int dy;
};
PixelStep step_of(Direction d);
bool is_diagonal(Direction d);

struct ConcentricEvidence {
    int positive_directions = 0;
    double r_avg = 0.0;
    std::array<bool, 8> positive{};
};

struct TargetDetection {
    int cx = 0;
    int cy = 0;
    double r_avg = 0.0;
    int positive_directions = 0;
    // First (up to) three local-maximum indices per direction, in kAllDirections order.
    std::array<std::vector<int>, 8> per_direction_maxima;
    CircleCandidate candidate;

    bool operator==(const TargetDetection&) const = default;
};

// Luma with BT.601 weights, rounded and clamped. Throws InvalidInput on an empty image.
GrayImage to_grayscale(const RgbImage& rgb);

// Separable normalized Gaussian, edge-replicated border.
GrayImage gaussian_blur(const GrayImage& img, int kernel, double sigma);

// Normalized 1-D Gaussian weights of odd size `kernel`.
std::vector<double> gaussian_kernel(int kernel, double sigma);

// Candidates sorted by score descending, ties by (cy, cx, radius) ascending.
// Throws InvalidInput when either dimension is smaller than 2*r_max+1.
std::vector<CircleCandidate> hough_circles(const GrayImage& img, const DetectorConfig& cfg);

// Absolute pixel differences walking `length` steps from (cx, cy); values
// below `threshold` become 0. Stops early at the image border.
std::vector<int> radial_difference_vector(const GrayImage& img, int cx, int cy, Direction dir, int length,
                                          int threshold);

// Indices i with v[i] > 0 that dominate every entry within ceil(fraction*len)
// of them. On equal values only the leftmost index survives.
std::vector<int> nms_1d(std::span<const int> v, double window_fraction);

// Applies the 1:2:3 ring-spacing test to the local maxima of eight rays
// (kAllDirections order). Axial and diagonal rays are pooled separately;
// r_avg is reported in pixels.
std::optional<ConcentricEvidence> validate_concentric(const std::array<std::vector<int>, 8>& maxima,
                                                      const DetectorConfig& cfg);

// Full pipeline; the first Hough candidate that validates wins.
std::optional<TargetDetection> detect_target(const GrayImage& img, const DetectorConfig& cfg);
std::optional<TargetDetection> detect_target(const RgbImage& img, const DetectorConfig& cfg);

}  // namespace archery
