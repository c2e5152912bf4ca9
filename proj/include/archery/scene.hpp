#pragma once

#include <cstdint>
#include <random>

#include "archery/image.hpp"

namespace archery {

// Camera on the robot looking straight downrange (+X), image rows growing
// downward. The principal point is the image center.
struct PinholeCamera {
    double focal_px = 2700.0;
    int width = 640;
    int height = 480;
    double mount_height = 1.30;  // m above ground
    double mount_lateral = 0.0;  // m, positive right

    double principal_x() const { return width / 2.0; }
    double principal_y() const { return height / 2.0; }
    void validate() const;
};

struct Scene {
    double wall_distance = 10.0;        // m
    double target_lateral = 0.0;        // m, positive right
    double target_height = 1.145;       // m, center above ground
    double target_diameter = 0.49;      // m, outermost ring
    double inner_ring_diameter = 0.097; // m, kept as metadata
    double ring_width = 0.008;          // m, stroke of each ring
    PinholeCamera camera;

    // Rings sit at r, 2r, 3r with 3r = target_diameter / 2.
    double ring_spacing() const { return target_diameter / 6.0; }
    void validate() const;
};

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

// Image position of a point on the wall plane.
PixelPoint project(const Scene& scene, double lateral, double height);
// Wall-plane lateral offset seen at image column `x`.
double lateral_at_column(const Scene& scene, double x);

struct RingStyle {
    std::uint8_t background = 220;
    std::uint8_t ink = 30;
};

// Three dark concentric rings of radii r_avg * {1, 2, 3} pixels, 2x2 supersampled.
GrayImage render_rings(int width, int height, PixelPoint center, double r_avg_px, double stroke_px,
                       RingStyle style = {}, int rings = 3);

// Renders the scene target as seen by its camera. Throws InvalidInput when
// the target does not fit in the frame.
GrayImage render_target(const Scene& scene, int rings = 3);

// Adds N(0, sigma) to every pixel, clamped to [0, 255].
void add_gaussian_noise(GrayImage& img, double sigma, std::mt19937_64& rng);

// Uniform random intensities.
GrayImage uniform_noise_image(int width, int height, std::mt19937_64& rng);

}  // namespace archery
