#include "archery/scene.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "archery/error.hpp"

namespace archery {

void PinholeCamera::validate() const {
    if (!(focal_px > 0) || width < 1 || height < 1) {
        throw InvalidConfig("camera needs a positive focal length and image size");
    }
}

void Scene::validate() const {
    camera.validate();
    if (!(wall_distance > 0 && target_diameter > 0 && inner_ring_diameter > 0 && ring_width > 0)) {
        throw InvalidConfig("scene dimensions must be positive");
    }
    if (!(ring_width < ring_spacing())) {
        throw InvalidConfig("ring width must be narrower than the ring spacing");
    }
    if (target_height - target_diameter / 2.0 < 0.0) {
        throw InvalidConfig("target does not fit on the wall above the ground");
    }
}

PixelPoint project(const Scene& scene, double lateral, double height) {
    const auto& c = scene.camera;
    const double s = c.focal_px / scene.wall_distance;
    return {c.principal_x() + s * (lateral - c.mount_lateral), c.principal_y() - s * (height - c.mount_height)};
}

double lateral_at_column(const Scene& scene, double x) {
    const auto& c = scene.camera;
    return c.mount_lateral + (x - c.principal_x()) * scene.wall_distance / c.focal_px;
}

GrayImage render_rings(int width, int height, PixelPoint center, double r_avg_px, double stroke_px, RingStyle style,
                       int rings) {
    GrayImage img(width, height, style.background);
    const double half = stroke_px / 2.0;
    constexpr double offs[2] = {-0.25, 0.25};
    const double reach = rings * r_avg_px + half + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - reach)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(center.x + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - reach)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(center.y + reach)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            int inked = 0;
            for (double oy : offs) {
                for (double ox : offs) {
                    const double rho = std::hypot(x + ox - center.x, y + oy - center.y);
                    for (int k = 1; k <= rings; ++k) {
                        if (std::abs(rho - k * r_avg_px) <= half) {
                            ++inked;
                            break;
                        }
                    }
                }
            }
            const double v = (inked * style.ink + (4 - inked) * style.background) / 4.0;
            img.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
        }
    }
    return img;
}

GrayImage render_target(const Scene& scene, int rings) {
    scene.validate();
    const auto& c = scene.camera;
    const double s = c.focal_px / scene.wall_distance;
    const PixelPoint center = project(scene, scene.target_lateral, scene.target_height);
    const double r_avg = scene.ring_spacing() * s;
    const double outer = rings * r_avg + scene.ring_width * s / 2.0;
    if (center.x - outer < 0 || center.y - outer < 0 || center.x + outer > c.width - 1 ||
        center.y + outer > c.height - 1) {
        throw InvalidInput(fmt::format("target at ({:.1f}, {:.1f}) px with outer radius {:.1f} px is out of frame",
                                       center.x, center.y, outer));
    }
    return render_rings(c.width, c.height, center, r_avg, scene.ring_width * s, {}, rings);
}

void add_gaussian_noise(GrayImage& img, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& p : img.pixels()) {
        p = static_cast<std::uint8_t>(std::clamp(std::lround(p + sigma * n(rng)), 0L, 255L));
    }
}

GrayImage uniform_noise_image(int width, int height, std::mt19937_64& rng) {
    GrayImage img(width, height);
    std::uniform_int_distribution<int> u(0, 255);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(u(rng));
    return img;
}

}  // namespace archery
