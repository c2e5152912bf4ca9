#include "archery/vision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "archery/error.hpp"

namespace archery {

void DetectorConfig::validate() const {
    if (blur_kernel < 1 || blur_kernel % 2 == 0) {
        throw InvalidConfig(fmt::format("blur kernel must be odd and >= 1, got {}", blur_kernel));
    }
    if (!(blur_sigma > 0.0)) {
        throw InvalidConfig("blur sigma must be positive");
    }
    if (!(r_min > 0 && r_min < r_max)) {
        throw InvalidConfig(fmt::format("need 0 < r_min < r_max, got r_min={} r_max={}", r_min, r_max));
    }
    if (!(nms_window_fraction > 0.0 && nms_window_fraction < 1.0)) {
        throw InvalidConfig("nms window fraction must lie in (0, 1)");
    }
    if (!(radius_tolerance > 0.0 && radius_tolerance <= 1.0)) {
        throw InvalidConfig("radius tolerance must lie in (0, 1]");
    }
    if (min_positive_directions < 1 || min_positive_directions > 8) {
        throw InvalidConfig("min positive directions must lie in [1, 8]");
    }
    if (!(accumulator_xy_resolution > 0.0 && accumulator_xy_resolution <= 1.0)) {
        throw InvalidConfig("accumulator resolution must lie in (0, 1]");
    }
    if (diff_threshold < 0 || diff_threshold > 255) {
        throw InvalidConfig("difference threshold must lie in [0, 255]");
    }
    if (!(vote_fraction > 0.0) || edge_threshold_sigmas < 0.0 || diff_vector_length < 0) {
        throw InvalidConfig("vote fraction, edge threshold and diff length must be non-negative");
    }
}

PixelStep step_of(Direction d) {
    switch (d) {
        case Direction::Up: return {0, -1};
        case Direction::Down: return {0, 1};
        case Direction::Left: return {-1, 0};
        case Direction::Right: return {1, 0};
        case Direction::UpLeft: return {-1, -1};
        case Direction::UpRight: return {1, -1};
        case Direction::DownLeft: return {-1, 1};
        case Direction::DownRight: return {1, 1};
    }
    return {0, 0};
}

GrayImage to_grayscale(const RgbImage& rgb) {
    if (rgb.empty()) {
        throw InvalidInput("cannot convert an empty image to grayscale");
    }
    GrayImage out(rgb.width(), rgb.height());
    for (int y = 0; y < rgb.height(); ++y) {
        for (int x = 0; x < rgb.width(); ++x) {
            const Rgb p = rgb.at(x, y);
            const double luma = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
        }
    }
    return out;
}

std::vector<double> gaussian_kernel(int kernel, double sigma) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw InvalidConfig(fmt::format("gaussian kernel size must be odd and >= 1, got {}", kernel));
    }
    if (!(sigma > 0.0)) {
        throw InvalidConfig("gaussian sigma must be positive");
    }
    const int half = kernel / 2;
    std::vector<double> w(static_cast<std::size_t>(kernel));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        w[i + half] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += w[i + half];
    }
    for (double& v : w) v /= sum;
    return w;
}

GrayImage gaussian_blur(const GrayImage& img, int kernel, double sigma) {
    const auto w = gaussian_kernel(kernel, sigma);
    if (img.empty()) {
        throw InvalidInput("cannot blur an empty image");
    }
    const int half = kernel / 2;
    const int W = img.width();
    const int H = img.height();
    std::vector<double> tmp(static_cast<std::size_t>(W) * H);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                acc += w[k + half] * img.at(std::clamp(x + k, 0, W - 1), y);
            }
            tmp[static_cast<std::size_t>(y) * W + x] = acc;
        }
    }
    GrayImage out(W, H);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                acc += w[k + half] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, H - 1)) * W + x];
            }
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
        }
    }
    return out;
}

namespace {

struct Gradient {
    std::vector<double> gx, gy, mag;
};

Gradient sobel(const GrayImage& img) {
    const int W = img.width();
    const int H = img.height();
    Gradient g;
    g.gx.resize(static_cast<std::size_t>(W) * H);
    g.gy.resize(g.gx.size());
    g.mag.resize(g.gx.size());
    auto px = [&](int x, int y) -> double { return img.at(std::clamp(x, 0, W - 1), std::clamp(y, 0, H - 1)); };
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.mag[i] = std::hypot(gx, gy);
        }
    }
    return g;
}

}  // namespace

std::vector<CircleCandidate> hough_circles(const GrayImage& img, const DetectorConfig& cfg) {
    cfg.validate();
    const int W = img.width();
    const int H = img.height();
    if (W < 2 * cfg.r_max + 1 || H < 2 * cfg.r_max + 1) {
        throw InvalidInput(fmt::format("image {}x{} too small for r_max={}", W, H, cfg.r_max));
    }

    const Gradient g = sobel(img);
    double mean = 0.0;
    for (double m : g.mag) mean += m;
    mean /= static_cast<double>(g.mag.size());
    double var = 0.0;
    for (double m : g.mag) var += (m - mean) * (m - mean);
    var /= static_cast<double>(g.mag.size());
    const double edge_threshold = mean + cfg.edge_threshold_sigmas * std::sqrt(var);

    const double res = cfg.accumulator_xy_resolution;
    const int BW = std::max(1, static_cast<int>(std::ceil(W * res)));
    const int BH = std::max(1, static_cast<int>(std::ceil(H * res)));
    const int NR = cfg.r_max - cfg.r_min + 1;
    const std::size_t plane = static_cast<std::size_t>(BW) * BH;
    std::vector<std::uint32_t> acc(plane * NR, 0);

    // Each edge pixel votes along its gradient line, on both sides, since a
    // dark ring on a light field has edges facing toward and away from the center.
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            const double m = g.mag[i];
            if (!(m > edge_threshold) || m <= 0.0) continue;
            const double ux = g.gx[i] / m;
            const double uy = g.gy[i] / m;
            for (int ri = 0; ri < NR; ++ri) {
                const double r = cfg.r_min + ri;
                for (const double s : {-1.0, 1.0}) {
                    const long bx = std::lround((x + s * r * ux) * res);
                    const long by = std::lround((y + s * r * uy) * res);
                    if (bx < 0 || by < 0 || bx >= BW || by >= BH) continue;
                    ++acc[ri * plane + static_cast<std::size_t>(by) * BW + bx];
                }
            }
        }
    }

    std::vector<CircleCandidate> found;
    for (int ri = 0; ri < NR; ++ri) {
        const int r = cfg.r_min + ri;
        const double min_votes = std::max(1.0, cfg.vote_fraction * 2.0 * std::numbers::pi * r);
        for (int by = 0; by < BH; ++by) {
            for (int bx = 0; bx < BW; ++bx) {
                const std::size_t idx = ri * plane + static_cast<std::size_t>(by) * BW + bx;
                const std::uint32_t v = acc[idx];
                if (v < min_votes) continue;
                bool is_max = true;
                for (int dr = -1; dr <= 1 && is_max; ++dr) {
                    const int nr = ri + dr;
                    if (nr < 0 || nr >= NR) continue;
                    for (int dy = -1; dy <= 1 && is_max; ++dy) {
                        const int ny = by + dy;
                        if (ny < 0 || ny >= BH) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int nx = bx + dx;
                            if (nx < 0 || nx >= BW || (dr == 0 && dy == 0 && dx == 0)) continue;
                            const std::size_t nidx = nr * plane + static_cast<std::size_t>(ny) * BW + nx;
                            // Plateau: only the bin with the smallest linear index survives.
                            if (acc[nidx] > v || (acc[nidx] == v && nidx < idx)) {
                                is_max = false;
                                break;
                            }
                        }
                    }
                }
                if (is_max) {
                    found.push_back({static_cast<int>(std::lround(bx / res)), static_cast<int>(std::lround(by / res)),
                                     r, static_cast<int>(v)});
                }
            }
        }
    }

    std::sort(found.begin(), found.end(), [](const CircleCandidate& a, const CircleCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.cy != b.cy) return a.cy < b.cy;
        if (a.cx != b.cx) return a.cx < b.cx;
        return a.radius < b.radius;
    });

    std::vector<CircleCandidate> kept;
    for (const auto& c : found) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const CircleCandidate& k) {
            const double d = std::hypot(c.cx - k.cx, c.cy - k.cy);
            return d < cfg.r_min && std::abs(c.radius - k.radius) < cfg.r_min;
        });
        if (!suppressed) {
            kept.push_back({std::clamp(c.cx, 0, W - 1), std::clamp(c.cy, 0, H - 1), c.radius, c.score});
        }
    }
    return kept;
}

std::vector<int> radial_difference_vector(const GrayImage& img, int cx, int cy, Direction dir, int length,
                                          int threshold) {
    if (!img.contains(cx, cy)) {
        throw InvalidInput(fmt::format("ray origin ({}, {}) outside image", cx, cy));
    }
    const PixelStep s = step_of(dir);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::max(length, 0)));
    int x = cx;
    int y = cy;
    for (int i = 0; i < length; ++i) {
        const int nx = x + s.dx;
        const int ny = y + s.dy;
        if (!img.contains(nx, ny)) break;
        const int d = std::abs(static_cast<int>(img.at(nx, ny)) - static_cast<int>(img.at(x, y)));
        out.push_back(d < threshold ? 0 : d);
        x = nx;
        y = ny;
    }
    return out;
}

std::vector<int> nms_1d(std::span<const int> v, double window_fraction) {
    const int n = static_cast<int>(v.size());
    // The small epsilon keeps e.g. 0.1 * 10 from rounding up to 2.
    const int window = static_cast<int>(std::ceil(window_fraction * n - 1e-9));
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        if (v[i] <= 0) continue;
        bool keep = true;
        for (int j = std::max(0, i - window); j <= std::min(n - 1, i + window) && keep; ++j) {
            if (j == i) continue;
            if (v[j] > v[i] || (j < i && v[j] == v[i])) keep = false;
        }
        if (keep) out.push_back(i);
    }
    return out;
}

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

bool is_diagonal(Direction d) {
    const PixelStep s = step_of(d);
    return s.dx != 0 && s.dy != 0;
}

std::optional<ConcentricEvidence> validate_concentric(const std::array<std::vector<int>, 8>& maxima,
                                                      const DetectorConfig& cfg) {
    // Diagonal indices advance sqrt(2) px per step, so the ring spacing in
    // index units differs between axial and diagonal rays. Each class is
    // pooled on its own; within a class the 1:2:3 test is scale free.
    std::array<std::vector<double>, 2> estimates;  // [axial, diagonal]
    for (std::size_t d = 0; d < maxima.size(); ++d) {
        const auto& m = maxima[d];
        if (m.size() >= 3) {
            estimates[is_diagonal(kAllDirections[d]) ? 1 : 0].push_back((m[0] + m[1] / 2.0 + m[2] / 3.0) / 3.0);
        }
    }
    if (estimates[0].empty() && estimates[1].empty()) return std::nullopt;
    const double pooled[2] = {estimates[0].empty() ? 0.0 : median(estimates[0]),
                              estimates[1].empty() ? 0.0 : median(estimates[1])};

    ConcentricEvidence ev;
    ev.r_avg = !estimates[0].empty() ? pooled[0] : pooled[1] * std::numbers::sqrt2;
    if (!(ev.r_avg > 0.0)) return std::nullopt;
    for (std::size_t d = 0; d < maxima.size(); ++d) {
        const auto& m = maxima[d];
        if (m.size() < 3) continue;
        const double r = pooled[is_diagonal(kAllDirections[d]) ? 1 : 0];
        const double tol = cfg.radius_tolerance * r;
        bool ok = r > 0.0;
        for (int k = 1; k <= 3; ++k) {
            if (std::abs(m[k - 1] - k * r) > tol) ok = false;
        }
        ev.positive[d] = ok;
        ev.positive_directions += ok ? 1 : 0;
    }
    if (ev.positive_directions < cfg.min_positive_directions) return std::nullopt;
    return ev;
}

std::optional<TargetDetection> detect_target(const GrayImage& img, const DetectorConfig& cfg) {
    cfg.validate();
    if (img.empty()) {
        throw InvalidInput("cannot detect on an empty image");
    }
    const GrayImage smooth = gaussian_blur(img, cfg.blur_kernel, cfg.blur_sigma);
    const auto candidates = hough_circles(smooth, cfg);
    const int length = cfg.effective_diff_length();

    for (const auto& c : candidates) {
        std::array<std::vector<int>, 8> maxima;
        for (std::size_t d = 0; d < kAllDirections.size(); ++d) {
            const auto diffs = radial_difference_vector(smooth, c.cx, c.cy, kAllDirections[d], length, cfg.diff_threshold);
            maxima[d] = nms_1d(diffs, cfg.nms_window_fraction);
        }
        const auto ev = validate_concentric(maxima, cfg);
        if (!ev) continue;

        TargetDetection det;
        det.cx = c.cx;
        det.cy = c.cy;
        det.r_avg = ev->r_avg;
        det.positive_directions = ev->positive_directions;
        det.candidate = c;
        for (std::size_t d = 0; d < maxima.size(); ++d) {
            const auto n = std::min<std::size_t>(3, maxima[d].size());
            det.per_direction_maxima[d].assign(maxima[d].begin(), maxima[d].begin() + static_cast<long>(n));
        }
        return det;
    }
    return std::nullopt;
}

std::optional<TargetDetection> detect_target(const RgbImage& img, const DetectorConfig& cfg) {
    return detect_target(to_grayscale(img), cfg);
}

}  // namespace archery
