#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace archery {

// Row-major 8-bit single-channel raster.
class GrayImage {
public:
    GrayImage() = default;
    // Throws InvalidInput for a zero dimension.
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<const std::uint8_t> pixels() const { return data_; }
    std::span<std::uint8_t> pixels() { return data_; }

    bool operator==(const GrayImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }

    Rgb at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    Rgb& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    bool operator==(const RgbImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> data_;
};

// Binary netpbm: P5 (gray) and P6 (color), maxval 255 only.
GrayImage read_pgm(const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

// Reads either P5 or P6, converting color to gray.
GrayImage read_netpbm_gray(const std::filesystem::path& path);

}  // namespace archery
