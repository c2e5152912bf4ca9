#include "archery/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "archery/error.hpp"
#include "archery/vision.hpp"

namespace archery {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw InvalidInput(fmt::format("image dimensions must be positive, got {}x{}", width, height));
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) {
        throw InvalidInput(fmt::format("image dimensions must be positive, got {}x{}", width, height));
    }
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidInput(fmt::format("pixel buffer holds {} values, expected {}", data_.size(),
                                       static_cast<std::size_t>(width) * height));
    }
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw InvalidInput(fmt::format("image dimensions must be positive, got {}x{}", width, height));
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

namespace {

struct Header {
    char kind;
    int width;
    int height;
};

// Header tokens are separated by whitespace; '#' starts a comment running to
// end of line. Exactly one whitespace byte separates maxval from the raster.
int read_header_int(std::istream& in, const std::filesystem::path& path) {
    int c = in.peek();
    while (c != EOF) {
        if (c == '#') {
            in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
        c = in.peek();
    }
    if (c == EOF || !std::isdigit(c)) {
        throw IoError(fmt::format("{}: malformed netpbm header", path.string()));
    }
    long value = 0;
    while (std::isdigit(in.peek())) {
        value = value * 10 + (in.get() - '0');
        if (value > 1'000'000) {
            throw IoError(fmt::format("{}: netpbm header value out of range", path.string()));
        }
    }
    return static_cast<int>(value);
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
    char magic[2] = {};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw IoError(fmt::format("{}: not a binary netpbm (P5/P6) file", path.string()));
    }
    Header h{magic[1], 0, 0};
    h.width = read_header_int(in, path);
    h.height = read_header_int(in, path);
    const int maxval = read_header_int(in, path);
    if (h.width < 1 || h.height < 1) {
        throw IoError(fmt::format("{}: zero image dimension", path.string()));
    }
    if (maxval != 255) {
        throw IoError(fmt::format("{}: unsupported maxval {} (only 255)", path.string(), maxval));
    }
    if (!std::isspace(in.get())) {
        throw IoError(fmt::format("{}: missing whitespace before raster", path.string()));
    }
    return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    }
    return out;
}

std::vector<std::uint8_t> read_raster(std::istream& in, std::size_t n, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw IoError(fmt::format("{}: truncated raster", path.string()));
    }
    return buf;
}

RgbImage unpack_rgb(const Header& h, const std::vector<std::uint8_t>& buf) {
    RgbImage img(h.width, h.height);
    std::size_t k = 0;
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x, k += 3) {
            img.at(x, y) = {buf[k], buf[k + 1], buf[k + 2]};
        }
    }
    return img;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, path);
    if (h.kind != '5') {
        throw IoError(fmt::format("{}: expected P5", path.string()));
    }
    auto buf = read_raster(in, static_cast<std::size_t>(h.width) * h.height, path);
    return GrayImage(h.width, h.height, std::move(buf));
}

RgbImage read_ppm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, path);
    if (h.kind != '6') {
        throw IoError(fmt::format("{}: expected P6", path.string()));
    }
    return unpack_rgb(h, read_raster(in, static_cast<std::size_t>(h.width) * h.height * 3, path));
}

GrayImage read_netpbm_gray(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, path);
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
    if (h.kind == '5') {
        return GrayImage(h.width, h.height, read_raster(in, n, path));
    }
    return to_grayscale(unpack_rgb(h, read_raster(in, n * 3, path)));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    auto out = open_out(path);
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    const auto px = img.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) {
        throw IoError(fmt::format("{}: write failed", path.string()));
    }
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    auto out = open_out(path);
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<char> row(static_cast<std::size_t>(img.width()) * 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const Rgb p = img.at(x, y);
            row[3 * x] = static_cast<char>(p.r);
            row[3 * x + 1] = static_cast<char>(p.g);
            row[3 * x + 2] = static_cast<char>(p.b);
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) {
        throw IoError(fmt::format("{}: write failed", path.string()));
    }
}

}  // namespace archery
