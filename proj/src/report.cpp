#include "archery/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "archery/error.hpp"
#include "archery/geometry.hpp"

namespace archery {

ReportRow make_row(const ShotRecord& rec) {
    ReportRow row;
    row.shot_index = rec.shot_index;
    row.theta_cmd = rad_to_deg(rec.commanded.theta);
    row.phi_cmd = rad_to_deg(rec.commanded.phi);
    row.theta_real = rad_to_deg(rec.realized.theta);
    row.phi_real = rad_to_deg(rec.realized.phi);
    row.d_l = m_to_cm(rec.commanded.draw_length);
    row.speed = rec.speed;
    row.state = rec.state;
    return row;
}

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }
std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidInput(fmt::format("csv line {}: bad number '{}'", line_no, s));
    }
    return v;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// "Nice" tick step for a span covered by about `target` ticks.
double tick_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (const double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

struct Frame {
    double x0, x1, y0, y1;
    static constexpr double kWidth = 640, kHeight = 560, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
    double sx(double d) const { return d / (x1 - x0) * (kWidth - kLeft - kRight); }
    double sy(double d) const { return d / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
    auto pad = [](double& lo, double& hi) {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double m = 0.08 * (hi - lo);
        lo -= m;
        hi += m;
    };
    pad(x0, x1);
    pad(y0, y1);
    return {x0, x1, y0, y1};
}

void axes(std::string& svg, const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
    svg += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
        Frame::kWidth, Frame::kHeight);
    svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", Frame::kWidth,
                       Frame::kHeight);
    svg += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       Frame::kWidth / 2, xml_escape(title));
    const double left = Frame::kLeft, right = Frame::kWidth - Frame::kRight;
    const double top = Frame::kTop, bottom = Frame::kHeight - Frame::kBottom;
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                       top, right - left, bottom - top);

    const double stx = tick_step(f.x1 - f.x0, 8);
    for (double t = std::ceil(f.x0 / stx) * stx; t <= f.x1; t += stx) {
        const double x = f.px(t);
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", x, top,
                           bottom);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                           "text-anchor=\"middle\">{:g}</text>\n",
                           x, bottom + 16, std::abs(t) < 1e-9 * stx ? 0.0 : t);
    }
    const double sty = tick_step(f.y1 - f.y0, 8);
    for (double t = std::ceil(f.y0 / sty) * sty; t <= f.y1; t += sty) {
        const double y = f.py(t);
        svg += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", left, y,
                           right);
        svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
                           "text-anchor=\"end\">{:g}</text>\n",
                           left - 6, y + 4, std::abs(t) < 1e-9 * sty ? 0.0 : t);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       (left + right) / 2, Frame::kHeight - 18, xml_escape(xl));
    svg += fmt::format("<text x=\"18\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"13\" "
                       "text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                       (top + bottom) / 2, xml_escape(yl));
}

}  // namespace

std::string format_csv(const std::vector<ReportRow>& rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.shot_index, num(r.theta_cmd), num(r.phi_cmd),
                           num(r.theta_real), num(r.phi_real), num(r.d_l), num(r.speed), opt_num(r.impact_x_cm),
                           opt_num(r.impact_y_cm), num(r.distance_m), to_string(r.state));
    }
    return out;
}

std::vector<ReportRow> parse_csv(std::string_view text) {
    std::vector<ReportRow> rows;
    std::size_t line_no = 0;
    bool header = true;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (header) {
            if (line != kCsvHeader) throw InvalidInput("csv: unexpected header");
            header = false;
            continue;
        }
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 11) {
            throw InvalidInput(fmt::format("csv line {}: expected 11 fields, got {}", line_no, f.size()));
        }
        ReportRow r;
        r.shot_index = static_cast<int>(parse_double(f[0], line_no));
        r.theta_cmd = parse_double(f[1], line_no);
        r.phi_cmd = parse_double(f[2], line_no);
        r.theta_real = parse_double(f[3], line_no);
        r.phi_real = parse_double(f[4], line_no);
        r.d_l = parse_double(f[5], line_no);
        r.speed = parse_double(f[6], line_no);
        if (!f[7].empty()) r.impact_x_cm = parse_double(f[7], line_no);
        if (!f[8].empty()) r.impact_y_cm = parse_double(f[8], line_no);
        r.distance_m = parse_double(f[9], line_no);
        r.state = shoot_state_from_string(f[10]);
        rows.push_back(r);
    }
    if (header) throw InvalidInput("csv: missing header");
    return rows;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

void emit_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    if (rows.empty()) throw InvalidInput("emit_csv: no records");
    write_text_file(path, format_csv(rows));
}

std::string format_svg_scatter(const std::vector<ReportRow>& rows, const ScatterStyle& style) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& r : rows) {
        if (!r.impact_x_cm || !r.impact_y_cm) continue;
        x0 = std::min(x0, *r.impact_x_cm);
        x1 = std::max(x1, *r.impact_x_cm);
        y0 = std::min(y0, *r.impact_y_cm);
        y1 = std::max(y1, *r.impact_y_cm);
    }
    for (const double rr : style.rings_cm) {
        x0 = std::min(x0, style.ring_center_x - rr);
        x1 = std::max(x1, style.ring_center_x + rr);
        y0 = std::min(y0, style.ring_center_y - rr);
        y1 = std::max(y1, style.ring_center_y + rr);
    }
    if (!std::isfinite(x0)) x0 = x1 = y0 = y1 = 0.0;
    const Frame f = make_frame(x0, x1, y0, y1);

    std::string svg;
    axes(svg, f, style.title, style.x_label, style.y_label);
    for (const double rr : style.rings_cm) {
        svg += fmt::format("<ellipse cx=\"{:.2f}\" cy=\"{:.2f}\" rx=\"{:.2f}\" ry=\"{:.2f}\" fill=\"none\" "
                           "stroke=\"#444\" stroke-width=\"1.5\"/>\n",
                           f.px(style.ring_center_x), f.py(style.ring_center_y), f.sx(rr), f.sy(rr));
    }
    for (const auto& r : rows) {
        if (!r.impact_x_cm || !r.impact_y_cm) continue;
        svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#c0392b\" fill-opacity=\"0.7\">"
                           "<title>shot {}</title></circle>\n",
                           f.px(*r.impact_x_cm), f.py(*r.impact_y_cm), r.shot_index);
    }
    svg += "</svg>\n";
    return svg;
}

void emit_svg_scatter(const std::filesystem::path& path, const std::vector<ReportRow>& rows,
                      const ScatterStyle& style) {
    if (rows.empty()) throw InvalidInput("emit_svg_scatter: no records");
    write_text_file(path, format_svg_scatter(rows, style));
}

std::string format_svg_trajectory(const std::vector<TrajectorySample>& samples, const std::string& title) {
    if (samples.empty()) throw InvalidInput("trajectory has no samples");
    double s1 = 0.0, z0 = 0.0, z1 = 0.0;
    for (const auto& p : samples) {
        s1 = std::max(s1, std::hypot(p.x, p.y));
        z1 = std::max(z1, p.z);
        z0 = std::min(z0, p.z);
    }
    const Frame f = make_frame(0.0, s1, z0, z1);
    std::string svg;
    axes(svg, f, title, "downrange (m)", "height (m)");
    svg += "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& p = samples[i];
        svg += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", f.px(std::hypot(p.x, p.y)), f.py(p.z));
    }
    svg += "\"/>\n</svg>\n";
    return svg;
}

void emit_svg_trajectory(const std::filesystem::path& path, const std::vector<TrajectorySample>& samples,
                         const std::string& title) {
    write_text_file(path, format_svg_trajectory(samples, title));
}

}  // namespace archery
