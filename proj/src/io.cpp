#include "stepfit/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "stepfit/errors.hpp"

namespace stepfit::io {
namespace {

constexpr double kMargin = 80.0;

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view s, std::size_t line) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("line " + std::to_string(line) + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

// Rows of a numeric CSV with the expected header; returns the parsed rows.
std::vector<std::array<double, 3>> parse_three_columns(std::string_view text, std::string_view header) {
    std::vector<std::array<double, 3>> rows;
    std::size_t line = 0;
    bool saw_header = false;
    for (auto raw : split(text, '\n')) {
        ++line;
        const auto l = trim(raw);
        if (l.empty()) continue;
        if (!saw_header) {
            if (l != header) throw IoError("expected header '" + std::string(header) + "'");
            saw_header = true;
            continue;
        }
        const auto f = split(l, ',');
        if (f.size() != 3) throw IoError("line " + std::to_string(line) + ": expected 3 columns");
        rows.push_back({parse_number(f[0], line), parse_number(f[1], line), parse_number(f[2], line)});
    }
    if (!saw_header) throw IoError("empty CSV input");
    return rows;
}

std::string hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", std::clamp(c.r, 0, 255), std::clamp(c.g, 0, 255),
                  std::clamp(c.b, 0, 255));
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Output::Output(const std::string& path) : path_(path) {
    if (path != "-") {
        auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*f) throw IoError("cannot open '" + path + "' for writing");
        file_ = std::move(f);
    }
}

Output::~Output() {
    if (!closed_) try {
            close();
        } catch (...) {
        }
}

std::ostream& Output::stream() { return file_ ? *file_ : std::cout; }

void Output::close() {
    closed_ = true;
    std::ostream& os = stream();
    os.flush();
    if (!os) throw IoError("write to '" + path_ + "' failed");
}

std::string read_text(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_trajectory_csv(std::ostream& os, const TrajectoryData& d) {
    os << "t,re,im\n";
    for (std::size_t n = 0; n <= d.size(); ++n) {
        const Complex z = d.at(n);
        os << fmt_double(d.H * static_cast<double>(n)) << ',' << fmt_double(z.real()) << ',' << fmt_double(z.imag())
           << '\n';
    }
}

TrajectoryData parse_trajectory_csv(std::string_view text, int m) {
    const auto rows = parse_three_columns(text, "t,re,im");
    if (rows.size() < 3) throw IoError("trajectory needs Z0 and at least 2 samples");
    TrajectoryData d;
    d.m = m;
    d.Z0 = {rows[0][1], rows[0][2]};
    d.H = rows[1][0] - rows[0][0];
    if (!(d.H > 0.0)) throw IoError("trajectory times must increase");
    for (std::size_t i = 1; i < rows.size(); ++i) d.samples.emplace_back(rows[i][1], rows[i][2]);
    return d;
}

void write_vector_csv(std::ostream& os, const Vector2& x0, std::span<const Vector2> data, double h) {
    os << "t,x,y\n";
    os << fmt_double(0.0) << ',' << fmt_double(x0(0)) << ',' << fmt_double(x0(1)) << '\n';
    for (std::size_t n = 0; n < data.size(); ++n)
        os << fmt_double(h * static_cast<double>(n + 1)) << ',' << fmt_double(data[n](0)) << ','
           << fmt_double(data[n](1)) << '\n';
}

void parse_vector_csv(std::string_view text, Vector2& x0, std::vector<Vector2>& data, double& h) {
    const auto rows = parse_three_columns(text, "t,x,y");
    if (rows.size() < 4) throw IoError("matrix data needs x0 and at least 3 samples");
    x0 = Vector2(rows[0][1], rows[0][2]);
    h = rows[1][0] - rows[0][0];
    if (!(h > 0.0)) throw IoError("sample times must increase");
    data.clear();
    for (std::size_t i = 1; i < rows.size(); ++i) data.emplace_back(rows[i][1], rows[i][2]);
}

Rgb ramp(double t) {
    // Anchors sampled from a viridis-like dark-to-light ramp.
    static constexpr std::array<Rgb, 6> anchors = {{
        {68, 1, 84}, {65, 68, 135}, {42, 120, 142}, {34, 168, 132}, {122, 209, 81}, {253, 231, 37},
    }};
    if (!std::isfinite(t)) return {255, 255, 255};
    t = std::clamp(t, 0.0, 1.0) * (anchors.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), anchors.size() - 2);
    const double f = t - static_cast<double>(i);
    auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + f * (b - a))); };
    return {mix(anchors[i].r, anchors[i + 1].r), mix(anchors[i].g, anchors[i + 1].g),
            mix(anchors[i].b, anchors[i + 1].b)};
}

std::vector<Segment> contour(const RegionMap& map, double level, const std::function<double(double)>& transform) {
    std::vector<Segment> out;
    auto value = [&](int ix, int iy, double& v) {
        if (map.flagged[static_cast<std::size_t>(iy) * map.nx + ix]) return false;
        v = map.at(ix, iy);
        if (transform) v = transform(v);
        return std::isfinite(v);
    };
    for (int iy = 0; iy + 1 < map.ny; ++iy)
        for (int ix = 0; ix + 1 < map.nx; ++ix) {
            // Corners counter-clockwise from the lower left.
            const std::array<std::pair<int, int>, 4> c = {{{ix, iy}, {ix + 1, iy}, {ix + 1, iy + 1}, {ix, iy + 1}}};
            std::array<double, 4> v{};
            bool ok = true;
            for (int q = 0; q < 4; ++q) ok = ok && value(c[q].first, c[q].second, v[q]);
            if (!ok) continue;
            std::vector<std::pair<double, double>> hits;
            for (int q = 0; q < 4; ++q) {
                const int r = (q + 1) % 4;
                const double a = v[q] - level, b = v[r] - level;
                if ((a < 0.0) == (b < 0.0)) continue;
                const double s = a / (a - b);
                const double x = map.x_at(c[q].first) + s * (map.x_at(c[r].first) - map.x_at(c[q].first));
                const double y = map.y_at(c[q].second) + s * (map.y_at(c[r].second) - map.y_at(c[q].second));
                hits.emplace_back(x, y);
            }
            for (std::size_t k = 0; k + 1 < hits.size(); k += 2)
                out.push_back({hits[k].first, hits[k].second, hits[k + 1].first, hits[k + 1].second});
        }
    return out;
}

SvgPlot::SvgPlot(Window w, std::string title, std::string xlabel, std::string ylabel)
    : w_(w), title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

double SvgPlot::px(double x) const { return kMargin + (x - w_.x0) / (w_.x1 - w_.x0) * (kCanvas - 2 * kMargin); }

double SvgPlot::py(double y) const {
    return kCanvas - kMargin - (y - w_.y0) / (w_.y1 - w_.y0) * (kCanvas - 2 * kMargin);
}

void SvgPlot::cells(const RegionMap& map, const std::function<Rgb(int, int)>& colour) {
    const double dx = (map.window.x1 - map.window.x0) / map.nx;
    const double dy = (map.window.y1 - map.window.y0) / map.ny;
    for (int iy = 0; iy < map.ny; ++iy) {
        int ix = 0;
        while (ix < map.nx) {
            const std::string c = hex(colour(ix, iy));
            int end = ix + 1;
            while (end < map.nx && hex(colour(end, iy)) == c) ++end;
            const double x0 = px(map.window.x0 + ix * dx), x1 = px(map.window.x0 + end * dx);
            const double y1 = py(map.window.y0 + iy * dy), y0 = py(map.window.y0 + (iy + 1) * dy);
            body_.push_back("<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0 + 0.3) +
                            "\" height=\"" + num(y1 - y0 + 0.3) + "\" fill=\"" + c + "\"/>");
            ix = end;
        }
    }
}

void SvgPlot::polyline(const std::vector<Complex>& pts, std::string_view stroke, double width) {
    if (pts.empty()) return;
    std::string s = "<polyline shape-rendering=\"geometricPrecision\" fill=\"none\" stroke=\"" +
                    std::string(stroke) + "\" stroke-width=\"" + num(width) +
                    "\" points=\"";
    for (const auto& p : pts) s += num(px(p.real())) + "," + num(py(p.imag())) + " ";
    s += "\"/>";
    body_.push_back(std::move(s));
}

void SvgPlot::segments(const std::vector<Segment>& segs, std::string_view stroke, double width) {
    if (segs.empty()) return;
    std::string d;
    for (const auto& g : segs)
        d += "M" + num(px(g.x0)) + " " + num(py(g.y0)) + "L" + num(px(g.x1)) + " " + num(py(g.y1));
    body_.push_back("<path shape-rendering=\"geometricPrecision\" fill=\"none\" stroke=\"" +
                    std::string(stroke) + "\" stroke-width=\"" + num(width) +
                    "\" d=\"" + d + "\"/>");
}

void SvgPlot::legend(std::string text) { legend_.push_back(std::move(text)); }

void SvgPlot::write(std::ostream& os) const {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\"" << kCanvas
       << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<clipPath id=\"plot\"><rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
       << kCanvas - 2 * kMargin << "\" height=\"" << kCanvas - 2 * kMargin << "\"/></clipPath>\n";
    os << "<g clip-path=\"url(#plot)\" shape-rendering=\"crispEdges\">\n";
    for (const auto& b : body_) os << b << '\n';
    os << "</g>\n";
    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kCanvas - 2 * kMargin
       << "\" height=\"" << kCanvas - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = w_.x0 + t * (w_.x1 - w_.x0) / 4, yv = w_.y0 + t * (w_.y1 - w_.y0) / 4;
        const double x = px(xv), y = py(yv);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << kCanvas - kMargin << "\" x2=\"" << num(x) << "\" y2=\""
           << kCanvas - kMargin + 6 << "\" stroke=\"black\"/>";
        os << "<text x=\"" << num(x) << "\" y=\"" << kCanvas - kMargin + 22 << "\" font-size=\"13\" "
           << "text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        os << "<line x1=\"" << kMargin - 6 << "\" y1=\"" << num(y) << "\" x2=\"" << kMargin << "\" y2=\"" << num(y)
           << "\" stroke=\"black\"/>";
        os << "<text x=\"" << kMargin - 10 << "\" y=\"" << num(y + 4) << "\" font-size=\"13\" "
           << "text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    os << "<text x=\"" << kCanvas / 2 << "\" y=\"40\" font-size=\"18\" text-anchor=\"middle\">" << escape(title_)
       << "</text>\n";
    os << "<text x=\"" << kCanvas / 2 << "\" y=\"" << kCanvas - 30 << "\" font-size=\"14\" text-anchor=\"middle\">"
       << escape(xlabel_) << "</text>\n";
    os << "<text x=\"20\" y=\"" << kCanvas / 2 << "\" font-size=\"14\" text-anchor=\"middle\" "
       << "transform=\"rotate(-90 20 " << kCanvas / 2 << ")\">" << escape(ylabel_) << "</text>\n";
    if (!legend_.empty()) {
        std::size_t longest = 0;
        for (const auto& l : legend_) longest = std::max(longest, l.size());
        const double width = 7.2 * static_cast<double>(longest) + 12.0;
        os << "<rect x=\"" << num(kCanvas - kMargin - 4 - width) << "\" y=\"" << kMargin + 4 << "\" width=\""
           << num(width) << "\" height=\"" << 18 * legend_.size() + 8
           << "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    }
    for (std::size_t i = 0; i < legend_.size(); ++i)
        os << "<text x=\"" << kCanvas - kMargin - 10 << "\" y=\"" << kMargin + 22 + 18 * i
           << "\" font-size=\"13\" text-anchor=\"end\">" << escape(legend_[i]) << "</text>\n";
    os << "</svg>\n";
}

}  // namespace stepfit::io
