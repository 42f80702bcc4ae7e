#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stepfit/experiments.hpp"
#include "stepfit/fitting.hpp"
#include "stepfit/polynomial.hpp"
#include "stepfit/stability.hpp"

namespace stepfit::io {

/// 17 significant digits ("%.17g"); round-trips every finite double.
std::string fmt_double(double v);

/// Output sink for a path, or standard output for "-". Throws IoError.
class Output {
public:
    explicit Output(const std::string& path);
    ~Output();
    std::ostream& stream();
    /// Flushes and reports write failures as IoError.
    void close();

private:
    std::string path_;
    std::unique_ptr<std::ostream> file_;
    bool closed_ = false;
};

/// Whole file (or standard input for "-"). Throws IoError.
std::string read_text(const std::string& path);

/// Header t,re,im; row 0 is Z0 at t = 0.
void write_trajectory_csv(std::ostream& os, const TrajectoryData& d);

/// Inverse of write_trajectory_csv. H is taken from t_1 - t_0; m must be
/// supplied since the file does not record it.
TrajectoryData parse_trajectory_csv(std::string_view text, int m = 1);

/// Header t,x,y; row 0 is x0.
void write_vector_csv(std::ostream& os, const Vector2& x0, std::span<const Vector2> data, double h);
void parse_vector_csv(std::string_view text, Vector2& x0, std::vector<Vector2>& data, double& h);

struct Rgb {
    int r = 0, g = 0, b = 0;
};

/// Perceptually ordered ramp on [0, 1].
Rgb ramp(double t);

struct Segment {
    double x0, y0, x1, y1;
};

/// Level-set segments of a cell-centred map (marching squares on the
/// lattice of cell centres). Flagged or non-finite corners are skipped.
std::vector<Segment> contour(const RegionMap& map, double level, const std::function<double(double)>& transform = {});

/// Fixed 800 x 800 canvas with a plot frame, tick labels and legend text.
class SvgPlot {
public:
    SvgPlot(Window w, std::string title, std::string xlabel, std::string ylabel);

    /// Cells coloured by colour(ix, iy); horizontal runs of equal colour are merged.
    void cells(const RegionMap& map, const std::function<Rgb(int, int)>& colour);
    void polyline(const std::vector<Complex>& pts, std::string_view stroke, double width = 1.5);
    void segments(const std::vector<Segment>& segs, std::string_view stroke, double width = 1.5);
    void legend(std::string text);
    void write(std::ostream& os) const;

private:
    double px(double x) const;
    double py(double y) const;

    Window w_;
    std::string title_, xlabel_, ylabel_;
    std::vector<std::string> body_;
    std::vector<std::string> legend_;
};

inline constexpr int kCanvas = 800;

}  // namespace stepfit::io
