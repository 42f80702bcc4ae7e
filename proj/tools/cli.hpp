#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepfit/polynomial.hpp"
#include "stepfit/stability.hpp"

namespace stepfit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitIo = 4;

/// Invalid command line. `code` is kExitUsage, or kExitOk for --help (the
/// message then holds the help text).
class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

/// Everything a run depends on. Defaults mirror the --help text.
struct RunConfig {
    std::string command;
    std::vector<std::string> schemes;  // registry tokens; "all" expands in `order`
    std::string custom;                // path to a custom LMM JSON object

    Complex lambda{0.0, 0.0};
    double h = 0.01;

    // gen / fit
    double H = 0.1;
    int m = 1;
    int N = 32;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    Complex Z0{1.0, 0.0};
    std::string data;
    int starts = 8;

    // output
    std::string out = "-";
    std::string format;  // csv | json | svg; empty: inferred from --out
    std::string summary;

    // grids
    std::optional<Window> window;
    int nx = kDefaultGrid;
    int ny = kDefaultGrid;
    int n_theta = 2048;

    // phase
    double a = 0.0;
    std::optional<double> theta;
    int samples = 64;

    // extrap / order
    std::vector<double> h_list;
    std::string measure;  // eigen | scaled; empty: per scheme

    // convdiff
    int k = 1;
    std::string mode = "closed";
    double conv_a = 2.0;
    double conv_eps = 0.01;

    // noise sweeps / matrix fit
    std::vector<double> sigmas;
    int trials = 10;
    std::string kind = "matrix";
    double rate = 1.0;
};

/// Parses argv (argv[0] is the program name). Throws UsageError.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes a parsed configuration; library errors propagate.
void run(const RunConfig& cfg);

/// parse_args + run with exit-code mapping: 2 usage, 3 domain, 4 I/O.
int main_entry(int argc, const char* const* argv, std::ostream& err);

/// "re,im".
Complex parse_complex(const std::string& s);

/// "2^-10..2^-4" (powers of two, unit exponent step) or a comma-separated list.
std::vector<double> parse_number_list(const std::string& s);

/// "x0,x1,y0,y1".
Window parse_window(const std::string& s);

}  // namespace stepfit::cli
