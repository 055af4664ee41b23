#include "mapes/design_space.hpp"

#include <cstdlib>
#include <sstream>

namespace mapes {

void validate_freq_grid(const std::vector<double>& grid) {
    if (grid.empty())
        throw ValidationError("frequency grid must be nonempty");
    double prev = 0.0;
    for (double f : grid) {
        if (f <= 0.0)
            throw ValidationError("frequencies must be positive");
        if (f <= prev)
            throw NonIncreasingFrequencies(
                "frequency grid must be strictly increasing");
        prev = f;
    }
}

DesignSpace::DesignSpace(int layers, int rows, int cols, bool has_vias,
                         std::vector<double> freq_grid)
    : layers_(layers),
      rows_(rows),
      cols_(cols),
      has_vias_(has_vias),
      freq_grid_(std::move(freq_grid)) {
    if (layers_ < 1 || rows_ < 1 || cols_ < 1)
        throw ValidationError("design space dimensions must be >= 1");
    if (has_vias_ && layers_ < 2)
        throw ValidationError("vias require at least two layers");
    validate_freq_grid(freq_grid_);
}

std::vector<double> parse_freq_spec(const std::string& spec) {
    std::istringstream ss(spec);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
        !std::getline(ss, c))
        throw MalformedInput("frequency spec must be start:stop:points");
    char* end = nullptr;
    double start = std::strtod(a.c_str(), &end);
    if (end == a.c_str()) throw MalformedInput("bad frequency start: " + a);
    double stop = std::strtod(b.c_str(), &end);
    if (end == b.c_str()) throw MalformedInput("bad frequency stop: " + b);
    long points = std::strtol(c.c_str(), &end, 10);
    if (end == c.c_str() || points < 1)
        throw MalformedInput("bad frequency point count: " + c);
    if (points == 1) {
        if (start != stop)
            throw MalformedInput("single-point sweep requires start == stop");
        return {start};
    }
    std::vector<double> grid(points);
    for (long i = 0; i < points; ++i)
        grid[i] = start + (stop - start) * double(i) / double(points - 1);
    validate_freq_grid(grid);
    return grid;
}

}  // namespace mapes
