#pragma once

#include <string>
#include <vector>

#include "mapes/errors.hpp"

namespace mapes {

/// An L-layer M x N pixel design space together with its frequency grid.
/// Immutable after construction; construction validates all invariants.
class DesignSpace {
public:
    DesignSpace(int layers, int rows, int cols, bool has_vias,
                std::vector<double> freq_grid);

    int layers() const { return layers_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool has_vias() const { return has_vias_; }
    const std::vector<double>& freq_grid() const { return freq_grid_; }

    /// Number of M x N slices in a pattern tensor: L pixel slices plus
    /// L-1 via slices when vias are enabled.
    int pattern_slices() const { return has_vias_ ? 2 * layers_ - 1 : layers_; }
    int via_slices() const { return has_vias_ ? layers_ - 1 : 0; }

    bool same_geometry(const DesignSpace& o) const {
        return layers_ == o.layers_ && rows_ == o.rows_ && cols_ == o.cols_ &&
               has_vias_ == o.has_vias_;
    }
    bool operator==(const DesignSpace& o) const {
        return same_geometry(o) && freq_grid_ == o.freq_grid_;
    }

private:
    int layers_;
    int rows_;
    int cols_;
    bool has_vias_;
    std::vector<double> freq_grid_;
};

/// Parses a "start:stop:points" frequency sweep spec into a grid in Hz.
std::vector<double> parse_freq_spec(const std::string& spec);

void validate_freq_grid(const std::vector<double>& grid);

}  // namespace mapes
