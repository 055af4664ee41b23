#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "mapes/prior.hpp"
#include "mapes/solver.hpp"

namespace mapes {

/// Raw Touchstone v1 contents: frequencies in Hz, matrices denormalized to
/// ohms for Z data or unitless for S data.
struct TouchstoneData {
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> m;
    char param = 'S';  // 'S' or 'Z'
    double ref_ohms = 50.0;
};

/// Port count implied by the .sNp/.zNp extension.
int touchstone_port_count(const std::string& path);

TouchstoneData read_touchstone_file(const std::string& path);
TouchstoneData read_touchstone_stream(std::istream& in, int nports);

/// Reads a prior matrix; S data is converted to Z using the file's reference
/// impedance. Throws PortCountMismatch when the file's port count differs
/// from the topology's Q.
PriorData read_touchstone(const std::string& path,
                          std::shared_ptr<const PortTopology> topo);

/// Writes Touchstone v1, RI numbers, frequencies in Hz. Z data is stored
/// normalized to ref_ohms as the v1 format prescribes.
void write_touchstone(const std::string& path, const std::vector<double>& freqs,
                      const std::vector<Eigen::MatrixXcd>& m, char param,
                      double ref_ohms);
void write_touchstone(std::ostream& out, const std::vector<double>& freqs,
                      const std::vector<Eigen::MatrixXcd>& m, char param,
                      double ref_ohms);

void write_touchstone(const std::string& path, const NetworkResponse& resp,
                      double ref_ohms = 50.0);

}  // namespace mapes
