#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "mapes/pattern.hpp"
#include "mapes/topology.hpp"

namespace mapes {

/// One reciprocity violation found by PriorData::check_reciprocity.
struct ReciprocityViolation {
    int freq_index;
    int p;
    int q;
    double error;  // |Z_pq - Z_qp| / max(1, |Z_pq|)
};

/// Per-frequency Q x Q prior impedance matrices (ohms) tied to a topology.
/// Immutable after load; frequency slabs may be read concurrently.
struct PriorData {
    std::shared_ptr<const PortTopology> topo;
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> z;

    void validate() const;

    std::vector<ReciprocityViolation> check_reciprocity(
        double tol = 1e-6) const;
};

/// Four-block partition of the permuted prior: I/O ports first in
/// selection order, remaining ports ascending by original index.
struct PartitionedPrior {
    IoSelection io;
    std::vector<int> vp_ports;     // ascending original indices
    std::vector<int> permutation;  // io.ports ++ vp_ports
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> z_io_io;
    std::vector<Eigen::MatrixXcd> z_io_vp;
    std::vector<Eigen::MatrixXcd> z_vp_io;
    std::vector<Eigen::MatrixXcd> z_vp_vp;

    int k() const { return static_cast<int>(io.ports.size()); }

    /// Reassembles the permuted matrix at one frequency (bit-exact).
    Eigen::MatrixXcd assemble(int freq_index) const;
};

PartitionedPrior partition(const PriorData& prior, const IoSelection& io);

}  // namespace mapes
