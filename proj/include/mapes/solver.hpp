#pragma once

#include <Eigen/Dense>

#include "mapes/prior.hpp"

namespace mapes {

enum class Representation { Z, S };

/// K x K response at the I/O ports across the frequency grid.
struct NetworkResponse {
    std::vector<int> io_ports;
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> m;
    Representation rep = Representation::Z;
    double ref_ohms = 0.0;  // meaningful when rep == S

    int k() const { return m.empty() ? 0 : static_cast<int>(m[0].rows()); }
};

/// Instrumentation for the cost-scaling property: the dimension of the
/// factored system depends only on the Short+Finite port count.
struct ReduceStats {
    Eigen::Index solve_dim = 0;
};

/// Closed-form multiport reduction: per frequency, eliminate Open ports
/// exactly (zero port current), then form A = Z_vp,vp(kept) + diag(loads),
/// solve A X = Z_vp,io(kept) with one LU factorization, and return
/// Z_io,io - Z_io,vp(kept) X. All-Open degenerates to Z_io,io.
NetworkResponse reduce(const PartitionedPrior& partitioned,
                       const LoadAssignment& loads,
                       ReduceStats* stats = nullptr);

/// S = (Z - z0 I)(Z + z0 I)^-1, equal real reference on all ports.
NetworkResponse z_to_s(const NetworkResponse& resp, double ref_ohms);

/// Z = z0 (I + S)(I - S)^-1.
NetworkResponse s_to_z(const NetworkResponse& resp, double ref_ohms);

/// One-shot wrapper: partition -> map_to_loads -> reduce.
NetworkResponse evaluate(const PriorData& prior, const PortTopology& topo,
                         const PixelPattern& pattern, const IoSelection& io,
                         std::complex<double> via_z = 0.0,
                         ReduceStats* stats = nullptr);

/// Same wrapper against an already-partitioned prior; this is the hot path
/// for batch evaluation where the I/O selection is fixed.
NetworkResponse evaluate(const PartitionedPrior& partitioned,
                         const PortTopology& topo, const PixelPattern& pattern,
                         std::complex<double> via_z = 0.0,
                         ReduceStats* stats = nullptr);

}  // namespace mapes
