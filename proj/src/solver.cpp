#include "mapes/solver.hpp"

#include <cmath>

namespace mapes {

namespace {

// Cheap singularity guard from the LU diagonal: exact zeros and extreme
// diagonal ratios both indicate an unusable factorization.
void check_lu(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, double freq_hz,
              const char* what) {
    const auto diag = lu.matrixLU().diagonal();
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        double a = std::abs(diag(i));
        dmin = std::min(dmin, a);
        dmax = std::max(dmax, a);
    }
    double cond = dmin > 0.0 ? dmax / dmin
                             : std::numeric_limits<double>::infinity();
    if (!(dmin > 0.0) || cond > 1e14)
        throw SingularSystem(
            std::string(what) + " numerically singular at " +
            std::to_string(freq_hz) + " Hz (diagonal condition estimate " +
            std::to_string(cond) +
            "); consider adding loss to the prior network");
}

}  // namespace

NetworkResponse reduce(const PartitionedPrior& partitioned,
                       const LoadAssignment& loads, ReduceStats* stats) {
    if (loads.vp_ports != partitioned.vp_ports ||
        loads.io.ports != partitioned.io.ports)
        throw DimensionMismatch(
            "load assignment is keyed inconsistently with the partition");

    const int v = static_cast<int>(partitioned.vp_ports.size());
    std::vector<int> kept;  // positions within the VP block
    kept.reserve(v);
    for (int i = 0; i < v; ++i)
        if (loads.loads[i].state != LoadState::Open) kept.push_back(i);
    const int nk = static_cast<int>(kept.size());
    if (stats) stats->solve_dim = nk;

    NetworkResponse out;
    out.io_ports = partitioned.io.ports;
    out.freqs = partitioned.freqs;
    out.rep = Representation::Z;
    const int k = partitioned.k();

    for (size_t f = 0; f < partitioned.freqs.size(); ++f) {
        if (nk == 0) {
            out.m.push_back(partitioned.z_io_io[f]);
            continue;
        }
        Eigen::MatrixXcd a(nk, nk);
        for (int r = 0; r < nk; ++r)
            for (int c = 0; c < nk; ++c)
                a(r, c) = partitioned.z_vp_vp[f](kept[r], kept[c]);
        for (int r = 0; r < nk; ++r)
            if (loads.loads[kept[r]].state == LoadState::Finite)
                a(r, r) += loads.loads[kept[r]].z;

        Eigen::MatrixXcd rhs(nk, k);
        for (int r = 0; r < nk; ++r)
            rhs.row(r) = partitioned.z_vp_io[f].row(kept[r]);

        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        check_lu(lu, partitioned.freqs[f], "load-augmented VP block");
        Eigen::MatrixXcd x = lu.solve(rhs);

        Eigen::MatrixXcd left(k, nk);
        for (int c = 0; c < nk; ++c)
            left.col(c) = partitioned.z_io_vp[f].col(kept[c]);
        out.m.push_back(partitioned.z_io_io[f] - left * x);
    }
    return out;
}

NetworkResponse z_to_s(const NetworkResponse& resp, double ref_ohms) {
    if (resp.rep != Representation::Z)
        throw RepresentationMismatch("z_to_s expects a Z response");
    if (!(ref_ohms > 0.0))
        throw ValidationError("reference impedance must be positive");
    NetworkResponse out;
    out.io_ports = resp.io_ports;
    out.freqs = resp.freqs;
    out.rep = Representation::S;
    out.ref_ohms = ref_ohms;
    for (size_t f = 0; f < resp.m.size(); ++f) {
        const auto& z = resp.m[f];
        Eigen::MatrixXcd zp = z;
        zp.diagonal().array() += ref_ohms;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(zp);
        check_lu(lu, resp.freqs[f], "Z + z0 I");
        Eigen::MatrixXcd zm = z;
        zm.diagonal().array() -= ref_ohms;
        // (Z-z0I) and (Z+z0I)^-1 commute, so the left solve equals S.
        out.m.push_back(lu.solve(zm));
    }
    return out;
}

NetworkResponse s_to_z(const NetworkResponse& resp, double ref_ohms) {
    if (resp.rep != Representation::S)
        throw RepresentationMismatch("s_to_z expects an S response");
    if (!(ref_ohms > 0.0))
        throw ValidationError("reference impedance must be positive");
    NetworkResponse out;
    out.io_ports = resp.io_ports;
    out.freqs = resp.freqs;
    out.rep = Representation::Z;
    for (size_t f = 0; f < resp.m.size(); ++f) {
        const auto& s = resp.m[f];
        Eigen::MatrixXcd ims =
            Eigen::MatrixXcd::Identity(s.rows(), s.cols()) - s;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ims);
        check_lu(lu, resp.freqs[f], "I - S");
        Eigen::MatrixXcd ips =
            Eigen::MatrixXcd::Identity(s.rows(), s.cols()) + s;
        // (I+S) and (I-S)^-1 commute.
        out.m.push_back(ref_ohms * lu.solve(ips));
    }
    return out;
}

NetworkResponse evaluate(const PartitionedPrior& partitioned,
                         const PortTopology& topo, const PixelPattern& pattern,
                         std::complex<double> via_z, ReduceStats* stats) {
    LoadAssignment loads = map_to_loads(pattern, topo, partitioned.io, via_z);
    return reduce(partitioned, loads, stats);
}

NetworkResponse evaluate(const PriorData& prior, const PortTopology& topo,
                         const PixelPattern& pattern, const IoSelection& io,
                         std::complex<double> via_z, ReduceStats* stats) {
    PartitionedPrior part = partition(prior, io);
    return evaluate(part, topo, pattern, via_z, stats);
}

}  // namespace mapes
