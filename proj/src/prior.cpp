#include "mapes/prior.hpp"

#include <algorithm>

namespace mapes {

void PriorData::validate() const {
    if (!topo) throw ValidationError("prior has no topology");
    if (freqs.size() != z.size())
        throw DimensionMismatch("prior frequency/matrix count mismatch");
    validate_freq_grid(freqs);
    const int q = topo->q();
    for (const auto& m : z)
        if (m.rows() != q || m.cols() != q)
            throw PortCountMismatch("prior matrix dimension " +
                                    std::to_string(m.rows()) +
                                    " does not match Q=" + std::to_string(q));
}

std::vector<ReciprocityViolation> PriorData::check_reciprocity(
    double tol) const {
    std::vector<ReciprocityViolation> out;
    for (size_t f = 0; f < z.size(); ++f) {
        const auto& m = z[f];
        for (int p = 0; p < m.rows(); ++p)
            for (int q = p + 1; q < m.cols(); ++q) {
                double err = std::abs(m(p, q) - m(q, p)) /
                             std::max(1.0, std::abs(m(p, q)));
                if (err > tol)
                    out.push_back({static_cast<int>(f), p, q, err});
            }
    }
    return out;
}

PartitionedPrior partition(const PriorData& prior, const IoSelection& io) {
    prior.validate();
    const int q = prior.topo->q();
    std::vector<char> is_io(q, 0);
    for (int p : io.ports) {
        if (p < 0 || p >= q)
            throw ValidationError("I/O port index out of range: " +
                                  std::to_string(p));
        if (is_io[p])
            throw ValidationError("duplicate I/O port index: " +
                                  std::to_string(p));
        is_io[p] = 1;
    }

    PartitionedPrior out;
    out.io = io;
    out.freqs = prior.freqs;
    out.vp_ports.reserve(q - io.ports.size());
    for (int p = 0; p < q; ++p)
        if (!is_io[p]) out.vp_ports.push_back(p);
    out.permutation = io.ports;
    out.permutation.insert(out.permutation.end(), out.vp_ports.begin(),
                           out.vp_ports.end());

    const int k = static_cast<int>(io.ports.size());
    const int v = q - k;
    for (const auto& m : prior.z) {
        Eigen::MatrixXcd a(k, k), b(k, v), c(v, k), d(v, v);
        for (int r = 0; r < k; ++r)
            for (int s = 0; s < k; ++s)
                a(r, s) = m(io.ports[r], io.ports[s]);
        for (int r = 0; r < k; ++r)
            for (int s = 0; s < v; ++s)
                b(r, s) = m(io.ports[r], out.vp_ports[s]);
        for (int r = 0; r < v; ++r)
            for (int s = 0; s < k; ++s)
                c(r, s) = m(out.vp_ports[r], io.ports[s]);
        for (int r = 0; r < v; ++r)
            for (int s = 0; s < v; ++s)
                d(r, s) = m(out.vp_ports[r], out.vp_ports[s]);
        out.z_io_io.push_back(std::move(a));
        out.z_io_vp.push_back(std::move(b));
        out.z_vp_io.push_back(std::move(c));
        out.z_vp_vp.push_back(std::move(d));
    }
    return out;
}

Eigen::MatrixXcd PartitionedPrior::assemble(int f) const {
    const int kk = k();
    const int v = static_cast<int>(vp_ports.size());
    Eigen::MatrixXcd m(kk + v, kk + v);
    m.topLeftCorner(kk, kk) = z_io_io[f];
    m.topRightCorner(kk, v) = z_io_vp[f];
    m.bottomLeftCorner(v, kk) = z_vp_io[f];
    m.bottomRightCorner(v, v) = z_vp_vp[f];
    return m;
}

}  // namespace mapes
