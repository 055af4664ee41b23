#pragma once

#include <Eigen/Sparse>
#include <memory>

#include "mapes/prior.hpp"
#include "mapes/solver.hpp"

namespace mapes {

/// Element-value ranges for synthetic network generation. Defaults place the
/// resonances of port branches and pixel shunts inside a 1-100 GHz sweep.
struct SynthParams {
    double branch_r_min = 0.05, branch_r_max = 0.5;    // ohms
    double branch_l_min = 0.1e-9, branch_l_max = 1e-9;  // henry
    double shunt_c_min = 5e-15, shunt_c_max = 50e-15;   // farad
    double shunt_g_min = 1e-6, shunt_g_max = 1e-4;      // siemens
    /// Weak parasitic coupling between nearby non-adjacent pixel nodes;
    /// disabled at 0.
    double coupling_g = 0.0;   // siemens
    double coupling_c = 0.0;   // farad
};

/// Ground-referenced nodal system over complex admittance elements. The
/// ground node is eliminated; element stamps are reciprocal, so the matrix
/// is complex symmetric.
class MnaSystem {
public:
    explicit MnaSystem(int node_count) : n_(node_count) {}

    int node_count() const { return n_; }

    /// node indices: 0..n-1, or -1 for ground.
    void add_series_rl(int a, int b, double r, double l);
    void add_gc(int a, int b, double g, double c);
    void add_shunt_gc(int node, double g, double c) { add_gc(node, -1, g, c); }
    void add_admittance(int a, int b, std::complex<double> y);

    Eigen::SparseMatrix<std::complex<double>> assemble(double omega) const;

    /// Factorizes at omega and solves for the given right-hand sides.
    Eigen::MatrixXcd solve(double omega, const Eigen::MatrixXcd& rhs) const;

private:
    struct Element {
        enum class Kind { SeriesRL, GC, FixedY };
        Kind kind;
        int a;
        int b;
        double r = 0, l = 0, g = 0, c = 0;
        std::complex<double> y{};
    };
    int n_;
    std::vector<Element> elements_;
};

/// Lumped RLC network over the virtual-pixel graph: one node per virtual
/// pixel and per diagonal virtual pixel, plus ground. Each port interrupts a
/// physical path modeled as a series R+jwL branch; every structural node has
/// a lossy G+jwC shunt to ground, so the network has no purely imaginary
/// resonances.
class SyntheticNetwork {
public:
    struct PortBranch {
        double r;
        double l;
    };
    struct Shunt {
        double g;
        double c;
    };
    struct Coupling {
        int a;
        int b;
        double g;
        double c;
    };

    static SyntheticNetwork generate(std::shared_ptr<const PortTopology> topo,
                                     const SynthParams& params,
                                     std::uint64_t seed);

    const PortTopology& topo() const { return *topo_; }
    std::shared_ptr<const PortTopology> topo_ptr() const { return topo_; }
    std::uint64_t seed() const { return seed_; }
    const SynthParams& params() const { return params_; }

    int pixel_node_count() const;
    int diagonal_node_count() const;
    int structural_node_count() const { return n_struct_; }

    /// Structural node index of a NodeRef; -1 for ground.
    int node_of(const NodeRef& ref) const;

    const PortBranch& branch(int port) const { return branches_[port]; }
    const std::vector<Shunt>& shunts() const { return shunts_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }

    /// Swaps which structural node carries the port's series branch;
    /// diagnostic hook for sign-convention checks.
    void flip_port(int port) { flipped_[port] = !flipped_[port]; }

    /// Z_ALL[q][p] = voltage at port q when unit current drives port p with
    /// every other port open.
    PriorData extract_prior(const std::vector<double>& freq_grid) const;

    /// Brute-force ground truth: physically insert each load (Short: exact
    /// node collapse; Finite: branch admittance 1/z; Open: unconnected) and
    /// solve the K-port impedance at the I/O ports by nodal analysis.
    NetworkResponse oracle_solve(const PixelPattern& pattern,
                                 const IoSelection& io,
                                 std::complex<double> via_z,
                                 const std::vector<double>& freq_grid) const;

    nlohmann::json to_json() const;
    static SyntheticNetwork from_json(const nlohmann::json& j,
                                      std::vector<double> freq_grid = {1.0});

private:
    SyntheticNetwork() = default;

    // Port anchor/other structural nodes with orientation applied.
    void port_nodes(int port, int& anchor, int& other) const;

    std::shared_ptr<const PortTopology> topo_;
    SynthParams params_;
    std::uint64_t seed_ = 0;
    int n_struct_ = 0;
    std::vector<PortBranch> branches_;
    std::vector<Shunt> shunts_;
    std::vector<Coupling> couplings_;
    std::vector<char> flipped_;
};

}  // namespace mapes
