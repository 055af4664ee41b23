#include "mapes/synth.hpp"

#include <Eigen/SparseLU>
#include <numbers>
#include <numeric>

#include "mapes/rng.hpp"

namespace mapes {

using Cx = std::complex<double>;

// ---------------------------------------------------------------------------
// MnaSystem

void MnaSystem::add_series_rl(int a, int b, double r, double l) {
    elements_.push_back({Element::Kind::SeriesRL, a, b, r, l});
}

void MnaSystem::add_gc(int a, int b, double g, double c) {
    elements_.push_back({Element::Kind::GC, a, b, 0, 0, g, c});
}

void MnaSystem::add_admittance(int a, int b, Cx y) {
    Element e{Element::Kind::FixedY, a, b};
    e.y = y;
    elements_.push_back(e);
}

Eigen::SparseMatrix<Cx> MnaSystem::assemble(double omega) const {
    std::vector<Eigen::Triplet<Cx>> trips;
    trips.reserve(elements_.size() * 4);
    auto stamp = [&](int a, int b, Cx y) {
        if (a == b) return;  // merged endpoints: no-op
        if (a >= 0) trips.emplace_back(a, a, y);
        if (b >= 0) trips.emplace_back(b, b, y);
        if (a >= 0 && b >= 0) {
            trips.emplace_back(a, b, -y);
            trips.emplace_back(b, a, -y);
        }
    };
    for (const auto& e : elements_) {
        switch (e.kind) {
            case Element::Kind::SeriesRL:
                stamp(e.a, e.b, 1.0 / Cx(e.r, omega * e.l));
                break;
            case Element::Kind::GC:
                stamp(e.a, e.b, Cx(e.g, omega * e.c));
                break;
            case Element::Kind::FixedY:
                stamp(e.a, e.b, e.y);
                break;
        }
    }
    Eigen::SparseMatrix<Cx> y(n_, n_);
    y.setFromTriplets(trips.begin(), trips.end());
    return y;
}

Eigen::MatrixXcd MnaSystem::solve(double omega,
                                  const Eigen::MatrixXcd& rhs) const {
    Eigen::SparseMatrix<Cx> y = assemble(omega);
    Eigen::SparseLU<Eigen::SparseMatrix<Cx>> lu;
    lu.compute(y);
    if (lu.info() != Eigen::Success)
        throw SingularSystem("nodal matrix singular at omega=" +
                             std::to_string(omega) +
                             " rad/s; the network must be strictly lossy");
    return lu.solve(rhs);
}

// ---------------------------------------------------------------------------
// SyntheticNetwork

int SyntheticNetwork::pixel_node_count() const {
    const auto& s = topo_->space();
    return s.layers() * s.rows() * s.cols();
}

int SyntheticNetwork::diagonal_node_count() const {
    const auto& s = topo_->space();
    return s.layers() * (s.rows() - 1) * (s.cols() - 1);
}

int SyntheticNetwork::node_of(const NodeRef& ref) const {
    const auto& s = topo_->space();
    const int per_layer =
        s.rows() * s.cols() + (s.rows() - 1) * (s.cols() - 1);
    switch (ref.kind) {
        case NodeRef::Kind::GroundPlane:
            return -1;
        case NodeRef::Kind::Pixel:
            return (ref.layer - 1) * per_layer + ref.i * s.cols() + ref.j;
        case NodeRef::Kind::Diagonal:
            return (ref.layer - 1) * per_layer + s.rows() * s.cols() +
                   ref.i * (s.cols() - 1) + ref.j;
    }
    return -1;
}

SyntheticNetwork SyntheticNetwork::generate(
    std::shared_ptr<const PortTopology> topo, const SynthParams& params,
    std::uint64_t seed) {
    if (params.branch_r_min <= 0 || params.shunt_g_min <= 0 ||
        params.branch_r_max < params.branch_r_min ||
        params.branch_l_max < params.branch_l_min ||
        params.shunt_c_max < params.shunt_c_min ||
        params.shunt_g_max < params.shunt_g_min)
        throw ValidationError("element-value ranges must be positive");

    SyntheticNetwork net;
    net.topo_ = std::move(topo);
    net.params_ = params;
    net.seed_ = seed;
    net.n_struct_ = net.pixel_node_count() + net.diagonal_node_count();
    net.flipped_.assign(net.topo_->q(), 0);

    SplitMix64 rng(seed);
    net.branches_.reserve(net.topo_->q());
    for (int p = 0; p < net.topo_->q(); ++p)
        net.branches_.push_back(
            {rng.uniform(params.branch_r_min, params.branch_r_max),
             rng.uniform(params.branch_l_min, params.branch_l_max)});
    net.shunts_.reserve(net.n_struct_);
    for (int n = 0; n < net.n_struct_; ++n)
        net.shunts_.push_back(
            {rng.uniform(params.shunt_g_min, params.shunt_g_max),
             rng.uniform(params.shunt_c_min, params.shunt_c_max)});

    if (params.coupling_g > 0.0 || params.coupling_c > 0.0) {
        // Weak coupling between same-layer pixel nodes two cells apart
        // (never edge-adjacent).
        const auto& s = net.topo_->space();
        for (int l = 1; l <= s.layers(); ++l)
            for (int i = 0; i < s.rows(); ++i)
                for (int j = 0; j < s.cols(); ++j) {
                    int a = net.node_of(NodeRef::pixel(l, i, j));
                    const int targets[3][2] = {
                        {i + 2, j}, {i, j + 2}, {i + 2, j + 2}};
                    for (const auto& t : targets) {
                        if (t[0] >= s.rows() || t[1] >= s.cols()) continue;
                        int b = net.node_of(NodeRef::pixel(l, t[0], t[1]));
                        net.couplings_.push_back(
                            {a, b, params.coupling_g * rng.uniform(0.5, 1.0),
                             params.coupling_c * rng.uniform(0.5, 1.0)});
                    }
                }
    }
    return net;
}

void SyntheticNetwork::port_nodes(int port, int& anchor, int& other) const {
    const PortId& p = topo_->port(port);
    int a = node_of(p.node_a);
    int b = node_of(p.node_b);
    if (flipped_[port]) std::swap(a, b);
    anchor = a;
    other = b;
}

PriorData SyntheticNetwork::extract_prior(
    const std::vector<double>& freq_grid) const {
    validate_freq_grid(freq_grid);
    const int q = topo_->q();
    const int n = n_struct_ + q;  // structural nodes + one terminal per port

    MnaSystem base(n);
    for (int node = 0; node < n_struct_; ++node)
        base.add_shunt_gc(node, shunts_[node].g, shunts_[node].c);
    for (const auto& c : couplings_) base.add_gc(c.a, c.b, c.g, c.c);
    for (int p = 0; p < q; ++p) {
        int anchor, other;
        port_nodes(p, anchor, other);
        (void)other;
        base.add_series_rl(anchor, n_struct_ + p, branches_[p].r,
                           branches_[p].l);
    }

    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, q);
    for (int p = 0; p < q; ++p) {
        int anchor, other;
        port_nodes(p, anchor, other);
        rhs(n_struct_ + p, p) += 1.0;
        if (other >= 0) rhs(other, p) -= 1.0;
    }

    PriorData prior;
    prior.topo = topo_;
    prior.freqs = freq_grid;
    for (double f : freq_grid) {
        const double omega = 2.0 * std::numbers::pi * f;
        Eigen::MatrixXcd v = base.solve(omega, rhs);
        Eigen::MatrixXcd z(q, q);
        for (int p = 0; p < q; ++p)
            for (int r = 0; r < q; ++r) {
                int anchor, other;
                port_nodes(r, anchor, other);
                Cx vb = other >= 0 ? v(other, p) : Cx(0.0);
                z(r, p) = v(n_struct_ + r, p) - vb;
            }
        prior.z.push_back(std::move(z));
    }
    return prior;
}

namespace {

// Plain union-find over node ids; the last id acts as the ground root.
class NodeMerge {
public:
    explicit NodeMerge(int n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }

private:
    std::vector<int> parent_;
};

}  // namespace

NetworkResponse SyntheticNetwork::oracle_solve(
    const PixelPattern& pattern, const IoSelection& io,
    std::complex<double> via_z, const std::vector<double>& freq_grid) const {
    validate_freq_grid(freq_grid);
    const auto& ps = pattern.space();
    const auto& ts = topo_->space();
    if (ps.layers() != ts.layers() || ps.rows() != ts.rows() ||
        ps.cols() != ts.cols())
        throw DimensionMismatch("pattern and network design spaces differ");
    const bool pattern_has_vias = ps.has_vias();

    const int q = topo_->q();
    const int gnd = n_struct_ + q;  // union-find ground root
    std::vector<char> is_io(q, 0);
    for (int p : io.ports) is_io[p] = 1;

    // Per-port physical action, derived directly from the pattern: present
    // connections collapse the port gap, absent ones leave it open.
    enum class Action { Open, Merge, Finite, Port };
    std::vector<Action> action(q, Action::Open);
    NodeMerge merge(n_struct_ + q + 1);
    auto terminal = [&](int p) { return n_struct_ + p; };
    auto uf_node = [&](int structural) {
        return structural < 0 ? gnd : structural;
    };

    for (int p = 0; p < q; ++p) {
        const PortId& port = topo_->port(p);
        if (is_io[p]) {
            action[p] = Action::Port;
            continue;
        }
        bool connect = false;
        bool finite = false;
        switch (port.cls) {
            case PortClass::Ground:
                break;  // non-I/O ground ports stay open
            case PortClass::HorizontalEdge:
            case PortClass::VerticalEdge:
                connect = pattern.pixel(port.node_a.layer, port.node_a.i,
                                        port.node_a.j) &&
                          pattern.pixel(port.node_b.layer, port.node_b.i,
                                        port.node_b.j);
                break;
            case PortClass::Diagonal:
                connect = pattern.pixel(port.node_b.layer, port.node_b.i,
                                        port.node_b.j);
                break;
            case PortClass::Via:
                if (pattern_has_vias && pattern.via(port.layer, port.i, port.j)) {
                    if (via_z == Cx(0.0))
                        connect = true;
                    else
                        finite = true;
                }
                break;
        }
        if (connect) {
            action[p] = Action::Merge;
            int anchor, other;
            port_nodes(p, anchor, other);
            merge.unite(terminal(p), uf_node(other));
        } else if (finite) {
            action[p] = Action::Finite;
        }
    }

    // Compress the surviving nodes: structural nodes plus terminals of I/O
    // and finite-loaded ports. Open-port terminals carry no current and are
    // dropped; ground collapses away.
    const int gnd_rep = merge.find(gnd);
    std::vector<int> compressed(n_struct_ + q + 1, -2);
    compressed[gnd_rep] = -1;
    int next = 0;
    auto compress = [&](int uf_id) {
        int rep = merge.find(uf_id);
        if (compressed[rep] == -2) compressed[rep] = next++;
        return compressed[rep];
    };
    for (int node = 0; node < n_struct_; ++node) compress(node);
    for (int p = 0; p < q; ++p)
        if (action[p] == Action::Port || action[p] == Action::Finite)
            compress(terminal(p));

    MnaSystem mna(next);
    for (int node = 0; node < n_struct_; ++node)
        mna.add_shunt_gc(compress(node), shunts_[node].g, shunts_[node].c);
    for (const auto& c : couplings_)
        mna.add_gc(compress(c.a), compress(c.b), c.g, c.c);
    for (int p = 0; p < q; ++p) {
        if (action[p] == Action::Open) continue;
        int anchor, other;
        port_nodes(p, anchor, other);
        mna.add_series_rl(compress(uf_node(anchor)), compress(terminal(p)),
                          branches_[p].r, branches_[p].l);
        if (action[p] == Action::Finite)
            mna.add_admittance(compress(terminal(p)), compress(uf_node(other)),
                               1.0 / via_z);
    }

    const int k = static_cast<int>(io.ports.size());
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(next, k);
    for (int c = 0; c < k; ++c) {
        int p = io.ports[c];
        int anchor, other;
        port_nodes(p, anchor, other);
        int t = compress(terminal(p));
        int o = compress(uf_node(other));
        if (t >= 0) rhs(t, c) += 1.0;
        if (o >= 0) rhs(o, c) -= 1.0;
    }

    NetworkResponse out;
    out.io_ports = io.ports;
    out.freqs = freq_grid;
    out.rep = Representation::Z;
    for (double f : freq_grid) {
        const double omega = 2.0 * std::numbers::pi * f;
        Eigen::MatrixXcd v = mna.solve(omega, rhs);
        Eigen::MatrixXcd z(k, k);
        for (int c = 0; c < k; ++c)
            for (int r = 0; r < k; ++r) {
                int p = io.ports[r];
                int anchor, other;
                port_nodes(p, anchor, other);
                int t = compress(terminal(p));
                int o = compress(uf_node(other));
                Cx vt = t >= 0 ? v(t, c) : Cx(0.0);
                Cx vo = o >= 0 ? v(o, c) : Cx(0.0);
                z(r, c) = vt - vo;
            }
        out.m.push_back(std::move(z));
    }
    return out;
}

nlohmann::json SyntheticNetwork::to_json() const {
    nlohmann::json j;
    const auto& s = topo_->space();
    j["space"] = {{"layers", s.layers()},
                  {"rows", s.rows()},
                  {"cols", s.cols()},
                  {"vias", s.has_vias()}};
    j["seed"] = seed_;
    nlohmann::json br = nlohmann::json::array();
    for (const auto& b : branches_) br.push_back({b.r, b.l});
    j["port_branches"] = std::move(br);
    nlohmann::json sh = nlohmann::json::array();
    for (const auto& x : shunts_) sh.push_back({x.g, x.c});
    j["node_shunts"] = std::move(sh);
    nlohmann::json cp = nlohmann::json::array();
    for (const auto& c : couplings_) cp.push_back({c.a, c.b, c.g, c.c});
    j["couplings"] = std::move(cp);
    nlohmann::json fl = nlohmann::json::array();
    for (char f : flipped_) fl.push_back(static_cast<int>(f));
    j["flipped"] = std::move(fl);
    return j;
}

SyntheticNetwork SyntheticNetwork::from_json(const nlohmann::json& j,
                                             std::vector<double> freq_grid) {
    if (!j.contains("space") || !j.contains("port_branches") ||
        !j.contains("node_shunts"))
        throw MalformedInput("not a synthetic network description");
    const auto& s = j["space"];
    DesignSpace space(s["layers"].get<int>(), s["rows"].get<int>(),
                      s["cols"].get<int>(), s["vias"].get<bool>(),
                      std::move(freq_grid));
    SyntheticNetwork net;
    net.topo_ = std::make_shared<PortTopology>(space);
    net.seed_ = j.value("seed", 0ull);
    net.n_struct_ = net.pixel_node_count() + net.diagonal_node_count();
    if (static_cast<int>(j["port_branches"].size()) != net.topo_->q())
        throw MalformedInput("port branch count does not match topology");
    if (static_cast<int>(j["node_shunts"].size()) != net.n_struct_)
        throw MalformedInput("node shunt count does not match topology");
    for (const auto& b : j["port_branches"])
        net.branches_.push_back({b[0].get<double>(), b[1].get<double>()});
    for (const auto& x : j["node_shunts"])
        net.shunts_.push_back({x[0].get<double>(), x[1].get<double>()});
    if (j.contains("couplings"))
        for (const auto& c : j["couplings"])
            net.couplings_.push_back({c[0].get<int>(), c[1].get<int>(),
                                      c[2].get<double>(), c[3].get<double>()});
    net.flipped_.assign(net.topo_->q(), 0);
    if (j.contains("flipped"))
        for (size_t p = 0; p < j["flipped"].size() &&
                           p < net.flipped_.size(); ++p)
            net.flipped_[p] = j["flipped"][p].get<int>() ? 1 : 0;
    return net;
}

}  // namespace mapes
