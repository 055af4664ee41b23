#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mapes/rng.hpp"
#include "mapes/solver.hpp"

using namespace mapes;
using Cx = std::complex<double>;

namespace {

Eigen::MatrixXcd random_symmetric(int n, SplitMix64& rng,
                                  double diag_boost = 0.0) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = Cx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    m = ((m + m.transpose()) / 2.0).eval();
    m.diagonal().array() += Cx(diag_boost, 0.0);
    return m;
}

// Assembles a PartitionedPrior directly from full matrices; lets the solver
// be exercised on hand-built systems without a matching topology.
PartitionedPrior make_partitioned(const std::vector<Eigen::MatrixXcd>& z,
                                  const std::vector<double>& freqs,
                                  const std::vector<int>& io) {
    const int q = static_cast<int>(z[0].rows());
    PartitionedPrior part;
    part.io.ports = io;
    for (int p = 0; p < q; ++p)
        if (std::find(io.begin(), io.end(), p) == io.end())
            part.vp_ports.push_back(p);
    part.permutation = io;
    part.permutation.insert(part.permutation.end(), part.vp_ports.begin(),
                            part.vp_ports.end());
    part.freqs = freqs;
    const int k = static_cast<int>(io.size());
    const int nv = q - k;
    for (const auto& m : z) {
        Eigen::MatrixXcd io_io(k, k), io_vp(k, nv), vp_io(nv, k), vp_vp(nv, nv);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) io_io(r, c) = m(io[r], io[c]);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < nv; ++c)
                io_vp(r, c) = m(io[r], part.vp_ports[c]);
        for (int r = 0; r < nv; ++r)
            for (int c = 0; c < k; ++c)
                vp_io(r, c) = m(part.vp_ports[r], io[c]);
        for (int r = 0; r < nv; ++r)
            for (int c = 0; c < nv; ++c)
                vp_vp(r, c) = m(part.vp_ports[r], part.vp_ports[c]);
        part.z_io_io.push_back(io_io);
        part.z_io_vp.push_back(io_vp);
        part.z_vp_io.push_back(vp_io);
        part.z_vp_vp.push_back(vp_vp);
    }
    return part;
}

LoadAssignment make_loads(const PartitionedPrior& part,
                          const std::vector<Load>& loads) {
    LoadAssignment la;
    la.vp_ports = part.vp_ports;
    la.loads = loads;
    la.io = part.io;
    return la;
}

// Independent check: solve the full terminal equations directly. I/O ports
// carry unit-current excitations one at a time; every loaded port q obeys
// V_q + z_q I_q = 0 (Short: z = 0), Open ports carry no current.
Eigen::MatrixXcd direct_solve(const Eigen::MatrixXcd& z,
                              const std::vector<int>& io,
                              const std::vector<int>& vp,
                              const std::vector<Load>& loads) {
    const int k = static_cast<int>(io.size());
    const int nv = static_cast<int>(vp.size());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nv, nv);
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(nv, k);
    for (int r = 0; r < nv; ++r) {
        if (loads[r].state == LoadState::Open) {
            a(r, r) = 1.0;  // I_r = 0
            continue;
        }
        for (int c = 0; c < nv; ++c) a(r, c) = z(vp[r], vp[c]);
        if (loads[r].state == LoadState::Finite) a(r, r) += loads[r].z;
        for (int c = 0; c < k; ++c) rhs(r, c) = -z(vp[r], io[c]);
    }
    Eigen::MatrixXcd i_vp = a.fullPivLu().solve(rhs);
    Eigen::MatrixXcd out(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
            Cx v = z(io[r], io[c]);
            for (int t = 0; t < nv; ++t) v += z(io[r], vp[t]) * i_vp(t, c);
            out(r, c) = v;
        }
    return out;
}

}  // namespace

TEST_CASE("hand-checked 3-port reduction") {
    Eigen::MatrixXcd z(3, 3);
    z << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    auto part = make_partitioned({z}, {1e9}, {0});
    auto la = make_loads(part, {{LoadState::Short, {}}, {LoadState::Open, {}}});
    ReduceStats stats;
    auto resp = reduce(part, la, &stats);
    REQUIRE(resp.m.size() == 1);
    CHECK(std::abs(resp.m[0](0, 0) - Cx(1.5, 0.0)) < 1e-14);
    CHECK(stats.solve_dim == 1);
}

TEST_CASE("all-open loads return the I/O block untouched") {
    SplitMix64 rng(21);
    auto z = random_symmetric(8, rng);
    auto part = make_partitioned({z}, {1e9}, {3, 6});
    std::vector<Load> loads(6, Load{LoadState::Open, {}});
    ReduceStats stats;
    auto resp = reduce(part, make_loads(part, loads), &stats);
    CHECK((resp.m[0] - part.z_io_io[0]).norm() == 0.0);
    CHECK(stats.solve_dim == 0);
}

TEST_CASE("zero coupling block means loads cannot matter") {
    SplitMix64 rng(22);
    auto z = random_symmetric(6, rng, 5.0);
    // decouple ports {0,1} from the rest
    for (int r = 0; r < 2; ++r)
        for (int c = 2; c < 6; ++c) z(r, c) = z(c, r) = 0.0;
    auto part = make_partitioned({z}, {1e9}, {0, 1});
    std::vector<Load> loads{{LoadState::Short, {}},
                            {LoadState::Finite, Cx(3, 1)},
                            {LoadState::Open, {}},
                            {LoadState::Short, {}}};
    auto resp = reduce(part, make_loads(part, loads));
    CHECK((resp.m[0] - part.z_io_io[0]).norm() < 1e-14);
}

TEST_CASE("reduction matches a direct full-system solve") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int q = 4 + static_cast<int>(rng.uniform(0, 196));
        const int k = 1 + static_cast<int>(rng.uniform(0, 3));
        auto z = random_symmetric(q, rng, 8.0);

        std::vector<int> perm(q);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = q - 1; i > 0; --i)
            std::swap(perm[i], perm[static_cast<int>(rng.uniform(0, i + 1))]);
        std::vector<int> io(perm.begin(), perm.begin() + k);

        auto part = make_partitioned({z}, {1e9}, io);
        std::vector<Load> loads;
        for (size_t i = 0; i < part.vp_ports.size(); ++i) {
            double u = rng.uniform();
            if (u < 0.4)
                loads.push_back({LoadState::Short, {}});
            else if (u < 0.7)
                loads.push_back({LoadState::Open, {}});
            else
                loads.push_back({LoadState::Finite,
                                 Cx(rng.uniform(0.5, 3), rng.uniform(-1, 1))});
        }
        auto resp = reduce(part, make_loads(part, loads));
        auto ref = direct_solve(z, io, part.vp_ports, loads);
        CHECK((resp.m[0] - ref).norm() / ref.norm() < 1e-10);
    }
}

TEST_CASE("a very large finite load is indistinguishable from open") {
    SplitMix64 rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        auto z = random_symmetric(12, rng, 6.0);
        auto part = make_partitioned({z}, {1e9}, {0, 5});
        std::vector<Load> open_loads, big_loads;
        for (int i = 0; i < 10; ++i) {
            bool shorted = rng.bernoulli(0.5);
            open_loads.push_back(
                shorted ? Load{LoadState::Short, {}} : Load{LoadState::Open, {}});
            big_loads.push_back(shorted
                                    ? Load{LoadState::Short, {}}
                                    : Load{LoadState::Finite, Cx(1e12, 0)});
        }
        auto a = reduce(part, make_loads(part, open_loads));
        auto b = reduce(part, make_loads(part, big_loads));
        CHECK((a.m[0] - b.m[0]).norm() / a.m[0].norm() < 1e-4);
    }
}

TEST_CASE("a symmetric prior yields a symmetric response") {
    SplitMix64 rng(25);
    auto z0 = random_symmetric(30, rng, 6.0);
    auto z1 = random_symmetric(30, rng, 6.0);
    auto part = make_partitioned({z0, z1}, {1e9, 2e9}, {2, 9, 17});
    std::vector<Load> loads;
    for (int i = 0; i < 27; ++i) {
        double u = rng.uniform();
        loads.push_back(u < 0.5 ? Load{LoadState::Short, {}}
                       : u < 0.8 ? Load{LoadState::Open, {}}
                                 : Load{LoadState::Finite, Cx(1, 0.3)});
    }
    auto resp = reduce(part, make_loads(part, loads));
    for (const auto& m : resp.m)
        CHECK((m - m.transpose()).norm() / m.norm() < 1e-10);
}

TEST_CASE("solve dimension equals the non-open load count") {
    SplitMix64 rng(26);
    auto z = random_symmetric(15, rng, 6.0);
    auto part = make_partitioned({z}, {1e9}, {0});
    for (int n_closed = 0; n_closed <= 14; ++n_closed) {
        std::vector<Load> loads;
        for (int i = 0; i < 14; ++i)
            loads.push_back(i < n_closed ? Load{LoadState::Short, {}}
                                         : Load{LoadState::Open, {}});
        ReduceStats stats;
        reduce(part, make_loads(part, loads), &stats);
        CHECK(stats.solve_dim == n_closed);
    }
}

TEST_CASE("singular reduced system is reported, not silently inverted") {
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(3, 3);
    z(0, 0) = 1.0;
    z(0, 1) = z(1, 0) = 1.0;
    auto part = make_partitioned({z}, {1e9}, {0});
    auto la = make_loads(part, {{LoadState::Short, {}}, {LoadState::Short, {}}});
    CHECK_THROWS_AS(reduce(part, la), SingularSystem);
}

TEST_CASE("impedance/scattering conversion anchors") {
    std::vector<double> freqs{1e9};

    SUBCASE("matched: Z = z0 I gives S = 0") {
        NetworkResponse z{{}, freqs, {Eigen::MatrixXcd::Identity(3, 3) * 50.0},
                          Representation::Z, 0.0};
        auto s = z_to_s(z, 50.0);
        CHECK(s.rep == Representation::S);
        CHECK(s.ref_ohms == 50.0);
        CHECK(s.m[0].norm() < 1e-14);
    }
    SUBCASE("short: z = 0 gives s = -1") {
        NetworkResponse z{{}, freqs, {Eigen::MatrixXcd::Zero(1, 1)},
                          Representation::Z, 0.0};
        CHECK(std::abs(z_to_s(z, 50.0).m[0](0, 0) - Cx(-1, 0)) < 1e-14);
    }
    SUBCASE("z = 2 z0 gives s = 1/3") {
        NetworkResponse z{{}, freqs,
                          {Eigen::MatrixXcd::Identity(1, 1) * 100.0},
                          Representation::Z, 0.0};
        CHECK(std::abs(z_to_s(z, 50.0).m[0](0, 0) - Cx(1.0 / 3.0, 0)) < 1e-14);
    }
    SUBCASE("s = 0 maps back to z0 I") {
        NetworkResponse s{{}, freqs, {Eigen::MatrixXcd::Zero(2, 2)},
                          Representation::S, 50.0};
        auto z = s_to_z(s, 50.0);
        CHECK(z.rep == Representation::Z);
        CHECK((z.m[0] - Eigen::MatrixXcd::Identity(2, 2) * 50.0).norm() <
              1e-12);
    }
}

TEST_CASE("conversion round-trip is a near-identity") {
    SplitMix64 rng(27);
    for (int trial = 0; trial < 100; ++trial) {
        int k = 1 + static_cast<int>(rng.uniform(0, 8));
        auto z = random_symmetric(k, rng, 4.0);
        z *= 50.0;
        NetworkResponse resp{{}, {1e9, 2e9}, {z, z * Cx(1.0, 0.2)},
                             Representation::Z, 0.0};
        auto back = s_to_z(z_to_s(resp, 50.0), 50.0);
        for (size_t f = 0; f < resp.m.size(); ++f)
            CHECK((back.m[f] - resp.m[f]).norm() / resp.m[f].norm() < 1e-12);
        // symmetry survives both conversions
        auto s = z_to_s(resp, 50.0);
        for (const auto& m : s.m)
            CHECK((m - m.transpose()).norm() < 1e-12 * (1.0 + m.norm()));
    }
}

TEST_CASE("representation mismatches in conversion are rejected") {
    NetworkResponse s{{}, {1e9}, {Eigen::MatrixXcd::Zero(1, 1)},
                      Representation::S, 50.0};
    CHECK_THROWS_AS(z_to_s(s, 50.0), RepresentationMismatch);
    NetworkResponse z{{}, {1e9}, {Eigen::MatrixXcd::Zero(1, 1)},
                      Representation::Z, 0.0};
    CHECK_THROWS_AS(s_to_z(z, 50.0), RepresentationMismatch);
}

TEST_CASE("the two evaluate overloads agree") {
    auto space = DesignSpace(1, 3, 3, false, {1e9, 3e9});
    auto topo = std::make_shared<PortTopology>(space);
    SplitMix64 rng(28);
    PriorData prior;
    prior.topo = topo;
    prior.freqs = space.freq_grid();
    for (int f = 0; f < 2; ++f)
        prior.z.push_back(random_symmetric(topo->q(), rng, 10.0));

    int gp = -1;
    for (const auto& p : topo->ports())
        if (p.cls == PortClass::Ground) {
            gp = p.index;
            break;
        }
    IoSelection io{{gp}};
    auto pattern = PixelPattern::random(space, 0.6, 3);

    ReduceStats sa, sb;
    auto a = evaluate(prior, *topo, pattern, io, 0.0, &sa);
    auto part = partition(prior, io);
    auto b = evaluate(part, *topo, pattern, 0.0, &sb);
    REQUIRE(a.m.size() == b.m.size());
    for (size_t f = 0; f < a.m.size(); ++f)
        CHECK((a.m[f] - b.m[f]).norm() == 0.0);
    CHECK(sa.solve_dim == sb.solve_dim);
    CHECK(a.io_ports == std::vector<int>{gp});
}
