#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mapes/cache.hpp"
#include "mapes/rng.hpp"
#include "mapes/touchstone.hpp"

using namespace mapes;
using Cx = std::complex<double>;

namespace {

std::shared_ptr<PortTopology> topo_1x1() {
    return std::make_shared<PortTopology>(
        DesignSpace(1, 1, 1, false, {1e9, 2e9, 3e9}));
}

PriorData random_prior(std::shared_ptr<const PortTopology> topo,
                       std::uint64_t seed, bool symmetric = true) {
    SplitMix64 rng(seed);
    PriorData prior;
    prior.topo = topo;
    prior.freqs = topo->space().freq_grid();
    const int q = topo->q();
    for (size_t f = 0; f < prior.freqs.size(); ++f) {
        Eigen::MatrixXcd m(q, q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                m(i, j) = Cx(rng.uniform(-10, 10), rng.uniform(-10, 10));
        if (symmetric) m = ((m + m.transpose()) / 2.0).eval();
        prior.z.push_back(std::move(m));
    }
    return prior;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("mapes_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

double max_rel_err(const PriorData& a, const PriorData& b) {
    double worst = 0.0;
    for (size_t f = 0; f < a.z.size(); ++f)
        worst = std::max(worst, (a.z[f] - b.z[f]).norm() / a.z[f].norm());
    return worst;
}

}  // namespace

TEST_CASE("4-port Z-format RI file parses directly") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 1);
    TempDir tmp;
    auto path = tmp.file("prior.z4p");
    write_touchstone(path, prior.freqs, prior.z, 'Z', 50.0);
    auto back = read_touchstone(path, topo);
    REQUIRE(back.z.size() == 3);
    CHECK(back.z[0].rows() == 4);
    CHECK(back.freqs == prior.freqs);
    CHECK(max_rel_err(prior, back) <= 1e-12);
}

TEST_CASE("S-format prior converts to ohms on load") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 2);
    // make it comfortably nonsingular for the S conversion round trip
    for (auto& m : prior.z) m.diagonal().array() += Cx(80.0, 0.0);
    TempDir tmp;
    NetworkResponse z{{}, prior.freqs, prior.z, Representation::Z, 0.0};
    auto s = z_to_s(z, 50.0);
    auto path = tmp.file("prior.s4p");
    write_touchstone(path, s.freqs, s.m, 'S', 50.0);
    auto back = read_touchstone(path, topo);
    CHECK(max_rel_err(prior, back) <= 1e-10);
}

TEST_CASE("port count mismatch is rejected") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 3);
    TempDir tmp;
    auto path = tmp.file("prior.z5p");  // claims 5 ports
    write_touchstone(path, prior.freqs, prior.z, 'Z', 50.0);
    CHECK_THROWS_AS(read_touchstone(path, topo), PortCountMismatch);
}

TEST_CASE("MA and DB formats read back the same data") {
    // hand-written 1-port files, one frequency point
    TempDir tmp;
    {
        std::ofstream f(tmp.file("a.s1p"));
        f << "! comment line\n# MHz S MA R 50\n100 0.5 90\n";
    }
    {
        std::ofstream f(tmp.file("b.s1p"));
        f.precision(17);
        f << "# MHz S DB R 50\n100 " << 20.0 * std::log10(0.5) << " 90\n";
    }
    auto a = read_touchstone_file(tmp.file("a.s1p"));
    auto b = read_touchstone_file(tmp.file("b.s1p"));
    CHECK(a.freqs[0] == 1e8);
    CHECK(std::abs(a.m[0](0, 0) - Cx(0.0, 0.5)) < 1e-12);
    CHECK(std::abs(a.m[0](0, 0) - b.m[0](0, 0)) < 1e-12);
}

TEST_CASE("2-port files use the S11 S21 S12 S22 column order") {
    TempDir tmp;
    {
        std::ofstream f(tmp.file("c.s2p"));
        f << "# HZ S RI R 50\n1e9 11 0 21 0 12 0 22 0\n";
    }
    auto d = read_touchstone_file(tmp.file("c.s2p"));
    CHECK(d.m[0](0, 0).real() == 11);
    CHECK(d.m[0](1, 0).real() == 21);
    CHECK(d.m[0](0, 1).real() == 12);
    CHECK(d.m[0](1, 1).real() == 22);
    // and the writer reproduces that order
    write_touchstone(tmp.file("d.s2p"), d.freqs, d.m, 'S', 50.0);
    std::ifstream f(tmp.file("d.s2p"));
    std::string opt, data;
    std::getline(f, opt);
    std::getline(f, data);
    std::istringstream ss(data);
    double v[9];
    for (double& x : v) ss >> x;
    CHECK(v[1] == 11);
    CHECK(v[3] == 21);
    CHECK(v[5] == 12);
    CHECK(v[7] == 22);
}

TEST_CASE("1-port all-zero S response writes zero data lines") {
    TempDir tmp;
    std::vector<double> freqs{1e9, 2e9};
    std::vector<Eigen::MatrixXcd> m(2, Eigen::MatrixXcd::Zero(1, 1));
    auto path = tmp.file("zero.s1p");
    write_touchstone(path, freqs, m, 'S', 50.0);
    auto back = read_touchstone_file(path);
    for (const auto& mm : back.m) CHECK(mm(0, 0) == Cx(0.0));
}

TEST_CASE("non-increasing frequencies are rejected") {
    TempDir tmp;
    {
        std::ofstream f(tmp.file("bad.s1p"));
        f << "# HZ S RI R 50\n2e9 0 0\n1e9 0 0\n";
    }
    CHECK_THROWS_AS(read_touchstone_file(tmp.file("bad.s1p")),
                    NonIncreasingFrequencies);
}

TEST_CASE("unsupported formats are flagged") {
    TempDir tmp;
    {
        std::ofstream f(tmp.file("y.s1p"));
        f << "# HZ Y RI R 50\n1e9 0 0\n";
    }
    CHECK_THROWS_AS(read_touchstone_file(tmp.file("y.s1p")),
                    UnsupportedFormat);
    CHECK_THROWS_AS(touchstone_port_count("prior.csv"), UnsupportedFormat);
}

TEST_CASE("partition is the exact permutation of the prior") {
    auto space = DesignSpace(1, 2, 2, false, {1e9, 2e9});
    auto topo = std::make_shared<PortTopology>(space);
    auto prior = random_prior(topo, 4);
    const int q = topo->q();

    IoSelection io{{5, 2, 9}};
    auto part = partition(prior, io);
    REQUIRE(part.permutation.size() == static_cast<size_t>(q));

    for (size_t f = 0; f < prior.freqs.size(); ++f) {
        Eigen::MatrixXcd permuted(q, q);
        for (int r = 0; r < q; ++r)
            for (int c = 0; c < q; ++c)
                permuted(r, c) =
                    prior.z[f](part.permutation[r], part.permutation[c]);
        CHECK((part.assemble(static_cast<int>(f)) - permuted).norm() == 0.0);
    }
}

TEST_CASE("partition corner cases") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 5);

    SUBCASE("K = Q-1 leaves a 1x1 VP block") {
        IoSelection io{{0, 1, 2}};
        auto part = partition(prior, io);
        CHECK(part.z_vp_vp[0].rows() == 1);
        CHECK(part.z_vp_vp[0](0, 0) == prior.z[0](3, 3));
    }
    SUBCASE("single I/O port indexes directly") {
        IoSelection io{{2}};
        auto part = partition(prior, io);
        CHECK(part.z_io_io[0](0, 0) == prior.z[0](2, 2));
    }
}

TEST_CASE("reciprocity check reports asymmetric entries") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 6);
    CHECK(prior.check_reciprocity(1e-6).empty());
    prior.z[1](0, 3) += Cx(0.5, 0.0);
    auto v = prior.check_reciprocity(1e-6);
    REQUIRE(v.size() == 1);
    CHECK(v[0].freq_index == 1);
    CHECK(v[0].p == 0);
    CHECK(v[0].q == 3);
}

TEST_CASE("binary cache round-trips losslessly") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 7);
    TempDir tmp;
    auto path = tmp.file("prior.mapz");
    write_cache(prior, path);
    auto back = read_cache(path, topo);
    CHECK(back.freqs == prior.freqs);
    for (size_t f = 0; f < prior.z.size(); ++f)
        CHECK((back.z[f] - prior.z[f]).norm() == 0.0);
}

TEST_CASE("cache rejects a mismatched topology") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 8);
    TempDir tmp;
    auto path = tmp.file("prior.mapz");
    write_cache(prior, path);
    auto other = std::make_shared<PortTopology>(
        DesignSpace(1, 2, 1, false, {1e9, 2e9, 3e9}));
    CHECK_THROWS_AS(read_cache(path, other), HashMismatch);
}

TEST_CASE("corrupted caches are detected") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 9);
    TempDir tmp;
    auto path = tmp.file("prior.mapz");
    write_cache(prior, path);

    SUBCASE("truncation") {
        auto sz = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, sz - 13);
        CHECK_THROWS_AS(read_cache(path, topo), CorruptCache);
    }
    SUBCASE("bit flip") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(64);
        char c;
        f.seekg(64);
        f.get(c);
        f.seekp(64);
        f.put(static_cast<char>(c ^ 0x01));
        f.close();
        CHECK_THROWS_AS(read_cache(path, topo), CorruptCache);
    }
    SUBCASE("wrong magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('X');
        f.close();
        CHECK_THROWS_AS(read_cache(path, topo), CorruptCache);
    }
}

TEST_CASE("cache and Touchstone agree on the same prior") {
    auto topo = topo_1x1();
    auto prior = random_prior(topo, 10);
    TempDir tmp;
    write_cache(prior, tmp.file("p.mapz"));
    write_touchstone(tmp.file("p.z4p"), prior.freqs, prior.z, 'Z', 50.0);
    auto a = read_cache(tmp.file("p.mapz"), topo);
    auto b = read_touchstone(tmp.file("p.z4p"), topo);
    CHECK(max_rel_err(a, b) <= 1e-12);
}
