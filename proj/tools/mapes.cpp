// mapes: pixel design-space evaluation front end.
//
// Subcommands: topology, gen-prior, eval, compare, dataset. Every command is
// deterministic given its flags and seed; --jobs only changes wall time.

#include <CLI11.hpp>
#include <zlib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "mapes/cache.hpp"
#include "mapes/metrics.hpp"
#include "mapes/rng.hpp"
#include "mapes/synth.hpp"
#include "mapes/touchstone.hpp"

namespace fs = std::filesystem;
using namespace mapes;
using nlohmann::json;
using Cx = std::complex<double>;

namespace {

// ---------------------------------------------------------------------------
// Shared option bundles

struct SpaceOpts {
    int rows = 0;
    int cols = 0;
    int layers = 1;
    bool vias = false;
    std::string freq;

    void attach(CLI::App* cmd, bool need_freq) {
        cmd->add_option("--rows", rows, "Pixel rows (M)")->required();
        cmd->add_option("--cols", cols, "Pixel columns (N)")->required();
        cmd->add_option("--layers", layers, "Metal layers (L)");
        cmd->add_flag("--vias", vias, "Enable inter-layer vias");
        auto* f = cmd->add_option("--freq", freq,
                                  "Frequency sweep, start:stop:points (Hz)");
        if (need_freq) f->required();
    }

    DesignSpace space() const {
        std::vector<double> grid =
            freq.empty() ? std::vector<double>{1.0} : parse_freq_spec(freq);
        return DesignSpace(layers, rows, cols, vias, std::move(grid));
    }
};

struct EvalOpts {
    std::string prior;
    std::string io_spec;
    std::string via_z_spec = "0";
    double ref_ohms = 50.0;
    int jobs = 0;
    bool io_any_class = false;
    bool coerce_vias = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--prior", prior,
                        "Prior matrix file (.mapz cache or Touchstone)")
            ->required();
        cmd->add_option("--io", io_spec,
                        "I/O ports: comma-separated indices or "
                        "layer:i:j:side descriptors (side N/S/W/E)")
            ->required();
        cmd->add_option("--via-z", via_z_spec,
                        "Via impedance as re or re,im (ohms)");
        cmd->add_option("--ref-ohms", ref_ohms, "Reference impedance");
        cmd->add_option("--jobs", jobs, "Worker pool size")
            ->envname("MAPES_JOBS");
        cmd->add_flag("--io-any-class", io_any_class,
                      "Allow non-ground I/O ports");
        cmd->add_flag("--coerce-vias", coerce_vias,
                      "Drop vias over absent pixels instead of erroring");
    }

    int pool_size(int n_tasks) const {
        int j = jobs > 0 ? jobs
                         : static_cast<int>(std::max(
                               1u, std::thread::hardware_concurrency()));
        return std::max(1, std::min(j, n_tasks));
    }
};

Cx parse_via_z(const std::string& spec) {
    double re = 0, im = 0;
    char comma = 0;
    std::istringstream ss(spec);
    if (!(ss >> re)) throw MalformedInput("bad --via-z value: " + spec);
    if (ss >> comma) {
        if (comma != ',' || !(ss >> im))
            throw MalformedInput("bad --via-z value: " + spec);
    }
    return {re, im};
}

int side_from_token(const std::string& t) {
    if (t == "N" || t == "n" || t == "0") return 0;
    if (t == "S" || t == "s" || t == "1") return 1;
    if (t == "W" || t == "w" || t == "2") return 2;
    if (t == "E" || t == "e" || t == "3") return 3;
    throw MalformedInput("bad port side '" + t + "' (want N/S/W/E)");
}

IoSelection parse_io(const std::string& spec, const PortTopology& topo,
                     bool any_class) {
    IoSelection io;
    std::istringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        if (token.find(':') == std::string::npos) {
            io.ports.push_back(std::stoi(token));
            continue;
        }
        // layer:i:j:side ground-port descriptor
        std::istringstream ts(token);
        std::string l, i, j, s;
        if (!std::getline(ts, l, ':') || !std::getline(ts, i, ':') ||
            !std::getline(ts, j, ':') || !std::getline(ts, s, ':'))
            throw MalformedInput("bad I/O descriptor '" + token +
                                 "' (want layer:i:j:side)");
        int layer = std::stoi(l), pi = std::stoi(i), pj = std::stoi(j);
        int side = side_from_token(s);
        int found = -1;
        for (const auto& p : topo.ports())
            if (p.cls == PortClass::Ground && p.layer == layer && p.i == pi &&
                p.j == pj && p.side == side) {
                found = p.index;
                break;
            }
        if (found < 0)
            throw ValidationError("no ground port matches descriptor '" +
                                  token + "'");
        io.ports.push_back(found);
    }
    io.validate(topo, any_class);
    return io;
}

PriorData load_prior(const std::string& path,
                     std::shared_ptr<const PortTopology> topo) {
    if (path.ends_with(".mapz")) return read_cache(path, std::move(topo));
    return read_touchstone(path, std::move(topo));
}

PixelPattern load_pattern(const json& j, const DesignSpace& space,
                          bool coerce) {
    std::vector<std::string> warnings;
    auto p = PixelPattern::from_json(j, coerce, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!p.space().same_geometry(space) &&
        !(p.space().layers() == space.layers() &&
          p.space().rows() == space.rows() &&
          p.space().cols() == space.cols()))
        throw DimensionMismatch("pattern geometry does not match --rows/--cols/--layers");
    return p;
}

template <typename Fn>
void parallel_for(int n, int pool, Fn&& fn) {
    if (pool <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errs(pool);
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int t = 0; t < pool; ++t)
        threads.emplace_back([&, t] {
            try {
                for (int i; (i = next.fetch_add(1)) < n;) fn(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    for (auto& th : threads) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

json response_to_json(const NetworkResponse& resp) {
    json j;
    j["rep"] = resp.rep == Representation::S ? "S" : "Z";
    if (resp.rep == Representation::S) j["ref_ohms"] = resp.ref_ohms;
    j["io_ports"] = resp.io_ports;
    j["freqs"] = resp.freqs;
    json m = json::array();
    for (const auto& mat : resp.m) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < mat.cols(); ++c)
                row.push_back({mat(r, c).real(), mat(r, c).imag()});
            rows.push_back(std::move(row));
        }
        m.push_back(std::move(rows));
    }
    j["m"] = std::move(m);
    return j;
}

std::uint32_t file_crc32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                    static_cast<uInt>(in.gcount()));
    return static_cast<std::uint32_t>(crc);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_topology(const SpaceOpts& so, const std::string& out) {
    PortTopology topo(so.space());
    std::cout << "Q = " << topo.q() << "\n";
    std::map<PortClass, int> counts;
    for (const auto& p : topo.ports()) counts[p.cls]++;
    for (auto cls : {PortClass::HorizontalEdge, PortClass::VerticalEdge,
                     PortClass::Diagonal, PortClass::Ground, PortClass::Via})
        if (counts.count(cls))
            std::cout << "  " << port_class_name(cls) << ": " << counts[cls]
                      << "\n";
    if (!out.empty()) {
        export_port_map(topo, out);
        std::cout << "port map written to " << out << "\n";
    }
    return 0;
}

int cmd_gen_prior(const SpaceOpts& so, std::uint64_t seed, double coupling_g,
                  double coupling_c, const std::string& out,
                  std::string network_out) {
    auto topo = std::make_shared<PortTopology>(so.space());
    SynthParams params;
    params.coupling_g = coupling_g;
    params.coupling_c = coupling_c;
    auto net = SyntheticNetwork::generate(topo, params, seed);
    auto prior = net.extract_prior(topo->space().freq_grid());
    auto bad = prior.check_reciprocity();
    if (!bad.empty())
        throw NumericalError("extracted prior violates reciprocity");
    write_cache(prior, out);
    if (network_out.empty()) network_out = out + ".network.json";
    std::ofstream nf(network_out);
    if (!nf) throw IoError("cannot write " + network_out);
    nf << net.to_json().dump(2) << "\n";
    std::cout << "Q = " << topo->q() << ", " << prior.freqs.size()
              << " frequencies\nprior cache: " << out
              << "\nnetwork: " << network_out << "\n";
    return 0;
}

int cmd_eval(const SpaceOpts& so, const EvalOpts& eo,
             const std::string& pattern_path, const std::string& patterns_path,
             const std::string& rep_name, const std::string& out) {
    auto topo = std::make_shared<PortTopology>(so.space());
    auto prior = load_prior(eo.prior, topo);
    auto io = parse_io(eo.io_spec, *topo, eo.io_any_class);
    Cx via_z = parse_via_z(eo.via_z_spec);
    bool want_s = rep_name != "z" && rep_name != "Z";

    auto part = partition(prior, io);
    auto eval_one = [&](const PixelPattern& p) {
        auto resp = evaluate(part, *topo, p, via_z);
        return want_s ? z_to_s(resp, eo.ref_ohms) : resp;
    };

    if (!pattern_path.empty()) {
        std::ifstream pf(pattern_path);
        if (!pf) throw IoError("cannot read " + pattern_path);
        json pj = json::parse(pf, nullptr, true, true);
        auto resp = eval_one(load_pattern(pj, topo->space(), eo.coerce_vias));
        if (out.ends_with(".json")) {
            std::ofstream of(out);
            if (!of) throw IoError("cannot write " + out);
            of << response_to_json(resp).dump(2) << "\n";
        } else {
            write_touchstone(out, resp, eo.ref_ohms);
        }
        std::cout << "wrote " << out << "\n";
        return 0;
    }

    // batch: one JSON pattern per line in, one response record per line out
    std::ifstream pf(patterns_path);
    if (!pf) throw IoError("cannot read " + patterns_path);
    std::vector<PixelPattern> patterns;
    std::string line;
    while (std::getline(pf, line)) {
        if (line.empty()) continue;
        patterns.push_back(load_pattern(json::parse(line), topo->space(),
                                        eo.coerce_vias));
    }
    std::vector<json> records(patterns.size());
    parallel_for(static_cast<int>(patterns.size()),
                 eo.pool_size(static_cast<int>(patterns.size())), [&](int i) {
                     auto r = response_to_json(eval_one(patterns[i]));
                     r["index"] = i;
                     records[i] = std::move(r);
                 });
    std::ofstream of(out);
    if (!of) throw IoError("cannot write " + out);
    for (const auto& r : records) of << r.dump() << "\n";
    std::cout << "wrote " << records.size() << " responses to " << out << "\n";
    return 0;
}

int cmd_compare(const SpaceOpts& so, const EvalOpts& eo,
                const std::string& network_path, int count, double density,
                std::uint64_t seed, const std::string& out) {
    auto topo = std::make_shared<PortTopology>(so.space());
    std::ifstream nf(network_path);
    if (!nf) throw IoError("cannot read " + network_path);
    auto net = SyntheticNetwork::from_json(json::parse(nf),
                                           topo->space().freq_grid());
    if (net.topo().q() != topo->q())
        throw PortCountMismatch("network file does not match the topology");
    auto prior = load_prior(eo.prior, topo);
    auto io = parse_io(eo.io_spec, *topo, eo.io_any_class);
    Cx via_z = parse_via_z(eo.via_z_spec);
    auto part = partition(prior, io);

    std::vector<NetworkResponse> fast(count), truth(count);
    parallel_for(count, eo.pool_size(count), [&](int i) {
        auto pattern = PixelPattern::random(topo->space(), density, seed + i);
        fast[i] =
            z_to_s(evaluate(part, *topo, pattern, via_z), eo.ref_ohms);
        truth[i] = z_to_s(
            net.oracle_solve(pattern, io, via_z, prior.freqs), eo.ref_ohms);
    });
    auto report = mean_error(truth, fast);
    std::cout << render_report(report);
    if (!out.empty()) {
        std::ofstream of(out);
        if (!of) throw IoError("cannot write " + out);
        of << report.to_json().dump(2) << "\n";
    }
    return 0;
}

int cmd_dataset(const SpaceOpts& so, const EvalOpts& eo, int count,
                double density, std::uint64_t seed, int shard_size,
                const std::string& out_dir) {
    auto topo = std::make_shared<PortTopology>(so.space());
    auto prior = load_prior(eo.prior, topo);
    auto io = parse_io(eo.io_spec, *topo, eo.io_any_class);
    Cx via_z = parse_via_z(eo.via_z_spec);
    auto part = partition(prior, io);

    fs::create_directories(out_dir);
    std::vector<json> records(count);
    parallel_for(count, eo.pool_size(count), [&](int i) {
        std::uint64_t pattern_seed = seed + static_cast<std::uint64_t>(i);
        auto pattern =
            PixelPattern::random(topo->space(), density, pattern_seed);
        auto resp =
            z_to_s(evaluate(part, *topo, pattern, via_z), eo.ref_ohms);
        json r = response_to_json(resp);
        r["index"] = i;
        r["pattern_seed"] = pattern_seed;
        r["pattern"] = pattern.to_json();
        records[i] = std::move(r);
    });

    json shards = json::array();
    for (int start = 0, shard = 0; start < count;
         start += shard_size, ++shard) {
        char name[32];
        std::snprintf(name, sizeof name, "shard-%04d.jsonl", shard);
        std::string path = (fs::path(out_dir) / name).string();
        std::ofstream of(path);
        if (!of) throw IoError("cannot write " + path);
        int end = std::min(count, start + shard_size);
        for (int i = start; i < end; ++i) of << records[i].dump() << "\n";
        of.close();
        shards.push_back({{"file", name},
                          {"records", end - start},
                          {"crc32", file_crc32(path)}});
    }

    json manifest;
    manifest["count"] = count;
    manifest["seed"] = seed;
    manifest["density"] = density;
    manifest["io"] = io.ports;
    manifest["ref_ohms"] = eo.ref_ohms;
    manifest["via_z"] = {via_z.real(), via_z.imag()};
    manifest["space"] = {{"layers", so.layers},
                         {"rows", so.rows},
                         {"cols", so.cols},
                         {"vias", so.vias}};
    manifest["freqs"] = prior.freqs;
    manifest["shards"] = std::move(shards);
    std::string mpath = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream mf(mpath);
    if (!mf) throw IoError("cannot write " + mpath);
    mf << manifest.dump(2) << "\n";
    std::cout << count << " records in " << manifest["shards"].size()
              << " shard(s) under " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytical multiport evaluator for pixel design spaces"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Flat key=value config file; keys mirror flag names, "
                   "prefixed by the subcommand (e.g. topology.rows=16)");

    // topology
    auto* t = app.add_subcommand("topology", "Enumerate virtual ports");
    SpaceOpts t_space;
    t_space.attach(t, false);
    std::string t_out;
    t->add_option("--out", t_out, "Port map CSV path");

    // gen-prior
    auto* g = app.add_subcommand(
        "gen-prior", "Generate a synthetic network and its prior cache");
    SpaceOpts g_space;
    g_space.attach(g, true);
    std::uint64_t g_seed = 0;
    double g_cg = 0.0, g_cc = 0.0;
    std::string g_out, g_net;
    g->add_option("--seed", g_seed, "Generation seed");
    g->add_option("--coupling-g", g_cg, "Parasitic coupling conductance (S)");
    g->add_option("--coupling-c", g_cc, "Parasitic coupling capacitance (F)");
    g->add_option("--out", g_out, "Prior cache path (.mapz)")->required();
    g->add_option("--network-out", g_net,
                  "Network JSON path (default: <out>.network.json)");

    // eval
    auto* e = app.add_subcommand("eval", "Evaluate pixel patterns");
    SpaceOpts e_space;
    e_space.attach(e, false);
    EvalOpts e_opts;
    e_opts.attach(e);
    std::string e_pattern, e_patterns, e_rep = "s", e_out;
    auto* po = e->add_option("--pattern", e_pattern, "Pattern JSON file");
    auto* pso =
        e->add_option("--patterns", e_patterns, "Pattern JSONL batch file");
    po->excludes(pso);
    e->add_option("--rep", e_rep, "Output representation: s or z");
    e->add_option("--out", e_out, "Output file (.sKp/.zKp/.json or .jsonl)")
        ->required();

    // compare
    auto* c = app.add_subcommand(
        "compare", "Score reduced responses against direct network solves");
    SpaceOpts c_space;
    c_space.attach(c, false);
    EvalOpts c_opts;
    c_opts.attach(c);
    std::string c_net, c_out;
    int c_count = 10;
    double c_density = 0.5;
    std::uint64_t c_seed = 0;
    c->add_option("--network", c_net, "Synthetic network JSON")->required();
    c->add_option("--count", c_count, "Number of random patterns");
    c->add_option("--density", c_density, "Pixel fill probability");
    c->add_option("--seed", c_seed, "Pattern seed base");
    c->add_option("--out", c_out, "Report JSON path");

    // dataset
    auto* d = app.add_subcommand("dataset",
                                 "Generate a sharded training dataset");
    SpaceOpts d_space;
    d_space.attach(d, false);
    EvalOpts d_opts;
    d_opts.attach(d);
    int d_count = 100, d_shard = 1000;
    double d_density = 0.5;
    std::uint64_t d_seed = 0;
    std::string d_out;
    d->add_option("--count", d_count, "Number of records");
    d->add_option("--density", d_density, "Pixel fill probability");
    d->add_option("--seed", d_seed, "Pattern seed base");
    d->add_option("--shard-size", d_shard, "Records per shard");
    d->add_option("--out", d_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
        if (t->parsed()) return cmd_topology(t_space, t_out);
        if (g->parsed())
            return cmd_gen_prior(g_space, g_seed, g_cg, g_cc, g_out, g_net);
        if (e->parsed()) {
            if (e_pattern.empty() && e_patterns.empty())
                throw ValidationError("eval needs --pattern or --patterns");
            return cmd_eval(e_space, e_opts, e_pattern, e_patterns, e_rep,
                            e_out);
        }
        if (c->parsed())
            return cmd_compare(c_space, c_opts, c_net, c_count, c_density,
                               c_seed, c_out);
        if (d->parsed())
            return cmd_dataset(d_space, d_opts, d_count, d_density, d_seed,
                               d_shard, d_out);
    } catch (const CLI::CallForHelp& h) {
        return app.exit(h);
    } catch (const CLI::ParseError& pe) {
        app.exit(pe);
        return 2;  // bad flags are validation errors
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return err.exit_code();
    } catch (const json::exception& jx) {
        std::cerr << "error: " << jx.what() << "\n";
        return 2;
    } catch (const std::exception& x) {
        std::cerr << "error: " << x.what() << "\n";
        return 1;
    }
    return 0;
}
