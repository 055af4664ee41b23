#include "mapes/pattern.hpp"

#include <algorithm>
#include <unordered_set>

#include "mapes/rng.hpp"

namespace mapes {

PixelPattern::PixelPattern(const DesignSpace& space, std::uint8_t fill)
    : space_(space),
      data_(static_cast<size_t>(space.pattern_slices()) * space.rows() *
                space.cols(),
            fill ? 1 : 0) {}

void PixelPattern::validate_vias(bool coerce,
                                 std::vector<std::string>* warnings) {
    const int L = space_.layers();
    std::string offending;
    for (int l = 1; l <= space_.via_slices(); ++l)
        for (int i = 0; i < space_.rows(); ++i)
            for (int j = 0; j < space_.cols(); ++j) {
                if (!via(l, i, j)) continue;
                if (pixel(l, i, j) && pixel(l + 1, i, j)) continue;
                if (coerce) {
                    set(i, j, L + l - 1, 0);
                    if (warnings)
                        warnings->push_back(
                            "dropped via at (" + std::to_string(i) + "," +
                            std::to_string(j) + ",slice " +
                            std::to_string(L + l) + "): missing pixel");
                } else {
                    offending += " (" + std::to_string(i) + "," +
                                 std::to_string(j) + "," +
                                 std::to_string(L + l) + ")";
                }
            }
    if (!offending.empty())
        throw ViaConstraintViolation(
            "via without overlapping pixels at (i,j,slice):" + offending);
}

namespace {

void read_slice(PixelPattern& p, const nlohmann::json& arr, int slice) {
    const auto& sp = p.space();
    if (!arr.is_array() || static_cast<int>(arr.size()) != sp.rows())
        throw MalformedInput("slice " + std::to_string(slice) +
                             ": expected " + std::to_string(sp.rows()) +
                             " rows");
    for (int i = 0; i < sp.rows(); ++i) {
        const auto& row = arr[i];
        if (!row.is_array() || static_cast<int>(row.size()) != sp.cols())
            throw MalformedInput("slice " + std::to_string(slice) + " row " +
                                 std::to_string(i) + ": expected " +
                                 std::to_string(sp.cols()) + " entries");
        for (int j = 0; j < sp.cols(); ++j) {
            if (!row[j].is_number_integer())
                throw MalformedInput("pattern entries must be integers");
            int v = row[j].get<int>();
            if (v != 0 && v != 1)
                throw MalformedInput("pattern entries must be 0 or 1");
            p.set(i, j, slice, static_cast<std::uint8_t>(v));
        }
    }
}

}  // namespace

PixelPattern PixelPattern::from_json(const nlohmann::json& j, bool coerce,
                                     std::vector<std::string>* warnings) {
    if (!j.is_object()) throw MalformedInput("pattern must be a JSON object");
    for (const char* key : {"rows", "cols", "layers"})
        if (!j.contains(key) || !j[key].is_number_integer())
            throw MalformedInput(std::string("pattern missing integer '") +
                                 key + "'");
    int rows = j["rows"].get<int>();
    int cols = j["cols"].get<int>();
    int layers = j["layers"].get<int>();
    bool has_vias = j.contains("vias") && !j["vias"].empty();
    // Frequency grid is not part of the pattern schema; a placeholder keeps
    // DesignSpace invariants satisfied until the pattern is bound to a prior.
    DesignSpace space(layers, rows, cols, has_vias, {1.0});

    if (!j.contains("pixels") || !j["pixels"].is_array() ||
        static_cast<int>(j["pixels"].size()) != layers)
        throw MalformedInput("'pixels' must list one MxN array per layer");
    PixelPattern p(space);
    for (int l = 0; l < layers; ++l) read_slice(p, j["pixels"][l], l);
    if (has_vias) {
        if (static_cast<int>(j["vias"].size()) != layers - 1)
            throw MalformedInput(
                "'vias' must list one MxN array per adjacent layer pair");
        for (int l = 0; l < layers - 1; ++l)
            read_slice(p, j["vias"][l], layers + l);
    }
    p.validate_vias(coerce, warnings);
    return p;
}

nlohmann::json PixelPattern::to_json() const {
    nlohmann::json j;
    j["rows"] = space_.rows();
    j["cols"] = space_.cols();
    j["layers"] = space_.layers();
    auto slice_json = [&](int slice) {
        nlohmann::json arr = nlohmann::json::array();
        for (int i = 0; i < space_.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int jj = 0; jj < space_.cols(); ++jj)
                row.push_back(static_cast<int>(at(i, jj, slice)));
            arr.push_back(std::move(row));
        }
        return arr;
    };
    j["pixels"] = nlohmann::json::array();
    for (int l = 0; l < space_.layers(); ++l)
        j["pixels"].push_back(slice_json(l));
    if (space_.via_slices() > 0) {
        j["vias"] = nlohmann::json::array();
        for (int l = 0; l < space_.via_slices(); ++l)
            j["vias"].push_back(slice_json(space_.layers() + l));
    }
    return j;
}

PixelPattern PixelPattern::random(const DesignSpace& space, double density,
                                  std::uint64_t seed) {
    if (density < 0.0 || density > 1.0)
        throw ValidationError("density must be in [0, 1]");
    SplitMix64 rng(seed);
    PixelPattern p(space);
    const int slices = space.pattern_slices();
    for (int s = 0; s < slices; ++s)
        for (int i = 0; i < space.rows(); ++i)
            for (int j = 0; j < space.cols(); ++j)
                p.set(i, j, s, rng.bernoulli(density) ? 1 : 0);
    p.validate_vias(/*coerce=*/true);
    return p;
}

void IoSelection::validate(const PortTopology& topo,
                           bool allow_any_class) const {
    if (ports.empty()) throw ValidationError("I/O selection is empty");
    if (static_cast<int>(ports.size()) >= topo.q())
        throw ValidationError("K must be < Q");
    std::unordered_set<int> seen;
    for (int p : ports) {
        if (p < 0 || p >= topo.q())
            throw ValidationError("I/O port index out of range: " +
                                  std::to_string(p));
        if (!seen.insert(p).second)
            throw ValidationError("duplicate I/O port index: " +
                                  std::to_string(p));
        if (!allow_any_class && topo.port(p).cls != PortClass::Ground)
            throw ValidationError(
                "I/O port " + std::to_string(p) +
                " is not a ground port (use the any-port flag to override)");
    }
}

LoadAssignment map_to_loads(const PixelPattern& pattern,
                            const PortTopology& topo, const IoSelection& io,
                            std::complex<double> via_z) {
    const auto& ps = pattern.space();
    const auto& ts = topo.space();
    if (ps.layers() != ts.layers() || ps.rows() != ts.rows() ||
        ps.cols() != ts.cols())
        throw DimensionMismatch("pattern and topology design spaces differ");
    if (ps.has_vias() && !ts.has_vias())
        throw DimensionMismatch("pattern has via slices but topology has not");
    // A pattern without via slices against a via-enabled topology means all
    // vias absent.
    const bool pattern_has_vias = ps.has_vias();
    std::vector<char> is_io(topo.q(), 0);
    for (int p : io.ports) {
        if (p < 0 || p >= topo.q())
            throw ValidationError("I/O port index out of range: " +
                                  std::to_string(p));
        is_io[p] = 1;
    }

    LoadAssignment out;
    out.io = io;
    out.vp_ports.reserve(topo.q() - io.ports.size());
    out.loads.reserve(topo.q() - io.ports.size());
    for (const PortId& port : topo.ports()) {
        if (is_io[port.index]) continue;
        Load load;
        switch (port.cls) {
            case PortClass::Ground:
                load.state = LoadState::Open;
                break;
            case PortClass::HorizontalEdge:
            case PortClass::VerticalEdge: {
                bool a = pattern.pixel(port.node_a.layer, port.node_a.i,
                                       port.node_a.j);
                bool b = pattern.pixel(port.node_b.layer, port.node_b.i,
                                       port.node_b.j);
                load.state = (a && b) ? LoadState::Short : LoadState::Open;
                break;
            }
            case PortClass::Diagonal: {
                // The diagonal virtual pixel itself is scaffolding; only the
                // pixel endpoint decides the state.
                bool b = pattern.pixel(port.node_b.layer, port.node_b.i,
                                       port.node_b.j);
                load.state = b ? LoadState::Short : LoadState::Open;
                break;
            }
            case PortClass::Via: {
                if (pattern_has_vias && pattern.via(port.layer, port.i, port.j)) {
                    if (via_z == std::complex<double>(0.0)) {
                        load.state = LoadState::Short;
                    } else {
                        load.state = LoadState::Finite;
                        load.z = via_z;
                    }
                } else {
                    load.state = LoadState::Open;
                }
                break;
            }
        }
        out.vp_ports.push_back(port.index);
        out.loads.push_back(load);
    }
    return out;
}

}  // namespace mapes
