#include "mapes/topology.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace mapes {

const char* port_class_name(PortClass c) {
    switch (c) {
        case PortClass::HorizontalEdge: return "horizontal_edge";
        case PortClass::VerticalEdge: return "vertical_edge";
        case PortClass::Diagonal: return "diagonal";
        case PortClass::Ground: return "ground";
        case PortClass::Via: return "via";
    }
    return "?";
}

PortClass port_class_from_name(const std::string& name) {
    if (name == "horizontal_edge") return PortClass::HorizontalEdge;
    if (name == "vertical_edge") return PortClass::VerticalEdge;
    if (name == "diagonal") return PortClass::Diagonal;
    if (name == "ground") return PortClass::Ground;
    if (name == "via") return PortClass::Via;
    throw MalformedInput("unknown port class: " + name);
}

std::string NodeRef::to_string() const {
    switch (kind) {
        case Kind::Pixel:
            return "P" + std::to_string(layer) + ":" + std::to_string(i) + ":" +
                   std::to_string(j);
        case Kind::Diagonal:
            return "D" + std::to_string(layer) + ":" + std::to_string(i) + ":" +
                   std::to_string(j);
        case Kind::GroundPlane:
            return "GND";
    }
    return "?";
}

NodeRef NodeRef::parse(const std::string& s) {
    if (s == "GND") return NodeRef::ground();
    if (s.size() < 2 || (s[0] != 'P' && s[0] != 'D'))
        throw MalformedInput("bad node ref: " + s);
    NodeRef n;
    n.kind = s[0] == 'P' ? Kind::Pixel : Kind::Diagonal;
    std::istringstream ss(s.substr(1));
    char c1 = 0, c2 = 0;
    if (!(ss >> n.layer >> c1 >> n.i >> c2 >> n.j) || c1 != ':' || c2 != ':')
        throw MalformedInput("bad node ref: " + s);
    return n;
}

long long PortTopology::count_ports(const DesignSpace& s) {
    long long l = s.layers(), m = s.rows(), n = s.cols();
    long long q = l * (6 * m * n - 3 * m - 3 * n + 4);
    if (s.has_vias()) q += (l - 1) * m * n;
    return q;
}

PortTopology::PortTopology(const DesignSpace& space) : space_(space) {
    const int L = space_.layers(), M = space_.rows(), N = space_.cols();
    ports_.reserve(static_cast<size_t>(count_ports(space_)));
    adjacency_.resize(static_cast<size_t>(L) * M * N);

    auto pixel_slot = [&](int layer, int i, int j) -> std::vector<int>& {
        return adjacency_[(static_cast<size_t>(layer - 1) * M + i) * N + j];
    };
    auto add = [&](PortClass cls, int layer, int i, int j, int side,
                   NodeRef a, NodeRef b) {
        PortId p;
        p.index = static_cast<int>(ports_.size());
        p.cls = cls;
        p.layer = layer;
        p.i = i;
        p.j = j;
        p.side = side;
        p.node_a = a;
        p.node_b = b;
        ports_.push_back(p);
        return p.index;
    };

    for (int l = 1; l <= L; ++l) {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j + 1 < N; ++j) {
                int idx = add(PortClass::HorizontalEdge, l, i, j, 0,
                              NodeRef::pixel(l, i, j), NodeRef::pixel(l, i, j + 1));
                pixel_slot(l, i, j).push_back(idx);
                pixel_slot(l, i, j + 1).push_back(idx);
            }
        for (int i = 0; i + 1 < M; ++i)
            for (int j = 0; j < N; ++j) {
                int idx = add(PortClass::VerticalEdge, l, i, j, 0,
                              NodeRef::pixel(l, i, j), NodeRef::pixel(l, i + 1, j));
                pixel_slot(l, i, j).push_back(idx);
                pixel_slot(l, i + 1, j).push_back(idx);
            }
        // Interior corner (i, j) sits between pixels (i, j), (i, j+1),
        // (i+1, j), (i+1, j+1); one port to each.
        for (int i = 0; i + 1 < M; ++i)
            for (int j = 0; j + 1 < N; ++j)
                for (int side = 0; side < 4; ++side) {
                    int pi = i + (side >> 1), pj = j + (side & 1);
                    int idx = add(PortClass::Diagonal, l, i, j, side,
                                  NodeRef::diagonal(l, i, j),
                                  NodeRef::pixel(l, pi, pj));
                    pixel_slot(l, pi, pj).push_back(idx);
                }
        // One ground port per exposed boundary edge: N, S, W, E.
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < N; ++j) {
                const bool exposed[4] = {i == 0, i == M - 1, j == 0, j == N - 1};
                for (int side = 0; side < 4; ++side)
                    if (exposed[side]) {
                        int idx = add(PortClass::Ground, l, i, j, side,
                                      NodeRef::pixel(l, i, j), NodeRef::ground());
                        pixel_slot(l, i, j).push_back(idx);
                    }
            }
    }
    if (space_.has_vias()) {
        for (int l = 1; l < L; ++l)
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < N; ++j) {
                    int idx = add(PortClass::Via, l, i, j, 0,
                                  NodeRef::pixel(l, i, j),
                                  NodeRef::pixel(l + 1, i, j));
                    pixel_slot(l, i, j).push_back(idx);
                    pixel_slot(l + 1, i, j).push_back(idx);
                }
    }
}

std::span<const int> PortTopology::adjacency(int layer, int i, int j) const {
    const int M = space_.rows(), N = space_.cols();
    const auto& v =
        adjacency_[(static_cast<size_t>(layer - 1) * M + i) * N + j];
    return {v.data(), v.size()};
}

std::uint64_t PortTopology::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(space_.layers()));
    mix(static_cast<std::uint64_t>(space_.rows()));
    mix(static_cast<std::uint64_t>(space_.cols()));
    mix(space_.has_vias() ? 1 : 0);
    for (const auto& p : ports_) {
        mix(static_cast<std::uint64_t>(p.cls));
        mix(static_cast<std::uint64_t>(p.layer));
        mix(static_cast<std::uint64_t>(p.i));
        mix(static_cast<std::uint64_t>(p.j));
        mix(static_cast<std::uint64_t>(p.side));
    }
    return h;
}

void export_port_map(const PortTopology& topo, std::ostream& out) {
    out << "index,class,layer,anchor_i,anchor_j,side,node_a,node_b\n";
    for (const auto& p : topo.ports())
        out << p.index << ',' << port_class_name(p.cls) << ',' << p.layer << ','
            << p.i << ',' << p.j << ',' << p.side << ','
            << p.node_a.to_string() << ',' << p.node_b.to_string() << '\n';
}

void export_port_map(const PortTopology& topo, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    export_port_map(topo, f);
    if (!f.good()) throw IoError("write failed: " + path);
}

std::vector<PortId> import_port_map(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw MalformedInput("empty port map");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "index,class,layer,anchor_i,anchor_j,side,node_a,node_b")
        throw MalformedInput("bad port map header: " + line);
    std::vector<PortId> ports;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8)
            throw MalformedInput("bad port map row: " + line);
        PortId p;
        p.index = std::stoi(fields[0]);
        p.cls = port_class_from_name(fields[1]);
        p.layer = std::stoi(fields[2]);
        p.i = std::stoi(fields[3]);
        p.j = std::stoi(fields[4]);
        p.side = std::stoi(fields[5]);
        p.node_a = NodeRef::parse(fields[6]);
        p.node_b = NodeRef::parse(fields[7]);
        ports.push_back(p);
    }
    return ports;
}

}  // namespace mapes
