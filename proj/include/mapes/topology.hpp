#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mapes/design_space.hpp"

namespace mapes {

enum class PortClass { HorizontalEdge, VerticalEdge, Diagonal, Ground, Via };

const char* port_class_name(PortClass c);
PortClass port_class_from_name(const std::string& name);

/// A structural node of the equivalent model: a virtual pixel, a diagonal
/// virtual pixel, or the ground plane. Layers are 1-based.
struct NodeRef {
    enum class Kind { Pixel, Diagonal, GroundPlane };
    Kind kind = Kind::GroundPlane;
    int layer = 0;
    int i = 0;
    int j = 0;

    static NodeRef pixel(int layer, int i, int j) {
        return {Kind::Pixel, layer, i, j};
    }
    static NodeRef diagonal(int layer, int i, int j) {
        return {Kind::Diagonal, layer, i, j};
    }
    static NodeRef ground() { return {}; }

    bool operator==(const NodeRef&) const = default;

    std::string to_string() const;
    static NodeRef parse(const std::string& s);
};

// Side discriminators. Edge ports use 0. Diagonal ports: 0..3 pick the pixel
// endpoint around the interior corner (NW, NE, SW, SE). Ground ports: 0..3
// pick the exposed boundary edge (N, S, W, E).
struct PortId {
    int index = 0;
    PortClass cls = PortClass::Ground;
    int layer = 1;  // for vias: the lower of the two connected layers
    int i = 0;      // anchor row (pixel or interior corner)
    int j = 0;      // anchor col
    int side = 0;
    NodeRef node_a;
    NodeRef node_b;

    bool operator==(const PortId&) const = default;
};

/// Deterministic enumeration of all virtual ports of a design space.
/// Ordering is layer-major, then {HorizontalEdge, VerticalEdge, Diagonal,
/// Ground} row-major within class, with all Via ports appended last.
/// Immutable after construction.
class PortTopology {
public:
    explicit PortTopology(const DesignSpace& space);

    static long long count_ports(const DesignSpace& space);

    const DesignSpace& space() const { return space_; }
    int q() const { return static_cast<int>(ports_.size()); }
    const std::vector<PortId>& ports() const { return ports_; }
    const PortId& port(int index) const { return ports_[index]; }

    /// All port indices touching pixel (i, j) on 1-based layer l: its edge
    /// ports, diagonal ports whose pixel endpoint is (i, j), its ground
    /// ports, and its via ports.
    std::span<const int> adjacency(int layer, int i, int j) const;

    /// FNV-1a over the design-space geometry and the full port list; used to
    /// tie prior-data caches to the topology they were extracted for.
    std::uint64_t hash() const;

private:
    DesignSpace space_;
    std::vector<PortId> ports_;
    std::vector<std::vector<int>> adjacency_;  // flat (layer, i, j)
};

void export_port_map(const PortTopology& topo, std::ostream& out);
void export_port_map(const PortTopology& topo, const std::string& path);
std::vector<PortId> import_port_map(std::istream& in);

}  // namespace mapes
