#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "mapes/topology.hpp"

namespace mapes {

/// Binary pixel/via tensor of shape M x N x (2L-1). Slices 1..L (0-based
/// 0..L-1) are per-layer pixel presence; slices L..2L-2 are via presence
/// between adjacent layer pairs.
class PixelPattern {
public:
    PixelPattern(const DesignSpace& space, std::uint8_t fill = 0);

    const DesignSpace& space() const { return space_; }

    std::uint8_t at(int i, int j, int slice) const {
        return data_[flat(i, j, slice)];
    }
    void set(int i, int j, int slice, std::uint8_t v) {
        data_[flat(i, j, slice)] = v ? 1 : 0;
    }
    std::uint8_t pixel(int layer, int i, int j) const {  // layer 1-based
        return at(i, j, layer - 1);
    }
    std::uint8_t via(int lower_layer, int i, int j) const {
        return at(i, j, space_.layers() + lower_layer - 1);
    }
    const std::vector<std::uint8_t>& data() const { return data_; }

    /// Throws ViaConstraintViolation listing offending entries; with coerce,
    /// zeroes invalid vias instead and appends one warning per dropped via.
    void validate_vias(bool coerce = false,
                       std::vector<std::string>* warnings = nullptr);

    static PixelPattern from_json(const nlohmann::json& j, bool coerce = false,
                                  std::vector<std::string>* warnings = nullptr);
    nlohmann::json to_json() const;

    /// i.i.d. Bernoulli(density) pixels; vias sampled the same way and then
    /// masked by the via constraint. Deterministic per seed.
    static PixelPattern random(const DesignSpace& space, double density,
                               std::uint64_t seed);

    bool operator==(const PixelPattern& o) const {
        return space_.same_geometry(o.space_) && data_ == o.data_;
    }

private:
    size_t flat(int i, int j, int slice) const {
        return (static_cast<size_t>(slice) * space_.rows() + i) *
                   space_.cols() + j;
    }
    DesignSpace space_;
    std::vector<std::uint8_t> data_;
};

/// Ordered choice of K I/O ports; ordering defines the row/column order of
/// the K x K response. Restricted to Ground-class ports unless allow_any.
struct IoSelection {
    std::vector<int> ports;

    void validate(const PortTopology& topo, bool allow_any_class = false) const;
};

enum class LoadState { Short, Open, Finite };

struct Load {
    LoadState state = LoadState::Open;
    std::complex<double> z{};  // meaningful for Finite only
};

/// Per-port loads for the Q-K non-I/O ports, keyed by original port index
/// (vp_ports ascending), plus the I/O selection that defines the permutation.
struct LoadAssignment {
    std::vector<int> vp_ports;
    std::vector<Load> loads;
    IoSelection io;
};

LoadAssignment map_to_loads(const PixelPattern& pattern,
                            const PortTopology& topo, const IoSelection& io,
                            std::complex<double> via_z = 0.0);

}  // namespace mapes
