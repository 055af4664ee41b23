#pragma once

#include <memory>
#include <string>

#include "mapes/prior.hpp"

namespace mapes {

// Binary prior cache: magic "MAPZ1", header {Q, F, topology hash, flags},
// little-endian IEEE-754 double complex payload, CRC32 trailer.

void write_cache(const PriorData& prior, const std::string& path);

PriorData read_cache(const std::string& path,
                     std::shared_ptr<const PortTopology> topo);

}  // namespace mapes
