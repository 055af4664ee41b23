#include "mapes/cache.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace mapes {

namespace {

constexpr char kMagic[5] = {'M', 'A', 'P', 'Z', '1'};

struct Header {
    std::uint32_t q;
    std::uint32_t nfreq;
    std::uint64_t topo_hash;
    std::uint32_t flags;
};

}  // namespace

void write_cache(const PriorData& prior, const std::string& path) {
    prior.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");

    Header h{static_cast<std::uint32_t>(prior.topo->q()),
             static_cast<std::uint32_t>(prior.freqs.size()),
             prior.topo->hash(), 0};

    uLong crc = crc32(0L, Z_NULL, 0);
    auto put = [&](const void* p, size_t n) {
        f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        crc = crc32(crc, static_cast<const Bytef*>(p),
                    static_cast<uInt>(n));
    };
    put(kMagic, sizeof(kMagic));
    put(&h, sizeof(h));
    put(prior.freqs.data(), prior.freqs.size() * sizeof(double));
    for (const auto& m : prior.z)
        put(m.data(), static_cast<size_t>(m.size()) *
                          sizeof(std::complex<double>));
    std::uint32_t trailer = static_cast<std::uint32_t>(crc);
    f.write(reinterpret_cast<const char*>(&trailer), sizeof(trailer));
    if (!f.good()) throw IoError("write failed: " + path);
}

PriorData read_cache(const std::string& path,
                     std::shared_ptr<const PortTopology> topo) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);

    uLong crc = crc32(0L, Z_NULL, 0);
    auto get = [&](void* p, size_t n) {
        f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (f.gcount() != static_cast<std::streamsize>(n))
            throw CorruptCache("truncated cache file: " + path);
        crc = crc32(crc, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    };

    char magic[5];
    get(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CorruptCache("bad magic bytes: " + path);
    Header h{};
    get(&h, sizeof(h));
    if (h.topo_hash != topo->hash())
        throw HashMismatch("cache was written for a different topology: " +
                           path);
    if (h.q != static_cast<std::uint32_t>(topo->q()))
        throw PortCountMismatch("cache Q=" + std::to_string(h.q) +
                                " does not match topology Q=" +
                                std::to_string(topo->q()));

    PriorData prior;
    prior.topo = std::move(topo);
    prior.freqs.resize(h.nfreq);
    get(prior.freqs.data(), h.nfreq * sizeof(double));
    prior.z.reserve(h.nfreq);
    for (std::uint32_t i = 0; i < h.nfreq; ++i) {
        Eigen::MatrixXcd m(h.q, h.q);
        get(m.data(), static_cast<size_t>(m.size()) *
                          sizeof(std::complex<double>));
        prior.z.push_back(std::move(m));
    }
    std::uint32_t trailer = 0;
    f.read(reinterpret_cast<char*>(&trailer), sizeof(trailer));
    if (f.gcount() != sizeof(trailer))
        throw CorruptCache("missing checksum trailer: " + path);
    if (trailer != static_cast<std::uint32_t>(crc))
        throw CorruptCache("checksum mismatch: " + path);
    prior.validate();
    return prior;
}

}  // namespace mapes
